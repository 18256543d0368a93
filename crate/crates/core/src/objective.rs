//! Fitness functionals on the final cavity state and the genome evaluator.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use log::warn;
use num_complex::Complex64;

use crate::cavity::{
    final_state_with_map, trajectory_with_map, AncillaKind, CollisionMap, CollisionScenario, FockSpace, Physics,
};
use crate::error::{Error, Result};
use crate::genome::{decode, decode_ancillae, decode_physics, GenomeLayout, ScenarioTemplate, Timing};
use crate::opalg::{trace_distance, von_neumann_entropy, ComplexMatrix, DensityMatrix};

/// Population of the two highest Fock levels above which moments are unreliable.
pub const MOMENT_LEAKAGE_WARN: f64 = 1e-4;

/// Slack below the uncertainty bound that is clamped instead of rejected.
const UNCERTAINTY_SLACK: f64 = 1e-6;

/// Maximum number of cached collision maps.
const CACHE_CAPACITY: usize = 256;

#[derive(Clone, Debug)]
pub enum Objective {
    /// `-trace_distance(final, target)`, in [-1, 0].
    TraceDistanceToTarget(DensityMatrix),
    /// Relative entropy to the Gaussian state with the same moments.
    NonGaussianity,
}

impl Objective {
    pub fn evaluate(&self, final_state: &DensityMatrix) -> Result<f64> {
        match self {
            Self::TraceDistanceToTarget(target) => fitness_trace_distance(final_state, target),
            Self::NonGaussianity => nongaussianity(final_state),
        }
    }
}

pub fn fitness_trace_distance(final_state: &DensityMatrix, target: &DensityMatrix) -> Result<f64> {
    Ok(-trace_distance(final_state, target)?)
}

/// Quadratures `X_phi = (a e^{-i phi} + a† e^{i phi}) / 2` for phi = 0, pi/2,
/// with their symmetrized products.
#[derive(Clone, Debug)]
pub struct QuadratureFrame {
    x: [ComplexMatrix; 2],
    /// `{X_i, X_j}` for (0,0), (0,1), (1,1).
    anticommutators: [ComplexMatrix; 3],
}

impl QuadratureFrame {
    pub fn new(space: &FockSpace) -> Self {
        let a = space.annihilation();
        let ad = space.creation();
        let x0 = (&a + &ad).scale_real(0.5);
        let x1 = (&a.scale(Complex64::new(0.0, -0.5))) + &ad.scale(Complex64::new(0.0, 0.5));
        let anti = |p: &ComplexMatrix, q: &ComplexMatrix| &(p * q) + &(q * p);
        let anticommutators = [anti(&x0, &x0), anti(&x0, &x1), anti(&x1, &x1)];
        Self { x: [x0, x1], anticommutators }
    }

    pub fn quadrature(&self, k: usize) -> &ComplexMatrix {
        &self.x[k]
    }

    /// `sigma_ij = <{X_i, X_j}> - 2 <X_i><X_j>`
    pub fn covariance(&self, rho: &DensityMatrix) -> Result<[[f64; 2]; 2]> {
        let pops = rho.populations();
        let leak: f64 = pops.iter().rev().take(2).sum();
        if leak > MOMENT_LEAKAGE_WARN {
            warn!("top Fock levels hold population {leak:.3e}; quadrature moments are affected by truncation");
        }
        let m0 = rho.expectation(&self.x[0])?.re;
        let m1 = rho.expectation(&self.x[1])?.re;
        let s00 = rho.expectation(&self.anticommutators[0])?.re - 2.0 * m0 * m0;
        let s01 = rho.expectation(&self.anticommutators[1])?.re - 2.0 * m0 * m1;
        let s11 = rho.expectation(&self.anticommutators[2])?.re - 2.0 * m1 * m1;
        Ok([[s00, s01], [s01, s11]])
    }
}

pub fn covariance_matrix(rho: &DensityMatrix) -> Result<[[f64; 2]; 2]> {
    QuadratureFrame::new(&FockSpace::new(rho.dim())?).covariance(rho)
}

/// `h(x) = (x + 1/2) ln(x + 1/2) - (x - 1/2) ln(x - 1/2)`, with 0 ln 0 = 0.
pub fn gaussian_entropy(x: f64) -> f64 {
    let xlogx = |y: f64| if y > 0.0 { y * y.ln() } else { 0.0 };
    xlogx(x + 0.5) - xlogx(x - 0.5)
}

/// `h(sqrt(det sigma)) - S(rho)`.
pub fn nongaussianity(rho: &DensityMatrix) -> Result<f64> {
    nongaussianity_in(&QuadratureFrame::new(&FockSpace::new(rho.dim())?), rho)
}

pub fn nongaussianity_in(frame: &QuadratureFrame, rho: &DensityMatrix) -> Result<f64> {
    let s = frame.covariance(rho)?;
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let root = det.max(0.0).sqrt();
    if root < 0.5 - UNCERTAINTY_SLACK {
        return Err(Error::Unphysical { root_det: root });
    }
    let value = gaussian_entropy(root.max(0.5)) - von_neumann_entropy(rho)?;
    if value < 0.0 {
        if value < -1e-9 {
            warn!("negative non-Gaussianity {value:.3e} clamped to 0");
        }
        return Ok(0.0);
    }
    Ok(value)
}

/// Exact bit pattern of the constants fixing a collision map.
type CacheKey = [u64; 9];

fn cache_key(p: &Physics, t_c: f64) -> CacheKey {
    let (w1, w2, tag) = match p.ancilla {
        AncillaKind::DiagonalQubit { omega_a } => (omega_a, 0.0, 0),
        AncillaKind::GenericQubit { omega_a } => (omega_a, 0.0, 1),
        AncillaKind::Qutrit { omega_1, omega_2 } => (omega_1, omega_2, 2),
    };
    let c = &p.couplings;
    [
        (p.space.n_levels() as u64) << 2 | tag,
        p.omega_c.to_bits(),
        w1.to_bits(),
        w2.to_bits(),
        c.g_l.to_bits(),
        c.g_l1.to_bits(),
        c.g_nl.to_bits(),
        c.g_l2.to_bits(),
        t_c.to_bits(),
    ]
}

/// Genome -> fitness: decode, run the collisions, score the final state.
///
/// Collision maps are cached when the genome has no head genes, since the
/// constants then depend at most on the collision count.
pub struct Evaluator {
    layout: GenomeLayout,
    template: ScenarioTemplate,
    objective: Objective,
    frame: Option<QuadratureFrame>,
    cache: Option<RwLock<HashMap<CacheKey, Arc<CollisionMap>>>>,
}

impl Evaluator {
    pub fn new(layout: GenomeLayout, template: ScenarioTemplate, objective: Objective) -> Result<Self> {
        layout.validate()?;
        template.physics.joint_hamiltonian()?;
        if template.initial_state.dim() != template.physics.dim_s() {
            return Err(Error::Dimension(format!(
                "initial state has dimension {}, cavity has {}",
                template.initial_state.dim(),
                template.physics.dim_s()
            )));
        }
        if let Objective::TraceDistanceToTarget(target) = &objective {
            if target.dim() != template.physics.dim_s() {
                return Err(Error::Dimension(format!(
                    "target has dimension {}, cavity has {}",
                    target.dim(),
                    template.physics.dim_s()
                )));
            }
        }
        if let Timing::Fixed { t_c, n } = template.timing {
            if n == 0 || !(t_c > 0.0) {
                return Err(Error::Config(format!("fixed timing needs n >= 1 and t_c > 0, got n = {n}, t_c = {t_c}")));
            }
        }
        let frame =
            matches!(objective, Objective::NonGaussianity).then(|| QuadratureFrame::new(&template.physics.space));
        let cache = (layout.lambda0() == 0).then(|| RwLock::new(HashMap::new()));
        Ok(Self { layout, template, objective, frame, cache })
    }

    pub fn layout(&self) -> &GenomeLayout {
        &self.layout
    }

    pub fn template(&self) -> &ScenarioTemplate {
        &self.template
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn scenario(&self, genes: &[f64]) -> Result<CollisionScenario> {
        decode(genes, &self.layout, &self.template)
    }

    fn map(&self, physics: &Physics, t_c: f64) -> Result<Arc<CollisionMap>> {
        let Some(cache) = &self.cache else {
            return Ok(Arc::new(physics.collision_map(t_c)?));
        };
        let key = cache_key(physics, t_c);
        if let Some(map) = cache.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(map));
        }
        let map = Arc::new(physics.collision_map(t_c)?);
        let mut guard = cache.write().expect("cache lock");
        if guard.len() < CACHE_CAPACITY {
            guard.insert(key, Arc::clone(&map));
        }
        Ok(map)
    }

    fn prepare(&self, genes: &[f64]) -> Result<(Arc<CollisionMap>, Vec<DensityMatrix>)> {
        let n = self.layout.check(genes)?;
        let physics = decode_physics(genes, &self.layout, &self.template.physics)?;
        let t_c = self.template.timing.collision_time(n)?;
        let ancillae = decode_ancillae(genes, &self.layout, &physics)?;
        Ok((self.map(&physics, t_c)?, ancillae))
    }

    pub fn final_state(&self, genes: &[f64]) -> Result<DensityMatrix> {
        let (map, ancillae) = self.prepare(genes)?;
        final_state_with_map(&map, &self.template.initial_state, &ancillae)
    }

    pub fn trajectory(&self, genes: &[f64]) -> Result<Vec<DensityMatrix>> {
        let (map, ancillae) = self.prepare(genes)?;
        trajectory_with_map(&map, &self.template.initial_state, &ancillae)
    }

    pub fn score(&self, final_state: &DensityMatrix) -> Result<f64> {
        match (&self.objective, &self.frame) {
            (Objective::NonGaussianity, Some(frame)) => nongaussianity_in(frame, final_state),
            (objective, _) => objective.evaluate(final_state),
        }
    }

    pub fn fitness(&self, genes: &[f64]) -> Result<f64> {
        self.score(&self.final_state(genes)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{coherent_state, fock_state, run_trajectory, thermal_state, Couplings};
    use crate::genome::{AncillaVariant, Bounds, HeadGene, HeadSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn space(n: usize) -> FockSpace {
        FockSpace::new(n).unwrap()
    }

    #[test]
    fn trace_distance_fitness() {
        let vac = fock_state(&space(5), 0).unwrap();
        let one = fock_state(&space(5), 1).unwrap();
        assert_eq!(fitness_trace_distance(&vac, &vac).unwrap(), 0.0);
        assert_abs_diff_eq!(fitness_trace_distance(&vac, &one).unwrap(), -1.0, epsilon = 1e-15);
        assert!(fitness_trace_distance(&vac, &fock_state(&space(4), 0).unwrap()).is_err());
    }

    #[test]
    fn quadratures_are_canonical() {
        let frame = QuadratureFrame::new(&space(12));
        for k in 0..2 {
            assert!(frame.quadrature(k).hermiticity_error() < 1e-15);
        }
        let comm = frame.quadrature(0).commutator(frame.quadrature(1)).unwrap();
        // [X_0, X_pi/2] = i/2 away from the truncation edge
        for i in 0..11 {
            assert_abs_diff_eq!(comm[(i, i)].im, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn vacuum_covariance() {
        let s = covariance_matrix(&fock_state(&space(10), 0).unwrap()).unwrap();
        assert_abs_diff_eq!(s[0][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1][1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0][1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn thermal_covariance_matches_bose_occupation() {
        for &beta in &[0.5, 1.0, 2.0] {
            let sp = space(80);
            let rho = thermal_state(&sp.system_hamiltonian(1.0), beta).unwrap();
            let nbar = 1.0 / (f64::exp(beta) - 1.0);
            let s = covariance_matrix(&rho).unwrap();
            assert_abs_diff_eq!(s[0][0], (2.0 * nbar + 1.0) / 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(s[1][1], (2.0 * nbar + 1.0) / 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(s[0][1], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_covariance_equals_vacuum() {
        let rho = coherent_state(&space(25), Complex64::new(1.0, 0.0)).unwrap();
        let s = covariance_matrix(&rho).unwrap();
        assert_abs_diff_eq!(s[0][0], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(s[1][1], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(s[0][1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn gaussian_entropy_values() {
        assert_eq!(gaussian_entropy(0.5), 0.0);
        assert_abs_diff_eq!(gaussian_entropy(1.5), 2.0 * std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn fock_nongaussianity() {
        let sp = space(30);
        assert_abs_diff_eq!(nongaussianity(&fock_state(&sp, 0).unwrap()).unwrap(), 0.0, epsilon = 1e-14);
        // |k>: sqrt(det sigma) = k + 1/2, so h = (k+1) ln(k+1) - k ln k
        for (k, expected) in [(1usize, 1.38), (2, 1.91), (3, 2.25), (4, 2.50)] {
            let kf = k as f64;
            let exact = (kf + 1.0) * (kf + 1.0).ln() - kf * kf.ln();
            let v = nongaussianity(&fock_state(&sp, k).unwrap()).unwrap();
            assert_abs_diff_eq!(v, exact, epsilon = 1e-12);
            assert_abs_diff_eq!(v, expected, epsilon = 0.02);
        }
    }

    #[test]
    fn thermal_states_are_gaussian() {
        for &beta in &[0.5, 1.0, 2.0] {
            let rho = thermal_state(&space(80).system_hamiltonian(1.0), beta).unwrap();
            assert_abs_diff_eq!(nongaussianity(&rho).unwrap(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn nongaussianity_is_displacement_invariant() {
        let sp = space(40);
        let fock = fock_state(&sp, 2).unwrap();
        let base = nongaussianity(&fock).unwrap();
        let d = crate::opalg::propagator(
            &(&sp.creation().scale(Complex64::new(0.0, 0.4)) + &sp.annihilation().scale(Complex64::new(0.0, -0.4))),
            1.0,
        )
        .unwrap();
        let displaced = fock.conjugate(&d).unwrap();
        assert_abs_diff_eq!(nongaussianity(&displaced).unwrap(), base, epsilon = 1e-6);
    }

    #[test]
    fn unphysical_covariance_is_rejected() {
        // in a two-level truncation, (|0> + |1>)/sqrt 2 has sigma_00 = 0
        let edge = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(nongaussianity(&edge), Err(Error::Unphysical { .. })));
    }

    fn evaluator(ancilla: AncillaKind, head: Vec<HeadSpec>, timing: Timing) -> Evaluator {
        let sp = space(8);
        let physics = Physics { space: sp, omega_c: 1.0, ancilla, couplings: Couplings::linear(1.0) };
        let target = thermal_state(&sp.system_hamiltonian(1.0), 1.0).unwrap();
        let layout = GenomeLayout::new(head, AncillaVariant::of(&ancilla), Bounds::new(-5.0, 5.0)).unwrap();
        let template = ScenarioTemplate { physics, initial_state: fock_state(&sp, 0).unwrap(), timing };
        Evaluator::new(layout, template, Objective::TraceDistanceToTarget(target)).unwrap()
    }

    #[test]
    fn evaluator_matches_direct_path() {
        let ev = evaluator(AncillaKind::GenericQubit { omega_a: 1.0 }, vec![], Timing::Fixed { t_c: 0.5, n: 3 });
        let genes = [0.3, 0.6, 0.1, 0.9, 0.2, 0.7, 0.5, 0.5, 0.5];
        let direct = run_trajectory(&ev.scenario(&genes).unwrap()).unwrap();
        let target = match ev.objective() {
            Objective::TraceDistanceToTarget(t) => t.clone(),
            _ => unreachable!(),
        };
        let expected = -trace_distance(direct.last().unwrap(), &target).unwrap();
        assert_abs_diff_eq!(ev.fitness(&genes).unwrap(), expected, epsilon = 1e-12);
        // cached second call is identical
        assert_eq!(ev.fitness(&genes).unwrap(), ev.fitness(&genes).unwrap());
        assert_eq!(ev.trajectory(&genes).unwrap().len(), 4);
        assert!(ev.fitness(&genes[..8]).is_err());
    }

    #[test]
    fn evaluator_with_head_genes() {
        let head = vec![HeadSpec { gene: HeadGene::GL, bounds: Bounds::new(-1.0, 1.0) }];
        let ev = evaluator(AncillaKind::DiagonalQubit { omega_a: 1.0 }, head, Timing::Variable { total_time: 2.0 });
        // zero coupling leaves the vacuum untouched
        let f = ev.fitness(&[0.5, 1.0, 1.0, 0.0]).unwrap();
        let vac = fock_state(&space(8), 0).unwrap();
        let target = thermal_state(&space(8).system_hamiltonian(1.0), 1.0).unwrap();
        assert_abs_diff_eq!(f, -trace_distance(&vac, &target).unwrap(), epsilon = 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn trace_distance_fitness_is_unitarily_invariant(
            p in proptest::collection::vec(0.01..1.0f64, 4),
            q in proptest::collection::vec(0.01..1.0f64, 4),
            t in 0.0..3.0f64,
        ) {
            let a = DensityMatrix::from_populations(&p).unwrap();
            let b = DensityMatrix::from_populations(&q).unwrap();
            let sp = space(4);
            let h = &sp.creation() + &sp.annihilation();
            let u = crate::opalg::propagator(&h, t).unwrap();
            let before = fitness_trace_distance(&a, &b).unwrap();
            let after = fitness_trace_distance(&a.conjugate(&u).unwrap(), &b.conjugate(&u).unwrap()).unwrap();
            prop_assert!((before - after).abs() < 1e-10);
            prop_assert!((-1.0..=0.0).contains(&before));
        }
    }
}
