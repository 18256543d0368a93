//! Unoptimized reference dynamics: every collision uses the same ancilla
//! state, either thermal or thermal with a sigma_y coherence.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{run_trajectory, AncillaKind, CollisionScenario, Physics};
use crate::error::{Error, Result};
use crate::opalg::{pauli, trace_distance, DensityMatrix};

/// Default number of grid points of a chi sweep.
pub const DEFAULT_CHI_GRID: usize = 129;

/// Relative slack on the positivity bound.
const CHI_TOL: f64 = 1e-12;

const GOLDEN_ITERATIONS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stream", rename_all = "snake_case")]
pub enum BaselineStream {
    HomogeneousThermal { beta_a: f64 },
    CoherentThermal { beta: f64, chi: f64 },
}

impl BaselineStream {
    /// The ancilla state repeated in every collision.
    pub fn ancilla_state(&self, ancilla: &AncillaKind) -> Result<DensityMatrix> {
        match (*self, *ancilla) {
            (Self::HomogeneousThermal { beta_a }, kind) => kind.thermal(beta_a),
            (
                Self::CoherentThermal { beta, chi },
                AncillaKind::DiagonalQubit { omega_a } | AncillaKind::GenericQubit { omega_a },
            ) => coherent_thermal_ancilla(beta, chi, omega_a),
            (Self::CoherentThermal { .. }, kind) => {
                Err(Error::Config(format!("coherent-thermal streams need qubit ancillae, got {kind:?}")))
            }
        }
    }
}

/// Largest |chi| keeping the Gibbs qubit minus chi sigma_y positive:
/// `sqrt(p_e p_g) = 1 / (2 cosh(beta omega_a / 2))`.
pub fn chi_max(beta: f64, omega_a: f64) -> f64 {
    0.5 / (0.5 * beta * omega_a).cosh()
}

/// `exp(-beta H_A) / Z - chi sigma_y`.
pub fn coherent_thermal_ancilla(beta: f64, chi: f64, omega_a: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::NonFinite { name: "beta", value: beta });
    }
    if !chi.is_finite() {
        return Err(Error::NonFinite { name: "chi", value: chi });
    }
    let bound = chi_max(beta, omega_a);
    if chi.abs() > bound * (1.0 + CHI_TOL) {
        return Err(Error::Positivity { chi, chi_max: bound });
    }
    let gibbs = AncillaKind::GenericQubit { omega_a }.thermal(beta)?;
    DensityMatrix::new(gibbs.matrix().checked_sub(&pauli::sigma_y().scale_real(chi))?)
}

/// Trajectory of `n` collisions with identical ancillae.
pub fn run_baseline(
    stream: &BaselineStream,
    physics: &Physics,
    initial: &DensityMatrix,
    n: usize,
    t_c: f64,
) -> Result<Vec<DensityMatrix>> {
    let rho_a = stream.ancilla_state(&physics.ancilla)?;
    let scenario =
        CollisionScenario { physics: *physics, t_c, initial_state: initial.clone(), ancilla_states: vec![rho_a; n] };
    run_trajectory(&scenario)
}

/// Trace distance to `target` after every collision of a baseline run.
pub fn baseline_curve(
    stream: &BaselineStream,
    physics: &Physics,
    initial: &DensityMatrix,
    target: &DensityMatrix,
    n: usize,
    t_c: f64,
) -> Result<Vec<f64>> {
    run_baseline(stream, physics, initial, n, t_c)?.iter().map(|rho| trace_distance(rho, target)).collect()
}

/// Uniform grid over [-chi_max, chi_max].
pub fn chi_grid(beta: f64, omega_a: f64, points: usize) -> Vec<f64> {
    let bound = chi_max(beta, omega_a);
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points).map(|k| -bound + 2.0 * bound * k as f64 / (points - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSweep {
    /// Best coherence found.
    pub chi_bar: f64,
    pub best_distance: f64,
    /// (chi, trace distance) over the grid.
    pub curve: Vec<(f64, f64)>,
}

/// Everything of a chi sweep except the grid.
#[derive(Clone, Debug)]
pub struct ChiSweepProblem {
    pub physics: Physics,
    pub beta: f64,
    pub initial: DensityMatrix,
    pub target: DensityMatrix,
    pub total_time: f64,
    pub t_c: f64,
}

impl ChiSweepProblem {
    pub fn collisions(&self) -> usize {
        (self.total_time / self.t_c).round().max(1.0) as usize
    }

    /// Final trace distance for a coherent-thermal stream with coherence `chi`.
    pub fn distance(&self, chi: f64) -> Result<f64> {
        let stream = BaselineStream::CoherentThermal { beta: self.beta, chi };
        let rho_a = stream.ancilla_state(&self.physics.ancilla)?;
        let map = self.physics.collision_map(self.t_c)?;
        let mut rho = self.initial.clone();
        for _ in 0..self.collisions() {
            rho = map.apply(&rho, &rho_a)?;
        }
        trace_distance(&rho, &self.target)
    }

    fn omega_a(&self) -> Result<f64> {
        match self.physics.ancilla {
            AncillaKind::DiagonalQubit { omega_a } | AncillaKind::GenericQubit { omega_a } => Ok(omega_a),
            kind => Err(Error::Config(format!("chi sweeps need qubit ancillae, got {kind:?}"))),
        }
    }
}

/// Grid search over `grid` followed by golden-section refinement between the
/// neighbours of the best grid point.
pub fn sweep_chi(problem: &ChiSweepProblem, grid: &[f64]) -> Result<ChiSweep> {
    if grid.is_empty() {
        return Err(Error::Config("empty chi grid".into()));
    }
    let bound = chi_max(problem.beta, problem.omega_a()?);
    if let Some(&bad) = grid.iter().find(|c| c.abs() > bound * (1.0 + CHI_TOL)) {
        return Err(Error::Positivity { chi: bad, chi_max: bound });
    }
    // one map shared by all grid points
    let map = problem.physics.collision_map(problem.t_c)?;
    let n = problem.collisions();
    let eval = |chi: f64| -> Result<f64> {
        let rho_a =
            BaselineStream::CoherentThermal { beta: problem.beta, chi }.ancilla_state(&problem.physics.ancilla)?;
        let mut rho = problem.initial.clone();
        for _ in 0..n {
            rho = map.apply(&rho, &rho_a)?;
        }
        trace_distance(&rho, &problem.target)
    };
    let values: Vec<f64> = grid.par_iter().map(|&c| eval(c)).collect::<Result<_>>()?;
    let curve: Vec<(f64, f64)> = grid.iter().copied().zip(values).collect();
    let k = (0..curve.len()).min_by(|&i, &j| curve[i].1.total_cmp(&curve[j].1)).expect("nonempty");
    let (mut chi_bar, mut best) = curve[k];

    if curve.len() >= 2 {
        let lo = curve[k.saturating_sub(1)].0.min(curve[(k + 1).min(curve.len() - 1)].0);
        let hi = curve[k.saturating_sub(1)].0.max(curve[(k + 1).min(curve.len() - 1)].0);
        let (c, d) = golden_section(lo, hi, GOLDEN_ITERATIONS, &eval)?;
        debug!("golden refinement around grid point {k}: chi = {c}, distance = {d}");
        if d < best {
            chi_bar = c;
            best = d;
        }
    }
    Ok(ChiSweep { chi_bar, best_distance: best, curve })
}

/// Minimizes a unimodal `f` on [a, b].
fn golden_section(mut a: f64, mut b: f64, iterations: usize, f: &impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..iterations {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{coherent_state, fock_state, thermal_state, Couplings, FockSpace};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn physics(n: usize, g: f64) -> Physics {
        Physics::resonant_qubit(FockSpace::new(n).unwrap(), g)
    }

    /// Smallest chi at which the minimum eigenvalue turns negative, by bisection.
    fn chi_bisection(beta: f64, omega: f64) -> f64 {
        let min_eig = |chi: f64| {
            let gibbs = AncillaKind::GenericQubit { omega_a: omega }.thermal(beta).unwrap();
            let m = gibbs.matrix().checked_sub(&pauli::sigma_y().scale_real(chi)).unwrap();
            crate::opalg::hermitian_eigenvalues(&m).unwrap()[0]
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if min_eig(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn chi_max_matches_bisection() {
        for &beta in &[-5.0, 0.0, 1.0, 5.0] {
            assert_abs_diff_eq!(chi_max(beta, 1.0), chi_bisection(beta, 1.0), epsilon = 1e-9);
        }
        assert_eq!(chi_max(0.0, 1.0), 0.5);
        assert_abs_diff_eq!(chi_max(5.0, 1.0), 1.0 / (2.5f64.exp() + (-2.5f64).exp()), epsilon = 1e-15);
        assert_abs_diff_eq!(chi_max(5.0, 1.0), 0.0816, epsilon = 1e-4);
        assert!(chi_max(1e4, 1.0) < 1e-300);
    }

    #[test]
    fn coherent_thermal_admissibility() {
        let plain = coherent_thermal_ancilla(5.0, 0.0, 1.0).unwrap();
        let gibbs = AncillaKind::GenericQubit { omega_a: 1.0 }.thermal(5.0).unwrap();
        assert!(plain.matrix().max_abs_diff(gibbs.matrix()) < 1e-15);
        let edge = coherent_thermal_ancilla(5.0, 0.08, 1.0).unwrap();
        assert!(edge.eigenvalues().unwrap()[0] >= 0.0);
        assert!(matches!(coherent_thermal_ancilla(5.0, 0.1, 1.0), Err(Error::Positivity { .. })));
        assert!(coherent_thermal_ancilla(5.0, -chi_max(5.0, 1.0), 1.0).is_ok());
    }

    #[test]
    fn homogeneous_stream_matches_explicit_scenario() {
        let p = physics(10, 1.0);
        let init = fock_state(&p.space, 0).unwrap();
        let stream = BaselineStream::HomogeneousThermal { beta_a: 1.0 };
        let base = run_baseline(&stream, &p, &init, 6, 0.5).unwrap();
        let rho_a = AncillaKind::GenericQubit { omega_a: 1.0 }.thermal(1.0).unwrap();
        let scenario = CollisionScenario { physics: p, t_c: 0.5, initial_state: init, ancilla_states: vec![rho_a; 6] };
        assert_eq!(base, run_trajectory(&scenario).unwrap());
    }

    #[test]
    fn zero_coupling_baseline_is_frozen() {
        let mut p = physics(8, 0.0);
        p.couplings = Couplings::default();
        let init = thermal_state(&p.space.system_hamiltonian(1.0), 2.0).unwrap();
        let traj = run_baseline(&BaselineStream::HomogeneousThermal { beta_a: -1.0 }, &p, &init, 5, 0.3).unwrap();
        for rho in &traj {
            assert!(rho.matrix().max_abs_diff(init.matrix()) < 1e-12);
        }
    }

    #[test]
    fn thermal_stream_approaches_target() {
        let p = physics(20, 1.0);
        let target = thermal_state(&p.space.system_hamiltonian(1.0), 1.0).unwrap();
        let init = fock_state(&p.space, 0).unwrap();
        let curve =
            baseline_curve(&BaselineStream::HomogeneousThermal { beta_a: 1.0 }, &p, &init, &target, 400, 0.1).unwrap();
        // relaxation rate ~ g^2 t_c tanh(beta/2) ~ 0.046 per unit time
        assert!(curve[200] > 0.08 && curve[200] < 0.15);
        assert!(*curve.last().unwrap() < 0.05);
        // non-increasing over the first 50 collisions
        for w in curve[..51].windows(2) {
            assert!(w[1] <= w[0] + 1e-6);
        }
    }

    #[test]
    fn chi_grid_shapes() {
        assert!(chi_grid(5.0, 1.0, 0).is_empty());
        assert_eq!(chi_grid(5.0, 1.0, 1), vec![0.0]);
        let g = chi_grid(5.0, 1.0, 129);
        assert_eq!(g.len(), 129);
        assert_abs_diff_eq!(g[64], 0.0, epsilon = 1e-17);
        assert_abs_diff_eq!(g[128], chi_max(5.0, 1.0), epsilon = 1e-17);
    }

    fn problem(alpha: f64, total_time: f64, t_c: f64) -> ChiSweepProblem {
        let p = physics(12, 1.0);
        ChiSweepProblem {
            physics: p,
            beta: 5.0,
            initial: fock_state(&p.space, 0).unwrap(),
            target: coherent_state(&p.space, Complex64::new(alpha, 0.0)).unwrap(),
            total_time,
            t_c,
        }
    }

    #[test]
    fn sweep_edge_cases() {
        let pr = problem(0.5, 1.0, 0.05);
        assert!(sweep_chi(&pr, &[]).is_err());
        let single = sweep_chi(&pr, &[0.01]).unwrap();
        assert_eq!(single.chi_bar, 0.01);
        assert_eq!(single.best_distance, pr.distance(0.01).unwrap());
        assert!(sweep_chi(&pr, &[0.2]).is_err());
    }

    #[test]
    fn sweep_for_vacuum_target_is_symmetric() {
        let pr = problem(0.0, 1.0, 0.05);
        let s = sweep_chi(&pr, &chi_grid(5.0, 1.0, 17)).unwrap();
        assert_abs_diff_eq!(s.chi_bar, 0.0, epsilon = 1e-6);
        for k in 0..8 {
            assert_abs_diff_eq!(s.curve[k].1, s.curve[16 - k].1, epsilon = 1e-10);
        }
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section(-1.0, 2.0, 60, &|x: f64| Ok((x - 0.3).powi(2))).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-8);
        assert!(fx < 1e-15);
    }
}
