//! Genome encoding: a vector of genes in [0, 1] holding `lambda_0` constant
//! (head) parameters followed by one block of `lambda_d` genes per collision.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{AncillaKind, CollisionScenario, Physics};
use crate::error::{Error, Result};
use crate::opalg::{ComplexMatrix, DensityMatrix};

/// Closed interval a gene is mapped onto.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn rescale(&self, x: f64) -> f64 {
        rescale(x, self.min, self.max)
    }

    /// Inverse of [`Bounds::rescale`]; degenerate bounds map to 0.
    pub fn normalize(&self, value: f64) -> f64 {
        if self.max == self.min {
            0.0
        } else {
            (value - self.min) / (self.max - self.min)
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(Error::Config(format!(
                "bounds for {name} must be finite with min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Affine map [0, 1] -> [x_min, x_max].
#[inline]
pub fn rescale(x: f64, x_min: f64, x_max: f64) -> f64 {
    x_min + (x_max - x_min) * x
}

/// Constant parameters that can be placed in the genome head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeadGene {
    #[serde(rename = "omega_a")]
    OmegaA,
    #[serde(rename = "g_l")]
    GL,
    #[serde(rename = "g_nl")]
    GNl,
    #[serde(rename = "g_l1")]
    GL1,
    #[serde(rename = "g_l2")]
    GL2,
    #[serde(rename = "omega_1")]
    Omega1,
    #[serde(rename = "delta_omega_12")]
    DeltaOmega12,
}

impl HeadGene {
    pub fn name(&self) -> &'static str {
        match self {
            Self::OmegaA => "omega_a",
            Self::GL => "g_l",
            Self::GNl => "g_nl",
            Self::GL1 => "g_l1",
            Self::GL2 => "g_l2",
            Self::Omega1 => "omega_1",
            Self::DeltaOmega12 => "delta_omega_12",
        }
    }

    fn applies_to(&self, variant: AncillaVariant) -> bool {
        match self {
            Self::OmegaA | Self::GL => variant != AncillaVariant::Qutrit,
            Self::GL1 | Self::GL2 | Self::Omega1 | Self::DeltaOmega12 => variant == AncillaVariant::Qutrit,
            Self::GNl => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub gene: HeadGene,
    pub bounds: Bounds,
}

/// How each collision block is parametrized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaVariant {
    /// Inverse temperature only.
    DiagonalQubit,
    /// Bloch vector (r, theta, phi).
    GenericQubit,
    /// Euler angles plus two spectrum angles.
    Qutrit,
}

impl AncillaVariant {
    pub fn lambda_d(&self) -> usize {
        match self {
            Self::DiagonalQubit => 1,
            Self::GenericQubit => 3,
            Self::Qutrit => 8,
        }
    }

    pub fn of(kind: &AncillaKind) -> Self {
        match kind {
            AncillaKind::DiagonalQubit { .. } => Self::DiagonalQubit,
            AncillaKind::GenericQubit { .. } => Self::GenericQubit,
            AncillaKind::Qutrit { .. } => Self::Qutrit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomeLayout {
    pub head: Vec<HeadSpec>,
    pub variant: AncillaVariant,
    /// Inverse-temperature range of diagonal qubits.
    pub beta_bounds: Bounds,
}

impl GenomeLayout {
    pub fn new(head: Vec<HeadSpec>, variant: AncillaVariant, beta_bounds: Bounds) -> Result<Self> {
        let layout = Self { head, variant, beta_bounds };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        self.beta_bounds.validate("beta_a")?;
        for (k, spec) in self.head.iter().enumerate() {
            spec.bounds.validate(spec.gene.name())?;
            if !spec.gene.applies_to(self.variant) {
                return Err(Error::Layout(format!(
                    "head gene {} does not apply to {:?} ancillae",
                    spec.gene.name(),
                    self.variant
                )));
            }
            if self.head[..k].iter().any(|s| s.gene == spec.gene) {
                return Err(Error::Layout(format!("head gene {} listed twice", spec.gene.name())));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn lambda0(&self) -> usize {
        self.head.len()
    }

    #[inline]
    pub fn lambda_d(&self) -> usize {
        self.variant.lambda_d()
    }

    /// Genome length for `n` collisions.
    pub fn length(&self, n: usize) -> usize {
        self.lambda0() + n * self.lambda_d()
    }

    /// Number of collisions encoded by a genome of length `len`.
    pub fn collisions(&self, len: usize) -> Result<usize> {
        let body = len
            .checked_sub(self.lambda0())
            .ok_or_else(|| Error::Layout(format!("length {len} shorter than the head")))?;
        if body == 0 || body % self.lambda_d() != 0 {
            return Err(Error::Layout(format!(
                "length {len} is not {} + n * {} with n >= 1",
                self.lambda0(),
                self.lambda_d()
            )));
        }
        Ok(body / self.lambda_d())
    }

    /// Checks length and gene range; returns the collision count.
    pub fn check(&self, genes: &[f64]) -> Result<usize> {
        let n = self.collisions(genes.len())?;
        if let Some(k) = genes.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Layout(format!("gene {k} = {} outside [0, 1]", genes[k])));
        }
        Ok(n)
    }

    pub fn head_value(&self, genes: &[f64], gene: HeadGene) -> Option<f64> {
        self.head.iter().position(|s| s.gene == gene).map(|k| self.head[k].bounds.rescale(genes[k]))
    }
}

/// A validated gene vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome {
    genes: Vec<f64>,
}

impl Genome {
    pub fn new(genes: Vec<f64>, layout: &GenomeLayout) -> Result<Self> {
        layout.check(&genes)?;
        Ok(Self { genes })
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub fn into_genes(self) -> Vec<f64> {
        self.genes
    }

    pub fn collisions(&self, layout: &GenomeLayout) -> usize {
        layout.collisions(self.genes.len()).expect("validated on construction")
    }
}

/// Collision timing of a scenario family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    /// Fixed collision time and count.
    Fixed { t_c: f64, n: usize },
    /// Fixed total time; the count comes from the genome and `t_c = T / n`.
    Variable { total_time: f64 },
}

impl Timing {
    pub fn collision_time(&self, n: usize) -> Result<f64> {
        match *self {
            Self::Fixed { t_c, n: expected } => {
                if n != expected {
                    return Err(Error::Layout(format!("genome encodes {n} collisions, layout fixes {expected}")));
                }
                Ok(t_c)
            }
            Self::Variable { total_time } => Ok(total_time / n as f64),
        }
    }
}

/// Everything of a scenario that the genome does not set.
#[derive(Clone, Debug)]
pub struct ScenarioTemplate {
    /// Default constants; head genes override them.
    pub physics: Physics,
    pub initial_state: DensityMatrix,
    pub timing: Timing,
}

/// Diagonal qubit with inverse temperature `rescale(gene)`.
pub fn decode_diagonal_qubit(gene: f64, beta_bounds: Bounds, omega_a: f64) -> DensityMatrix {
    let beta = beta_bounds.rescale(gene);
    // excited weight e^{-b w/2} / (e^{-b w/2} + e^{b w/2})
    let p_e = 0.5 * (1.0 - (0.5 * beta * omega_a).tanh());
    DensityMatrix::new_unchecked(ComplexMatrix::from_diag(&[p_e, 1.0 - p_e]))
}

/// Qubit from a Bloch vector, genes mapped to r in [0,1], theta in [0,pi],
/// phi in [0,2 pi].
pub fn decode_bloch_qubit(genes: &[f64]) -> DensityMatrix {
    let r = genes[0];
    let theta = PI * genes[1];
    let phi = 2.0 * PI * genes[2];
    bloch_state(r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos())
}

/// (I + b_x sigma_x + b_y sigma_y + b_z sigma_z) / 2
pub fn bloch_state(bx: f64, by: f64, bz: f64) -> DensityMatrix {
    let m = ComplexMatrix::from_rows(&[
        &[Complex64::new(0.5 * (1.0 + bz), 0.0), Complex64::new(0.5 * bx, -0.5 * by)],
        &[Complex64::new(0.5 * bx, 0.5 * by), Complex64::new(0.5 * (1.0 - bz), 0.0)],
    ]);
    DensityMatrix::new_unchecked(m)
}

/// Decoded qutrit parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QutritAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub eta: f64,
    pub delta: f64,
}

impl QutritAngles {
    /// Gene order (alpha, beta, gamma, theta, a, b, eta, delta).
    pub fn from_genes(genes: &[f64]) -> Self {
        Self {
            alpha: PI * genes[0],
            beta: FRAC_PI_2 * genes[1],
            gamma: PI * genes[2],
            theta: FRAC_PI_2 * genes[3],
            a: PI * genes[4],
            b: FRAC_PI_2 * genes[5],
            eta: FRAC_PI_2 * genes[6],
            delta: FRAC_PI_2 * genes[7],
        }
    }

    /// Diagonal of `rho_D`: (z^2 (1 - y^2), z^2 y^2, 1 - z^2).
    pub fn spectrum(&self) -> [f64; 3] {
        let z2 = self.eta.sin().powi(2);
        let y2 = self.delta.sin().powi(2);
        [z2 * (1.0 - y2), z2 * y2, 1.0 - z2]
    }

    /// `V = e^{i l3 alpha} e^{i l2 beta} e^{i l3 gamma} e^{i l5 theta} e^{i l3 a} e^{i l2 b}`
    pub fn unitary(&self) -> ComplexMatrix {
        let factors = [
            phase_l3(self.alpha),
            rotation(0, 1, self.beta),
            phase_l3(self.gamma),
            rotation(0, 2, self.theta),
            phase_l3(self.a),
            rotation(0, 1, self.b),
        ];
        factors.iter().skip(1).fold(factors[0].clone(), |acc, f| &acc * f)
    }
}

/// Spectrum angles (eta, delta) producing the populations `p` (summing to 1).
pub fn spectrum_angles(p: [f64; 3]) -> (f64, f64) {
    let z2 = (1.0 - p[2]).clamp(0.0, 1.0);
    let y2 = if z2 > 0.0 { (p[1] / z2).clamp(0.0, 1.0) } else { 0.0 };
    (z2.sqrt().asin(), y2.sqrt().asin())
}

/// e^{i l3 x} = diag(e^{ix}, e^{-ix}, 1)
fn phase_l3(x: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(3);
    m[(0, 0)] = Complex64::from_polar(1.0, x);
    m[(1, 1)] = Complex64::from_polar(1.0, -x);
    m
}

/// e^{i l x} for l = -i|p><q| + i|q><p| (l2 for (0,1), l5 for (0,2)).
fn rotation(p: usize, q: usize, x: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(3);
    let (s, c) = x.sin_cos();
    m[(p, p)] = Complex64::new(c, 0.0);
    m[(q, q)] = Complex64::new(c, 0.0);
    m[(p, q)] = Complex64::new(s, 0.0);
    m[(q, p)] = Complex64::new(-s, 0.0);
    m
}

/// Qutrit `V rho_D V†` from eight genes.
pub fn decode_euler_qutrit(genes: &[f64]) -> DensityMatrix {
    let angles = QutritAngles::from_genes(genes);
    let v = angles.unitary();
    let rho_d = ComplexMatrix::from_diag(&angles.spectrum());
    let m = &(&v * &rho_d) * &v.adjoint();
    // exact Hermitian symmetrization of the rounding in the product
    DensityMatrix::new_unchecked(m.hermitian_part())
}

/// Constants with the head genes applied.
pub fn decode_physics(genes: &[f64], layout: &GenomeLayout, template: &Physics) -> Result<Physics> {
    if AncillaVariant::of(&template.ancilla) != layout.variant {
        return Err(Error::Layout(format!(
            "layout encodes {:?} ancillae, template has {:?}",
            layout.variant, template.ancilla
        )));
    }
    if genes.len() < layout.lambda0() {
        return Err(Error::Layout(format!("length {} shorter than the head", genes.len())));
    }
    let mut physics = *template;
    for (spec, &x) in layout.head.iter().zip(genes) {
        let value = spec.bounds.rescale(x);
        let couplings = &mut physics.couplings;
        match (spec.gene, &mut physics.ancilla) {
            (HeadGene::OmegaA, AncillaKind::DiagonalQubit { omega_a } | AncillaKind::GenericQubit { omega_a }) => {
                *omega_a = value
            }
            (HeadGene::GL, _) => couplings.g_l = value,
            (HeadGene::GNl, _) => couplings.g_nl = value,
            (HeadGene::GL1, _) => couplings.g_l1 = value,
            (HeadGene::GL2, _) => couplings.g_l2 = value,
            (HeadGene::Omega1, AncillaKind::Qutrit { omega_1, omega_2 }) => {
                let gap = *omega_2 - *omega_1;
                *omega_1 = value;
                *omega_2 = value + gap;
            }
            (HeadGene::DeltaOmega12, AncillaKind::Qutrit { omega_1, omega_2 }) => *omega_2 = *omega_1 + value,
            (gene, kind) => {
                return Err(Error::Layout(format!("head gene {} does not apply to {kind:?}", gene.name())));
            }
        }
    }
    Ok(physics)
}

/// Per-collision ancilla states of the genome body.
pub fn decode_ancillae(genes: &[f64], layout: &GenomeLayout, physics: &Physics) -> Result<Vec<DensityMatrix>> {
    layout.check(genes)?;
    let body = &genes[layout.lambda0()..];
    let states = match (layout.variant, physics.ancilla) {
        (AncillaVariant::DiagonalQubit, AncillaKind::DiagonalQubit { omega_a }) => {
            body.iter().map(|&x| decode_diagonal_qubit(x, layout.beta_bounds, omega_a)).collect()
        }
        (AncillaVariant::GenericQubit, AncillaKind::GenericQubit { .. }) => {
            body.chunks(3).map(decode_bloch_qubit).collect()
        }
        (AncillaVariant::Qutrit, AncillaKind::Qutrit { .. }) => body.chunks(8).map(decode_euler_qutrit).collect(),
        (variant, kind) => {
            return Err(Error::Layout(format!("layout encodes {variant:?} ancillae, physics has {kind:?}")));
        }
    };
    Ok(states)
}

/// Full scenario for a genome.
pub fn decode(genes: &[f64], layout: &GenomeLayout, template: &ScenarioTemplate) -> Result<CollisionScenario> {
    let n = layout.check(genes)?;
    let physics = decode_physics(genes, layout, &template.physics)?;
    let t_c = template.timing.collision_time(n)?;
    let scenario = CollisionScenario {
        ancilla_states: decode_ancillae(genes, layout, &physics)?,
        physics,
        t_c,
        initial_state: template.initial_state.clone(),
    };
    scenario.validate()?;
    Ok(scenario)
}
