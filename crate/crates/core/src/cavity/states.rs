use num_complex::Complex64;

use super::FockSpace;
use crate::error::{Error, Result};
use crate::opalg::{hermitian_eig, propagator, ComplexMatrix, DensityMatrix, I};

/// Maximum population allowed in the top two Fock levels of a prepared state.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;

/// Largest truncation tried when reporting the levels a state needs.
const MAX_LEVELS_PROBE: usize = 2000;

/// Gibbs state `exp(-beta h) / Z`. Negative `beta` gives a population
/// inversion.
pub fn thermal_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::NonFinite { name: "beta", value: beta });
    }
    let eig = hermitian_eig(h)?;
    // shift by the energy with the largest weight so that no exponent is positive
    let reference = if beta >= 0.0 { eig.values[0] } else { *eig.values.last().expect("nonempty") };
    let weights: Vec<f64> = eig.values.iter().map(|&w| (-beta * (w - reference)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let n = h.rows();
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        let p = w / z;
        if p == 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = eig.vectors[(i, k)];
            if vi.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(i, j)] += vi * eig.vectors[(j, k)].conj() * p;
            }
        }
    }
    Ok(DensityMatrix::new_unchecked(m))
}

/// Fock projector |k><k|.
pub fn fock_state(space: &FockSpace, k: usize) -> Result<DensityMatrix> {
    DensityMatrix::basis(space.n_levels(), k)
}

fn vacuum_vector(n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

fn leakage(psi: &[Complex64]) -> f64 {
    psi.iter().rev().take(2).map(|z| z.norm_sqr()).sum()
}

/// `exp(G)|0>` for an anti-Hermitian generator built on the truncated space,
/// evaluated as the propagator of the Hermitian `iG` at unit time.
fn unitary_on_vacuum(space: &FockSpace, generator: impl Fn(&FockSpace) -> ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = space.n_levels();
    let hermitian = generator(space).scale(I);
    let u = propagator(&hermitian, 1.0)?;
    u.mul_vec(&vacuum_vector(n))
}

fn prepared_state(space: &FockSpace, generator: impl Fn(&FockSpace) -> ComplexMatrix + Copy) -> Result<DensityMatrix> {
    let psi = unitary_on_vacuum(space, generator)?;
    let leak = leakage(&psi);
    if leak > LEAKAGE_THRESHOLD {
        let mut required = space.n_levels() + 1;
        while required < MAX_LEVELS_PROBE {
            let probe = FockSpace::new(required)?;
            if leakage(&unitary_on_vacuum(&probe, generator)?) <= LEAKAGE_THRESHOLD {
                break;
            }
            required += (required / 8).max(1);
        }
        return Err(Error::Truncation { leakage: leak, required_levels: required });
    }
    DensityMatrix::pure(&psi)
}

/// Coherent state `D(alpha)|0>`, `D(alpha) = exp(alpha a† - alpha* a)`.
pub fn coherent_state(space: &FockSpace, alpha: Complex64) -> Result<DensityMatrix> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::NonFinite { name: "alpha", value: alpha.norm() });
    }
    prepared_state(space, move |s: &FockSpace| {
        let a = s.annihilation();
        &s.creation().scale(alpha) - &a.scale(alpha.conj())
    })
}

/// Squeezed vacuum `S(zeta)|0>`, `S(zeta) = exp[(zeta* a^2 - zeta a†^2)/2]`.
pub fn squeezed_vacuum(space: &FockSpace, zeta: Complex64) -> Result<DensityMatrix> {
    if !zeta.re.is_finite() || !zeta.im.is_finite() {
        return Err(Error::NonFinite { name: "zeta", value: zeta.norm() });
    }
    prepared_state(space, move |s: &FockSpace| {
        let a = s.annihilation();
        let ad = s.creation();
        (&(&a * &a).scale(zeta.conj()) - &(&ad * &ad).scale(zeta)).scale_real(0.5)
    })
}
