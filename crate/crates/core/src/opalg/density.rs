use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use super::spectral::hermitian_eigenvalues;
use crate::error::{Error, Result};

/// Tolerance for the Hermiticity, trace and positivity checks on states.
pub const STATE_TOL: f64 = 1e-10;

/// A trace-one, positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation. For outputs of trace- and positivity-preserving maps.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidState(format!("shape {}x{}", m.rows(), m.cols())));
        }
        let herm = m.hermiticity_error();
        if !(herm <= STATE_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = m.trace();
        if !((tr.re - 1.0).abs() <= STATE_TOL && tr.im.abs() <= STATE_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues()?[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self { matrix: ComplexMatrix::outer(&unit, &unit) })
    }

    /// |k><k| in a space of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Dimension(format!("basis index {k} outside dimension {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    /// Diagonal state from (unnormalized, nonnegative) populations.
    pub fn from_populations(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0)) || !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidState("populations must be nonnegative with positive sum".into()));
        }
        let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(Self { matrix: ComplexMatrix::from_diag(&p) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// tr(rho * op)
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<Complex64> {
        let n = self.dim();
        if op.rows() != n || op.cols() != n {
            return Err(Error::Dimension(format!("operator {}x{} on a state of dimension {n}", op.rows(), op.cols())));
        }
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        Ok(acc)
    }

    /// U rho U†
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self { matrix: m })
    }
}

/// Kronecker product with the system as the slow factor and the ancilla as
/// the fast one.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Traces out the ancilla (fast index) of a joint system-ancilla state.
pub fn partial_trace_ancilla(joint: &DensityMatrix, dim_s: usize, dim_a: usize) -> Result<DensityMatrix> {
    if joint.dim() != dim_s * dim_a {
        return Err(Error::Dimension(format!("joint dimension {} is not {dim_s} x {dim_a}", joint.dim())));
    }
    let m = joint.matrix();
    let out = ComplexMatrix::from_fn(dim_s, dim_s, |i, j| (0..dim_a).map(|k| m[(i * dim_a + k, j * dim_a + k)]).sum());
    Ok(DensityMatrix::new_unchecked(out))
}

/// (1/2) sum |eig(a - b)|
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("states of dimension {} and {}", a.dim(), b.dim())));
    }
    let diff = a.matrix().checked_sub(b.matrix())?;
    let eig = hermitian_eigenvalues(&diff)?;
    Ok((0.5 * eig.iter().map(|w| w.abs()).sum::<f64>()).min(1.0))
}

/// -sum w log w over the spectrum (natural log, 0 log 0 = 0).
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eigenvalues()?;
    if eig[0] < -STATE_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {:.3e}", eig[0])));
    }
    Ok(eig.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum::<f64>().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::pauli;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validation_rejects_bad_states() {
        assert!(DensityMatrix::new(ComplexMatrix::from_diag(&[0.6, 0.6])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_diag(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::new(pauli::sigma_y()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_diag(&[0.3, 0.7])).is_ok());
    }

    #[test]
    fn partial_trace_of_product() {
        let rs = DensityMatrix::from_populations(&[0.2, 0.5, 0.3]).unwrap();
        let ra = DensityMatrix::pure(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let joint = DensityMatrix::new_unchecked(tensor(rs.matrix(), ra.matrix()));
        let back = partial_trace_ancilla(&joint, 3, 2).unwrap();
        assert!(back.matrix().max_abs_diff(rs.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(&[Complex64::new(s, 0.0), ZERO, ZERO, Complex64::new(s, 0.0)]).unwrap();
        let reduced = partial_trace_ancilla(&bell, 2, 2).unwrap();
        assert!(reduced.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(6);
        assert!(partial_trace_ancilla(&rho, 4, 2).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let a = DensityMatrix::from_populations(&[0.7, 0.3]).unwrap();
        let b = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 0.2, epsilon = 1e-15);
        let e0 = DensityMatrix::basis(2, 0).unwrap();
        let e1 = DensityMatrix::basis(2, 1).unwrap();
        assert_abs_diff_eq!(trace_distance(&e0, &e1).unwrap(), 1.0);
        assert!(trace_distance(&a, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn entropy_examples() {
        let plus = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&plus).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            von_neumann_entropy(&DensityMatrix::maximally_mixed(2)).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        let d = DensityMatrix::from_populations(&[0.9, 0.1]).unwrap();
        let expected = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert_abs_diff_eq!(von_neumann_entropy(&d).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.3251, epsilon = 1e-4);
    }

    #[test]
    fn tensor_index_arithmetic() {
        // sigma_x on the slow factor moves basis index 0 to index 2
        let op = tensor(&pauli::sigma_x(), &ComplexMatrix::identity(2));
        let mut e0 = vec![ZERO; 4];
        e0[0] = Complex64::new(1.0, 0.0);
        let out = op.mul_vec(&e0).unwrap();
        assert_eq!(out[2], Complex64::new(1.0, 0.0));
        assert_eq!(out.iter().filter(|z| **z != ZERO).count(), 1);
    }
}
