//! Operator algebra: dense complex matrices, Hermitian spectral functions,
//! tensor products, partial traces and state functionals.

mod density;
mod matrix;
mod spectral;

pub use density::{partial_trace_ancilla, tensor, trace_distance, von_neumann_entropy, DensityMatrix, STATE_TOL};
pub use matrix::{ComplexMatrix, I, ONE, ZERO};
pub use spectral::{
    connected_blocks, hermitian_eig, hermitian_eigenvalues, hermitian_function, propagator, Eigen, HERMITIAN_TOL,
};

pub use num_complex::Complex64;

/// Pauli matrices in the basis (|e>, |g>): sigma_z |e> = +|e>.
pub mod pauli {
    use super::{Complex64, ComplexMatrix, I, ONE, ZERO};

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_diag(&[1.0, -1.0])
    }

    /// |e><g|
    pub fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ZERO, ZERO]])
    }

    /// |g><e|
    pub fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, ZERO], &[ONE, ZERO]])
    }

    pub(crate) fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
}

/// The eight Gell-Mann matrices, `gell_mann(k)` for k in 1..=8.
pub fn gell_mann(k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(3, 3);
    match k {
        1 => {
            m[(0, 1)] = ONE;
            m[(1, 0)] = ONE;
        }
        2 => {
            m[(0, 1)] = -I;
            m[(1, 0)] = I;
        }
        3 => {
            m[(0, 0)] = ONE;
            m[(1, 1)] = -ONE;
        }
        4 => {
            m[(0, 2)] = ONE;
            m[(2, 0)] = ONE;
        }
        5 => {
            m[(0, 2)] = -I;
            m[(2, 0)] = I;
        }
        6 => {
            m[(1, 2)] = ONE;
            m[(2, 1)] = ONE;
        }
        7 => {
            m[(1, 2)] = -I;
            m[(2, 1)] = I;
        }
        8 => {
            let s = 1.0 / 3f64.sqrt();
            m[(0, 0)] = pauli::c(s, 0.0);
            m[(1, 1)] = pauli::c(s, 0.0);
            m[(2, 2)] = pauli::c(-2.0 * s, 0.0);
        }
        _ => panic!("Gell-Mann index {k} outside 1..=8"),
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gell_mann_are_traceless_hermitian_and_normalized() {
        for k in 1..=8 {
            let m = gell_mann(k);
            assert!(m.hermiticity_error() < 1e-15);
            assert!(m.trace().norm() < 1e-15);
            let sq = (&m * &m).trace().re;
            assert!((sq - 2.0).abs() < 1e-14, "tr(l{k}^2) = {sq}");
        }
    }

    #[test]
    fn pauli_ladder_relations() {
        use pauli::*;
        let sx = &sigma_plus() + &sigma_minus();
        assert_eq!(sx, sigma_x());
        let comm = sigma_plus().commutator(&sigma_minus()).unwrap();
        assert_eq!(comm, sigma_z());
    }
}
