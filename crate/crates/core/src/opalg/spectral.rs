//! Hermitian spectral decomposition and the functions built on it.
//!
//! Every matrix function in the crate goes through an eigendecomposition of a
//! Hermitian matrix. Before decomposing, the sparsity graph of the input is
//! split into connected components; each component is decomposed on its own
//! and the result is scattered back. For excitation-conserving Hamiltonians
//! this reduces a 40x40 problem to a handful of 2x2 ones and leaves exact
//! zeros in the propagator, which the collision kernel exploits.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Hermiticity tolerance on inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: ComplexMatrix,
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Other("matrix has non-finite entries".into()));
    }
    let deviation = m.hermiticity_error();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    let n = m.rows();
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

fn dense_eig(m: &ComplexMatrix) -> Result<Eigen> {
    let n = m.rows();
    if n == 1 {
        return Ok(Eigen { values: vec![m[(0, 0)].re], vectors: ComplexMatrix::identity(1) });
    }
    let eig = to_nalgebra(m).try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::NoConvergence { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

fn dense_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = m.rows();
    if n == 1 {
        return Ok(vec![m[(0, 0)].re]);
    }
    if n == 2 {
        // closed form avoids the iterative solver in the qubit hot path
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)].norm();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        return Ok(vec![mid - rad, mid + rad]);
    }
    let tri = nalgebra::linalg::SymmetricTridiagonal::new(to_nalgebra(m));
    let (diag, off) = tri.unpack_tridiagonal();
    let real_tri = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let values = real_tri.try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::NoConvergence { dim: n })?.eigenvalues;
    let mut v: Vec<f64> = values.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Connected components of the nonzero pattern of a square matrix, each
/// sorted ascending, ordered by smallest member.
pub fn connected_blocks(m: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)] != ZERO || m[(j, i)] != ZERO {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                    parent[hi] = lo;
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[root]].push(i);
    }
    blocks
}

/// Eigendecomposition `m = V diag(w) V†` of a Hermitian matrix, eigenvalues
/// ascending.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Eigen> {
    check_hermitian(m)?;
    let sym = m.hermitian_part();
    let n = sym.rows();
    let blocks = connected_blocks(&sym);
    if blocks.len() == 1 {
        return dense_eig(&sym);
    }
    let mut pairs: Vec<(f64, Vec<(usize, Complex64)>)> = Vec::with_capacity(n);
    for block in &blocks {
        let eig = dense_eig(&sym.submatrix(block))?;
        for (k, &w) in eig.values.iter().enumerate() {
            let column = block.iter().enumerate().map(|(r, &row)| (row, eig.vectors[(r, k)])).collect();
            pairs.push((w, column));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, (w, entries)) in pairs.into_iter().enumerate() {
        values.push(w);
        for (row, z) in entries {
            vectors[(row, col)] = z;
        }
    }
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let sym = m.hermitian_part();
    let blocks = connected_blocks(&sym);
    if blocks.len() == 1 {
        return dense_eigenvalues(&sym);
    }
    let mut values = Vec::with_capacity(sym.rows());
    for block in &blocks {
        values.extend(dense_eigenvalues(&sym.submatrix(block))?);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `f(m) = V diag(f(w)) V†` for Hermitian `m`, computed blockwise so that
/// entries outside the connected components of `m` stay exactly zero.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    check_hermitian(m)?;
    let sym = m.hermitian_part();
    let n = sym.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for block in connected_blocks(&sym) {
        if block.len() == 1 {
            let k = block[0];
            out[(k, k)] = f(sym[(k, k)].re);
            continue;
        }
        let eig = dense_eig(&sym.submatrix(&block))?;
        let fw: Vec<Complex64> = eig.values.iter().map(|&w| f(w)).collect();
        let d = block.len();
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for (k, &w) in fw.iter().enumerate().take(d) {
                    acc += eig.vectors[(i, k)] * w * eig.vectors[(j, k)].conj();
                }
                out[(block[i], block[j])] = acc;
            }
        }
    }
    Ok(out)
}

/// Time-evolution operator `exp(-i h t)` (hbar = 1).
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFinite { name: "t", value: t });
    }
    hermitian_function(h, |w| Complex64::from_polar(1.0, -w * t))
}
