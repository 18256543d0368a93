//! Sparse Kraus-form collision kernel.
//!
//! With the joint propagator split into ancilla blocks
//! `B_ab[i][j] = U[(i,a),(j,b)]` and the ancilla state diagonalized as
//! `rho_A = sum_k p_k |v_k><v_k|`, one collision is
//!
//! ```text
//! rho_S' = sum_{a,k} K_ak rho_S K_ak^†,   K_ak = sqrt(p_k) sum_b v_k[b] B_ab
//! ```
//!
//! Each `K_ak` is applied through its nonzero pattern only, so the cost of a
//! collision scales with the number of nonzeros of the propagator blocks.
//! Matrices are kept in split real/imaginary storage in the inner loops.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::opalg::{hermitian_eig, ComplexMatrix, DensityMatrix};

/// Kraus weights below this are dropped.
const WEIGHT_FLOOR: f64 = 1e-300;

/// Output entries below this are set to zero. Long trajectories otherwise
/// drive vanishing coherences into subnormal range, where arithmetic is
/// many times slower.
const FLUSH_BELOW: f64 = 1e-150;

/// Precomputed propagator for repeated collisions with a fixed joint unitary.
#[derive(Clone, Debug)]
pub struct CollisionMap {
    dim_s: usize,
    dim_a: usize,
    /// `blocks[a * dim_a + b]` in split storage, row-major dim_s x dim_s.
    blocks_re: Vec<Vec<f64>>,
    blocks_im: Vec<Vec<f64>>,
    /// `patterns[a][mask]`: per row, the union of nonzero columns of `B_ab`
    /// over the ancilla indices `b` set in `mask`.
    patterns: Vec<Vec<Vec<Vec<u32>>>>,
}

impl CollisionMap {
    pub fn new(u: &ComplexMatrix, dim_s: usize, dim_a: usize) -> Result<Self> {
        let d = dim_s * dim_a;
        if u.rows() != d || u.cols() != d {
            return Err(Error::Dimension(format!(
                "propagator is {}x{}, expected {d}x{d} for {dim_s} x {dim_a}",
                u.rows(),
                u.cols()
            )));
        }
        if dim_a > 8 {
            return Err(Error::Dimension(format!("ancilla dimension {dim_a} too large")));
        }
        let mut blocks_re = Vec::with_capacity(dim_a * dim_a);
        let mut blocks_im = Vec::with_capacity(dim_a * dim_a);
        for a in 0..dim_a {
            for b in 0..dim_a {
                let mut re = vec![0.0; dim_s * dim_s];
                let mut im = vec![0.0; dim_s * dim_s];
                for i in 0..dim_s {
                    for j in 0..dim_s {
                        let z = u[(i * dim_a + a, j * dim_a + b)];
                        re[i * dim_s + j] = z.re;
                        im[i * dim_s + j] = z.im;
                    }
                }
                blocks_re.push(re);
                blocks_im.push(im);
            }
        }
        let masks = 1usize << dim_a;
        let mut patterns = Vec::with_capacity(dim_a);
        for a in 0..dim_a {
            let mut per_mask = Vec::with_capacity(masks);
            for mask in 0..masks {
                let rows = (0..dim_s)
                    .map(|i| {
                        (0..dim_s as u32)
                            .filter(|&j| {
                                (0..dim_a).any(|b| {
                                    let idx = i * dim_s + j as usize;
                                    mask & (1 << b) != 0
                                        && (blocks_re[a * dim_a + b][idx] != 0.0
                                            || blocks_im[a * dim_a + b][idx] != 0.0)
                                })
                            })
                            .collect()
                    })
                    .collect();
                per_mask.push(rows);
            }
            patterns.push(per_mask);
        }
        Ok(Self { dim_s, dim_a, blocks_re, blocks_im, patterns })
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    /// Fraction of nonzero entries over all propagator blocks.
    pub fn density(&self) -> f64 {
        let nnz: usize =
            (0..self.dim_a).map(|a| self.patterns[a][(1 << self.dim_a) - 1].iter().map(Vec::len).sum::<usize>()).sum();
        nnz as f64 / (self.dim_a * self.dim_s * self.dim_s) as f64
    }

    /// One collision: `tr_A[U (rho_s ⊗ rho_a) U†]`.
    pub fn apply(&self, rho_s: &DensityMatrix, rho_a: &DensityMatrix) -> Result<DensityMatrix> {
        let (ds, da) = (self.dim_s, self.dim_a);
        if rho_s.dim() != ds || rho_a.dim() != da {
            return Err(Error::Dimension(format!(
                "collision map is {ds} x {da}, states are {} and {}",
                rho_s.dim(),
                rho_a.dim()
            )));
        }
        let spectrum = ancilla_spectrum(rho_a)?;
        let n = ds * ds;
        let (mut rho_re, mut rho_im) = (vec![0.0; n], vec![0.0; n]);
        for (k, z) in rho_s.matrix().as_slice().iter().enumerate() {
            rho_re[k] = z.re;
            rho_im[k] = z.im;
        }
        let (mut out_re, mut out_im) = (vec![0.0; n], vec![0.0; n]);
        let (mut w_re, mut w_im) = (vec![0.0; n], vec![0.0; n]);
        let (mut x_re, mut x_im) = (vec![0.0; n], vec![0.0; n]);
        let mut k_re: Vec<f64> = Vec::new();
        let mut k_im: Vec<f64> = Vec::new();

        for (p, vector) in spectrum {
            if !(p > WEIGHT_FLOOR) {
                continue;
            }
            let amp = p.sqrt();
            let v: Vec<Complex64> = vector.iter().map(|z| z * amp).collect();
            let mask = v
                .iter()
                .enumerate()
                .fold(0usize, |m, (b, z)| if *z != Complex64::new(0.0, 0.0) { m | (1 << b) } else { m });
            for a in 0..da {
                let pattern = &self.patterns[a][mask];
                // Kraus entries on the pattern, row by row
                k_re.clear();
                k_im.clear();
                for (i, cols) in pattern.iter().enumerate() {
                    for &j in cols {
                        let idx = i * ds + j as usize;
                        let (mut sr, mut si) = (0.0, 0.0);
                        for (b, vb) in v.iter().enumerate() {
                            if mask & (1 << b) == 0 {
                                continue;
                            }
                            let br = self.blocks_re[a * da + b][idx];
                            let bi = self.blocks_im[a * da + b][idx];
                            sr += vb.re * br - vb.im * bi;
                            si += vb.re * bi + vb.im * br;
                        }
                        k_re.push(sr);
                        k_im.push(si);
                    }
                }
                // W = K rho
                w_re.fill(0.0);
                w_im.fill(0.0);
                sparse_times_dense(pattern, &k_re, &k_im, &rho_re, &rho_im, &mut w_re, &mut w_im, ds, false);
                // X = W† = rho K†
                for i in 0..ds {
                    for j in 0..ds {
                        x_re[j * ds + i] = w_re[i * ds + j];
                        x_im[j * ds + i] = -w_im[i * ds + j];
                    }
                }
                // upper triangle of out += K X; the result is Hermitian
                sparse_times_dense(pattern, &k_re, &k_im, &x_re, &x_im, &mut out_re, &mut out_im, ds, true);
            }
        }
        for x in out_re.iter_mut().chain(out_im.iter_mut()) {
            if x.abs() < FLUSH_BELOW {
                *x = 0.0;
            }
        }
        for i in 0..ds {
            out_im[i * ds + i] = 0.0;
            for c in 0..i {
                out_re[i * ds + c] = out_re[c * ds + i];
                out_im[i * ds + c] = -out_im[c * ds + i];
            }
        }
        let data = out_re.into_iter().zip(out_im).map(|(re, im)| Complex64::new(re, im)).collect();
        Ok(DensityMatrix::new_unchecked(ComplexMatrix::from_vec(ds, ds, data)?))
    }
}

/// Eigenpairs of the ancilla state; closed form for qubits so that diagonal
/// states give exact basis vectors.
fn ancilla_spectrum(rho_a: &DensityMatrix) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let m = rho_a.matrix();
    if rho_a.dim() == 2 {
        let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if b == zero {
            return Ok(vec![(a, vec![one, zero]), (d, vec![zero, one])]);
        }
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return Ok([mid + rad, mid - rad]
            .into_iter()
            .map(|w| {
                let (x, y) = (b, Complex64::new(w - a, 0.0));
                let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
                (w, vec![x / norm, y / norm])
            })
            .collect());
    }
    let eig = hermitian_eig(m)?;
    Ok(eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &w)| (w, (0..rho_a.dim()).map(|b| eig.vectors[(b, k)]).collect()))
        .collect())
}

/// `out (+)= K M` with `K` sparse on `pattern`. When accumulating, only the
/// upper triangle (columns >= row) is written.
#[allow(clippy::too_many_arguments)]
#[inline]
fn sparse_times_dense(
    pattern: &[Vec<u32>],
    k_re: &[f64],
    k_im: &[f64],
    m_re: &[f64],
    m_im: &[f64],
    out_re: &mut [f64],
    out_im: &mut [f64],
    ds: usize,
    upper_only: bool,
) {
    let mut pos = 0;
    for (i, cols) in pattern.iter().enumerate() {
        let start = if upper_only { i } else { 0 };
        let or = &mut out_re[i * ds + start..(i + 1) * ds];
        let oi = &mut out_im[i * ds + start..(i + 1) * ds];
        for &j in cols {
            let (a, b) = (k_re[pos], k_im[pos]);
            pos += 1;
            let j = j as usize;
            let mr = &m_re[j * ds + start..(j + 1) * ds];
            let mi = &m_im[j * ds + start..(j + 1) * ds];
            for ((o_r, o_i), (&x_r, &x_i)) in or.iter_mut().zip(oi.iter_mut()).zip(mr.iter().zip(mi)) {
                *o_r += a * x_r - b * x_i;
                *o_i += a * x_i + b * x_r;
            }
        }
    }
}
