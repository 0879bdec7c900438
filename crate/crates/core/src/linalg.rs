//! Dense linear-algebra helpers shared by every module.
//!
//! Everything here works on `nalgebra` dynamic matrices. Rank decisions
//! always take an explicit absolute threshold so callers control how
//! noisy data is treated.

use nalgebra::{Complex, DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CMat = DMatrix<Complex<f64>>;

/// Relative factor of the default numeric-rank threshold
/// `sigma_max * max(rows, cols) * RANK_EPS`.
pub const RANK_EPS: f64 = 1e-12;

pub fn hcat(blocks: &[&Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        if b.ncols() == 0 {
            continue;
        }
        assert_eq!(b.nrows(), rows, "hcat: row mismatch");
        out.view_mut((0, c0), (rows, b.ncols())).copy_from(*b);
        c0 += b.ncols();
    }
    out
}

pub fn vcat(blocks: &[&Mat]) -> Mat {
    let cols = blocks.iter().map(|b| b.ncols()).max().unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        if b.nrows() == 0 {
            continue;
        }
        assert_eq!(b.ncols(), cols, "vcat: column mismatch");
        out.view_mut((r0, 0), (b.nrows(), cols)).copy_from(*b);
        r0 += b.nrows();
    }
    out
}

pub fn vcat_vec(parts: &[&Vector]) -> Vector {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(n);
    let mut i = 0;
    for p in parts {
        out.rows_mut(i, p.len()).copy_from(*p);
        i += p.len();
    }
    out
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        if b.nrows() > 0 && b.ncols() > 0 {
            out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(*b);
        }
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// `I_k ⊗ w`, the block-diagonal repetition of a square weight.
pub fn repeat_diag(w: &Mat, k: usize) -> Mat {
    kron(&Mat::identity(k, k), w)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest absolute row sum.
pub fn norm_inf(m: &Mat) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm (largest singular value); zero for empty matrices.
pub fn norm2(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular value decomposition `M = U diag(s) V^T` with `s` non-increasing.
///
/// Computed with `faer`: the `nalgebra` bidiagonal SVD can return factors
/// that do not reproduce nearly rank-deficient inputs.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

fn faer_svd(m: &Mat, thin: bool) -> Svd {
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let res = if thin { f.thin_svd() } else { f.svd() };
    match res {
        Ok(d) => {
            let (u, v) = (d.U(), d.V());
            Svd {
                u: Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
                s: d.S().column_vector().iter().copied().collect(),
                v: Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
            }
        }
        Err(_) => {
            log::warn!("faer SVD did not converge; falling back to nalgebra");
            let d = m.clone().svd(true, true);
            Svd {
                u: d.u.expect("u requested"),
                s: d.singular_values.iter().copied().collect(),
                v: d.v_t.expect("v requested").transpose(),
            }
        }
    }
}

/// Thin SVD: `U` is `r x k`, `V` is `c x k` with `k = min(r, c)`.
pub fn svd_thin(m: &Mat) -> Svd {
    faer_svd(m, true)
}

/// Full SVD: `U` is `r x r`, `V` is `c x c`.
pub fn svd_full(m: &Mat) -> Svd {
    faer_svd(m, false)
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    f.singular_values().unwrap_or_else(|_| m.clone().svd(false, false).singular_values.iter().copied().collect())
}

pub fn default_rank_threshold(m: &Mat) -> f64 {
    let smax = norm2(m);
    smax * m.nrows().max(m.ncols()) as f64 * RANK_EPS
}

pub fn rank(m: &Mat, threshold: f64) -> usize {
    singular_values(m).iter().filter(|s| **s > threshold).count()
}

/// Orthonormal basis of the column space (singular values above `threshold`).
pub fn orth(m: &Mat, threshold: f64) -> Mat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Mat::zeros(m.nrows(), 0);
    }
    let svd = svd_thin(m);
    let r = svd.s.iter().filter(|s| **s > threshold).count();
    svd.u.columns(0, r).into_owned()
}

/// Orthonormal basis of the right null space: columns of `V` whose singular
/// values are at most `threshold`, including the structurally zero ones when
/// the matrix is wide.
pub fn null_space(m: &Mat, threshold: f64) -> Mat {
    let (r, c) = m.shape();
    if c == 0 {
        return Mat::zeros(0, 0);
    }
    if r == 0 {
        return Mat::identity(c, c);
    }
    let svd = svd_full(m);
    let rk = svd.s.iter().filter(|s| **s > threshold).count();
    svd.v.columns(rk, c - rk).into_owned()
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `R^n`.
pub fn complement(basis: &Mat, n: usize, threshold: f64) -> Mat {
    if basis.ncols() == 0 {
        return Mat::identity(n, n);
    }
    null_space(&basis.transpose(), threshold)
}

/// Moore-Penrose pseudo-inverse with an absolute singular-value cutoff.
pub fn pinv(m: &Mat, threshold: f64) -> Mat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Mat::zeros(c, r);
    }
    let svd = svd_thin(m);
    let mut out = Mat::zeros(c, r);
    for (i, s) in svd.s.iter().enumerate() {
        if *s > threshold {
            out += svd.v.column(i) * svd.u.column(i).transpose() / *s;
        }
    }
    out
}

pub fn pinv_default(m: &Mat) -> Mat {
    pinv(m, default_rank_threshold(m))
}

pub fn spectral_radius(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn mat_pow(m: &Mat, k: usize) -> Mat {
    let mut out = Mat::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Factor `W = F F^T` of a symmetric positive-semidefinite matrix from its
/// eigenpairs above `rel * lambda_max`. Returns an `n x r` factor.
pub fn psd_factor(w: &Mat, rel: f64) -> Mat {
    let n = w.nrows();
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let eig = symmetrize(w).symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return Mat::zeros(n, 0);
    }
    let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > rel * lmax).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut f = Mat::zeros(n, idx.len());
    for (j, &i) in idx.iter().enumerate() {
        f.set_column(j, &(eig.eigenvectors.column(i) * eig.eigenvalues[i].sqrt()));
    }
    f
}

pub fn min_eigenvalue_sym(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|v| Complex::new(v, 0.0))
}

/// Singular values of a complex matrix, non-increasing.
pub fn complex_singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let f = faer::Mat::<faer::c64>::from_fn(m.nrows(), m.ncols(), |i, j| faer::c64::new(m[(i, j)].re, m[(i, j)].im));
    f.singular_values().unwrap_or_else(|_| m.clone().svd(false, false).singular_values.iter().copied().collect())
}

/// Stacks the columns `start..start+len` of a `d x T` signal into one vector.
pub fn stack_window(signal: &Mat, start: usize, len: usize) -> Vector {
    let d = signal.nrows();
    let mut out = Vector::zeros(d * len);
    for j in 0..len {
        out.rows_mut(j * d, d).copy_from(&signal.column(start + j));
    }
    out
}

/// Inverse of [`stack_window`]: reshapes a stacked vector into `d x len`.
pub fn unstack(v: &Vector, d: usize) -> Mat {
    let len = v.len().checked_div(d).unwrap_or(0);
    Mat::from_column_slice(d, len, v.as_slice())
}
