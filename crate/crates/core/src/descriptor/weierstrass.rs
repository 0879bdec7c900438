//! Regularity test and quasi-Weierstrass decomposition of `(E, A)`.
//!
//! The decomposition runs the two Wong sequences
//!
//! ```text
//! V_0 = R^n,  V_{i+1} = A^{-1}(E V_i)      (limit V*, dim n_s)
//! W_0 = {0},  W_{i+1} = E^{-1}(A W_i)      (limit W*, dim n_f)
//! ```
//!
//! and sets `T = [V*, W*]`, `P = [E V*, A W*]^{-1}`. Then
//! `P E T = diag(I, N)` and `P A T = diag(J, I)` with `N` nilpotent.

use nalgebra::Complex;
use rand::Rng;

use crate::descriptor::DescriptorSystem;
use crate::error::{Error, Result};
use crate::linalg::{complement, hcat, mat_pow, max_abs, norm2, null_space, orth, singular_values, to_complex, Mat};
use crate::rng::{stream_rng, Stream};

/// Default relative tolerance for rank decisions in the decomposition.
pub const DEFAULT_DECOMPOSITION_TOL: f64 = 1e-9;

/// Singular values within this factor of the threshold make a rank decision
/// ambiguous.
const AMBIGUITY_BAND: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct RegularityVerdict {
    pub regular: bool,
    /// Sample points and `|det(zE - A)|` at each.
    pub samples: Vec<(Complex<f64>, f64)>,
    pub threshold: f64,
}

/// Evaluates `det(zE - A)` at `n + 2` pseudo-random complex points.
///
/// A nonzero value at any point certifies regularity; a polynomial of degree
/// at most `n` vanishing at `n + 2` points is identically zero.
pub fn check_regularity(sys: &DescriptorSystem) -> Result<RegularityVerdict> {
    check_pencil_regularity(&sys.e, &sys.a)
}

pub fn check_pencil_regularity(e: &Mat, a: &Mat) -> Result<RegularityVerdict> {
    let n = e.nrows();
    if !e.is_square() || a.shape() != e.shape() {
        return Err(Error::Dimension(format!("pencil shapes {:?} and {:?}", e.shape(), a.shape())));
    }
    let mut rng = stream_rng(0x005e_ed0f_7e57, Stream::Probe);
    let (en, an) = (norm2(e), norm2(a));
    let mut samples = Vec::with_capacity(n + 2);
    let mut regular = n == 0;
    let mut threshold: f64 = 0.0;
    for _ in 0..n + 2 {
        let radius = rng.random_range(0.5..2.0);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let z = Complex::from_polar(radius, angle);
        let pencil = to_complex(e) * z - to_complex(a);
        let det = if n == 0 { 1.0 } else { pencil.determinant().norm() };
        let scale = (radius * en + an).powi(n as i32);
        let thr = 1e-12 * scale;
        threshold = threshold.max(thr);
        if det > thr {
            regular = true;
        }
        samples.push((z, det));
    }
    Ok(RegularityVerdict { regular, samples, threshold })
}

/// Degree of `det(zE - A)`, recovered by discrete Fourier interpolation at
/// `n + 1` points on the circle `|z| = radius`. Coefficients smaller than
/// `rel_tol` times the largest one are treated as zero.
///
/// For a regular pencil this equals the number of finite generalized
/// eigenvalues, i.e. the slow dimension.
pub fn determinant_degree(e: &Mat, a: &Mat, radius: f64, rel_tol: f64) -> usize {
    let n = e.nrows();
    if n == 0 {
        return 0;
    }
    let k = n + 1;
    let omega = |j: usize| Complex::from_polar(1.0, std::f64::consts::TAU * j as f64 / k as f64);
    let dets: Vec<Complex<f64>> = (0..k)
        .map(|j| (to_complex(e) * (omega(j) * radius) - to_complex(a)).determinant())
        .collect();
    // c_d * radius^d = (1/k) sum_j det(z_j) omega^{-jd}
    let scaled: Vec<f64> = (0..k)
        .map(|d| {
            let s: Complex<f64> = (0..k).map(|j| dets[j] * omega(j * d).conj()).sum();
            (s / k as f64).norm()
        })
        .collect();
    let top = scaled.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    (0..k).rev().find(|&d| scaled[d] > rel_tol * top).unwrap_or(0)
}

/// Transformation pair and blocks of the quasi-Weierstrass form.
#[derive(Debug, Clone)]
pub struct WeierstrassForm {
    pub p: Mat,
    pub t: Mat,
    pub j: Mat,
    pub n: Mat,
    pub b_s: Mat,
    pub b_f: Mat,
    pub c_s: Mat,
    pub c_f: Mat,
    /// `P Q P^T`.
    pub q_bar: Mat,
    pub n_s: usize,
    pub n_f: usize,
    /// Nilpotency index; `1` when the fast part is empty.
    pub s: usize,
}

/// The pencil-only part of the decomposition.
#[derive(Debug, Clone)]
pub struct PencilSplit {
    pub p: Mat,
    pub t: Mat,
    pub j: Mat,
    pub n: Mat,
    pub n_s: usize,
    pub n_f: usize,
    pub s: usize,
}

pub fn weierstrass_decompose(sys: &DescriptorSystem, tol: f64) -> Result<WeierstrassForm> {
    let split = decompose_pencil(&sys.e, &sys.a, tol)?;
    let pb = &split.p * &sys.b;
    let ct = &sys.c * &split.t;
    let (n_s, n_f) = (split.n_s, split.n_f);
    Ok(WeierstrassForm {
        b_s: pb.rows(0, n_s).into_owned(),
        b_f: pb.rows(n_s, n_f).into_owned(),
        c_s: ct.columns(0, n_s).into_owned(),
        c_f: ct.columns(n_s, n_f).into_owned(),
        q_bar: &split.p * &sys.q_noise * split.p.transpose(),
        p: split.p,
        t: split.t,
        j: split.j,
        n: split.n,
        n_s,
        n_f,
        s: split.s,
    })
}

pub fn decompose_pencil(e: &Mat, a: &Mat, tol: f64) -> Result<PencilSplit> {
    let n = e.nrows();
    if !check_pencil_regularity(e, a)?.regular {
        return Err(Error::Structural("pencil zE - A is singular".into()));
    }
    if n == 0 {
        let z = Mat::zeros(0, 0);
        return Ok(PencilSplit { p: z.clone(), t: z.clone(), j: z.clone(), n: z, n_s: 0, n_f: 0, s: 1 });
    }
    let scale = norm2(&hcat(&[e, a]));
    let thr = tol * scale;
    let mut rank_guard = RankGuard { threshold: thr, borderline: Vec::new() };

    // V sequence: preimage under A of the image of E V.
    let mut v = Mat::identity(n, n);
    for _ in 0..=n {
        let img = rank_guard.orth(&(e * &v));
        let comp = complement(&img, n, thr);
        let next = if comp.ncols() == 0 { Mat::identity(n, n) } else { rank_guard.null(&(comp.transpose() * a)) };
        let done = next.ncols() == v.ncols();
        v = next;
        if done {
            break;
        }
    }
    // W sequence: preimage under E of the image of A W.
    let mut w = Mat::zeros(n, 0);
    for _ in 0..=n {
        let img = if w.ncols() == 0 { Mat::zeros(n, 0) } else { rank_guard.orth(&(a * &w)) };
        let comp = complement(&img, n, thr);
        let next = rank_guard.null(&(comp.transpose() * e));
        let done = next.ncols() == w.ncols();
        w = next;
        if done {
            break;
        }
    }
    if !rank_guard.borderline.is_empty() {
        return Err(Error::RankAmbiguity { threshold: thr, values: rank_guard.borderline });
    }
    let (n_s, n_f) = (v.ncols(), w.ncols());
    if n_s + n_f != n {
        return Err(Error::Structural(format!("Wong limits have dimensions {n_s} + {n_f} != {n}")));
    }
    let t = hcat(&[&v, &w]);
    let p = hcat(&[&(e * &v), &(a * &w)])
        .try_inverse()
        .ok_or_else(|| Error::Structural("[E V, A W] is singular".into()))?;
    let pet = &p * e * &t;
    let pat = &p * a * &t;
    let j = pat.view((0, 0), (n_s, n_s)).into_owned();
    let mut nil = pet.view((n_s, n_s), (n_f, n_f)).into_owned();
    let s = nilpotency_index(&mut nil, tol);
    Ok(PencilSplit { p, t, j, n: nil, n_s, n_f, s })
}

/// Smallest `s` with `N^s = 0` up to `tol`. Entries of `N` below
/// `tol * max(1, |N|)` are zeroed first so that `N^s` vanishes exactly.
fn nilpotency_index(nil: &mut Mat, tol: f64) -> usize {
    let k = nil.nrows();
    if k == 0 {
        return 1;
    }
    let scale = max_abs(nil).max(1.0);
    nil.iter_mut().filter(|v| v.abs() <= tol * scale).for_each(|v| *v = 0.0);
    for s in 1..=k {
        let pw = mat_pow(nil, s);
        if max_abs(&pw) <= tol * scale.powi(s as i32) {
            return s;
        }
    }
    k
}

struct RankGuard {
    threshold: f64,
    borderline: Vec<f64>,
}

impl RankGuard {
    fn inspect(&mut self, m: &Mat) {
        for s in singular_values(m) {
            if s > self.threshold / AMBIGUITY_BAND && s < self.threshold * AMBIGUITY_BAND {
                self.borderline.push(s);
            }
        }
    }

    fn orth(&mut self, m: &Mat) -> Mat {
        self.inspect(m);
        orth(m, self.threshold)
    }

    fn null(&mut self, m: &Mat) -> Mat {
        self.inspect(m);
        null_space(m, self.threshold)
    }
}

impl WeierstrassForm {
    /// `blockdiag(I_{n_s}, N)`.
    pub fn e_canonical(&self) -> Mat {
        crate::linalg::block_diag(&[&Mat::identity(self.n_s, self.n_s), &self.n])
    }

    /// `blockdiag(J, I_{n_f})`.
    pub fn a_canonical(&self) -> Mat {
        crate::linalg::block_diag(&[&self.j, &Mat::identity(self.n_f, self.n_f)])
    }

    /// `N^i` for `i = 0..s`.
    pub fn nilpotent_powers(&self) -> Vec<Mat> {
        (0..self.s).map(|i| mat_pow(&self.n, i)).collect()
    }

    /// Largest reassembly defect `max(|PET - diag(I,N)|, |PAT - diag(J,I)|)`
    /// relative to `|E| + |A|`.
    pub fn reassembly_error(&self, e: &Mat, a: &Mat) -> f64 {
        let de = max_abs(&(&self.p * e * &self.t - self.e_canonical()));
        let da = max_abs(&(&self.p * a * &self.t - self.a_canonical()));
        de.max(da) / (max_abs(e) + max_abs(a)).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> Mat {
        Mat::from_row_slice(rows, cols, v)
    }

    #[test]
    fn identity_e_is_regular() {
        let e = Mat::identity(2, 2);
        let a = m(2, 2, &[0.3, 1.0, -2.0, 0.1]);
        assert!(check_pencil_regularity(&e, &a).unwrap().regular);
    }

    #[test]
    fn zero_pencil_is_not_regular() {
        let z = Mat::zeros(1, 1);
        let v = check_pencil_regularity(&z, &z).unwrap();
        assert!(!v.regular);
        assert_eq!(v.samples.len(), 3);
        assert!(matches!(decompose_pencil(&z, &z, 1e-9), Err(Error::Structural(_))));
    }

    #[test]
    fn rectangular_pencil_is_rejected() {
        assert!(matches!(check_pencil_regularity(&Mat::zeros(2, 3), &Mat::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn standard_system_is_all_slow() {
        let e = Mat::identity(3, 3);
        let a = m(3, 3, &[0.5, 0.1, 0.0, 0.0, -0.2, 1.0, 0.3, 0.0, 0.9]);
        let split = decompose_pencil(&e, &a, 1e-9).unwrap();
        assert_eq!((split.n_s, split.n_f, split.s), (3, 0, 1));
        assert_eq!(split.n.shape(), (0, 0));
        let mut ej: Vec<f64> = split.j.complex_eigenvalues().iter().map(|z| z.re).collect();
        let mut ea: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.re).collect();
        ej.sort_by(f64::total_cmp);
        ea.sort_by(f64::total_cmp);
        for (x, y) in ej.iter().zip(&ea) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn shift_chain_is_all_fast_with_index_two() {
        // det(zE - A) = 1 for E = [[0,1],[0,0]], A = I.
        let e = m(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let a = Mat::identity(2, 2);
        let split = decompose_pencil(&e, &a, 1e-9).unwrap();
        assert_eq!((split.n_s, split.n_f, split.s), (0, 2, 2));
        assert!(max_abs(&(&split.n * &split.n)) == 0.0);
        assert!(max_abs(&split.n) > 0.5);
        let wf = WeierstrassForm {
            p: split.p.clone(),
            t: split.t.clone(),
            j: split.j.clone(),
            n: split.n.clone(),
            b_s: Mat::zeros(0, 0),
            b_f: Mat::zeros(2, 0),
            c_s: Mat::zeros(0, 0),
            c_f: Mat::zeros(0, 2),
            q_bar: Mat::zeros(2, 2),
            n_s: 0,
            n_f: 2,
            s: 2,
        };
        assert!(wf.reassembly_error(&e, &a) < 1e-12);
        assert_eq!(determinant_degree(&e, &a, 1.0, 1e-9), 0);
    }

    #[test]
    fn determinant_degree_counts_finite_eigenvalues() {
        let e = m(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let a = m(3, 3, &[0.5, 0.0, 0.0, 0.0, -0.3, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(determinant_degree(&e, &a, 1.0, 1e-9), 2);
        let split = decompose_pencil(&e, &a, 1e-9).unwrap();
        assert_eq!((split.n_s, split.n_f, split.s), (2, 1, 1));
    }

    #[test]
    fn borderline_rank_is_reported() {
        let e = m(2, 2, &[1.0, 0.0, 0.0, 1e-9]);
        let a = m(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        match decompose_pencil(&e, &a, 1e-9) {
            Err(Error::RankAmbiguity { values, .. }) => assert!(!values.is_empty()),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }
}
