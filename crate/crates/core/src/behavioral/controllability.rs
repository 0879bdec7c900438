use std::path::Path;

use nalgebra::Complex;
use rand::Rng;

use crate::behavioral::{block_hankel, HankelMatrix, RankTol};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{complex_singular_values, svd_thin, to_complex, vcat, Mat};
use crate::rng::{stream_rng, Stream};

/// `U0 = H(u[0..T-1])`, `U1 = H(u[1..T])` and likewise for `y`.
#[derive(Debug, Clone)]
pub struct ShiftedHankelPair {
    pub u0: HankelMatrix,
    pub u1: HankelMatrix,
    pub y0: HankelMatrix,
    pub y1: HankelMatrix,
}

impl ShiftedHankelPair {
    pub fn new(u: &Mat, y: &Mat, depth: usize) -> Result<Self> {
        dim_check(u.ncols() == y.ncols(), || format!("u has {} samples, y has {}", u.ncols(), y.ncols()))?;
        let len = u.ncols();
        if len < depth + 1 || depth == 0 {
            return Err(Error::Input(format!("shifted Hankel pair of depth {depth} needs at least {} samples, got {len}", depth + 1)));
        }
        let head = |z: &Mat| z.columns(0, len - 1).into_owned();
        let tail = |z: &Mat| z.columns(1, len - 1).into_owned();
        Ok(Self {
            u0: block_hankel(&head(u), depth)?,
            u1: block_hankel(&tail(u), depth)?,
            y0: block_hankel(&head(y), depth)?,
            y1: block_hankel(&tail(y), depth)?,
        })
    }

    /// `([U0; Y0], [U1; Y1])`.
    pub fn stacked(&self) -> (Mat, Mat) {
        (vcat(&[&self.u0.data, &self.y0.data]), vcat(&[&self.u1.data, &self.y1.data]))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LambdaRank {
    pub lambda: Complex<f64>,
    pub rank: usize,
    pub threshold: f64,
    pub smallest_retained: f64,
}

#[derive(Debug, Clone)]
pub struct ControllabilityReport {
    pub verdict: bool,
    pub expected_rank: usize,
    pub depth: usize,
    pub ranks: Vec<LambdaRank>,
}

impl ControllabilityReport {
    pub fn min_rank(&self) -> usize {
        self.ranks.iter().map(|r| r.rank).min().unwrap_or(0)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["lambda_re", "lambda_im", "rank", "expected_rank"])?;
        for r in &self.ranks {
            w.write_record([
                r.lambda.re.to_string(),
                r.lambda.im.to_string(),
                r.rank.to_string(),
                self.expected_rank.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

const RANDOM_CANDIDATES: usize = 32;
const CANDIDATE_SEED: u64 = 0x5eed;

/// Data-based R-controllability: `rank([U1; Y1] - lambda [U0; Y0])` must equal
/// `m (depth + s - 1) + n_s` at every candidate `lambda`.
///
/// Candidates are the eigenvalues of the pencil compressed onto the dominant
/// singular subspaces of `[U0; Y0]`, 32 seeded points in the annulus
/// `0.01 <= |lambda| <= 10`, and `0`, `1`.
pub fn r_controllability_test(
    u: &Mat,
    y: &Mat,
    depth: usize,
    n_s: usize,
    s: usize,
    tol: RankTol,
) -> Result<ControllabilityReport> {
    let pair = ShiftedHankelPair::new(u, y, depth)?;
    let (m0, m1) = pair.stacked();
    let expected_rank = u.nrows() * (depth + s.max(1) - 1) + n_s;

    let mut candidates = compressed_eigenvalues(&m0, &m1, tol);
    let mut rng = stream_rng(CANDIDATE_SEED, Stream::Probe);
    for _ in 0..RANDOM_CANDIDATES {
        let radius = 10f64.powf(rng.random_range(-2.0..1.0));
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        candidates.push(Complex::from_polar(radius, angle));
    }
    candidates.push(Complex::new(0.0, 0.0));
    candidates.push(Complex::new(1.0, 0.0));

    let (c0, c1) = (to_complex(&m0), to_complex(&m1));
    let ranks: Vec<LambdaRank> = candidates
        .into_iter()
        .map(|lambda| {
            let pencil = &c1 - &c0 * lambda;
            let sv = complex_singular_values(&pencil);
            let threshold = tol.threshold(pencil.nrows(), pencil.ncols(), sv.first().copied().unwrap_or(0.0));
            let rank = sv.iter().filter(|v| **v > threshold).count();
            let smallest_retained = if rank > 0 { sv[rank - 1] } else { 0.0 };
            LambdaRank { lambda, rank, threshold, smallest_retained }
        })
        .collect();
    let verdict = ranks.iter().all(|r| r.rank == expected_rank);
    Ok(ControllabilityReport { verdict, expected_rank, depth, ranks })
}

/// Finite eigenvalues of `Sigma_r^{-1} U_r^T M1 V_r`, the pencil restricted to
/// the numerically nonzero part of `M0 = U Sigma V^T`.
fn compressed_eigenvalues(m0: &Mat, m1: &Mat, tol: RankTol) -> Vec<Complex<f64>> {
    if m0.nrows() == 0 || m0.ncols() == 0 {
        return Vec::new();
    }
    let svd = svd_thin(m0);
    let (u, v) = (&svd.u, &svd.v);
    let sv = &svd.s;
    let threshold = tol.threshold(m0.nrows(), m0.ncols(), sv[0]);
    let r = sv.iter().filter(|v| **v > threshold).count();
    if r == 0 {
        return Vec::new();
    }
    let ur = u.columns(0, r);
    let vr = v.columns(0, r);
    let mut k = ur.transpose() * m1 * vr;
    for i in 0..r {
        let inv = 1.0 / sv[i];
        k.row_mut(i).scale_mut(inv);
    }
    k.complex_eigenvalues().iter().copied().filter(|z| z.re.is_finite() && z.im.is_finite()).collect()
}
