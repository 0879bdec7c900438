use crate::behavioral::{block_hankel, RankTol};
use crate::error::{dim_check, Result};
use crate::linalg::{singular_values, vcat, Mat};

#[derive(Debug, Clone)]
pub struct ExcitationReport {
    pub exciting: bool,
    pub rank: usize,
    pub target: usize,
    pub rows: usize,
    pub cols: usize,
    /// Ratio of the `target`-th singular value to the rank threshold; zero
    /// when the matrix has fewer columns than the target rank.
    pub margin: f64,
}

/// Persistency of excitation of order `order`: `rank H_order(signal) = d * order`.
pub fn is_persistently_exciting(signal: &Mat, order: usize, tol: RankTol) -> ExcitationReport {
    let target = signal.nrows() * order;
    if order == 0 || order > signal.ncols() {
        return ExcitationReport { exciting: false, rank: 0, target, rows: target, cols: 0, margin: 0.0 };
    }
    let h = block_hankel(signal, order).expect("depth checked");
    rank_report(&h.data, target, tol)
}

/// Rank of `[H_order([u; e]); H_order(e)]` against `(m + p) * order`.
///
/// The stacked matrix is taken exactly as written in the innovation
/// Fundamental Lemma, so the innovation rows appear twice and can never add
/// rank; the duplicated rows only matter for the column count.
pub fn combined_pe_check(u: &Mat, e: &Mat, order: usize, tol: RankTol) -> Result<ExcitationReport> {
    dim_check(u.ncols() == e.ncols(), || format!("u has {} samples, e has {}", u.ncols(), e.ncols()))?;
    let target = (u.nrows() + e.nrows()) * order;
    if order == 0 || order > u.ncols() {
        return Ok(ExcitationReport { exciting: false, rank: 0, target, rows: target, cols: 0, margin: 0.0 });
    }
    let combined = vcat(&[u, e]);
    let hu = block_hankel(&combined, order)?;
    let he = block_hankel(e, order)?;
    Ok(rank_report(&vcat(&[&hu.data, &he.data]), target, tol))
}

pub(crate) fn rank_report(m: &Mat, target: usize, tol: RankTol) -> ExcitationReport {
    let sv = singular_values(m);
    let thr = tol.threshold(m.nrows(), m.ncols(), sv.first().copied().unwrap_or(0.0));
    let rank = sv.iter().filter(|s| **s > thr).count();
    let margin = if target == 0 {
        f64::INFINITY
    } else if target <= sv.len() && thr > 0.0 {
        sv[target - 1] / thr
    } else if target <= sv.len() {
        f64::INFINITY
    } else {
        0.0
    };
    ExcitationReport { exciting: rank == target, rank, target, rows: m.nrows(), cols: m.ncols(), margin }
}
