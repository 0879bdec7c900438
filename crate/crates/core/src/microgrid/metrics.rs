use crate::control::StepRecord;
use crate::linalg::{Mat, Vector};

/// Pooled coefficient of determination `1 - SSE / SST`, with `SST` taken
/// about the per-channel mean of `actual`. `None` when fewer than two
/// samples are given, the shapes differ, or `actual` is constant.
pub fn r_squared(pred: &Mat, actual: &Mat) -> Option<f64> {
    if pred.shape() != actual.shape() || actual.ncols() < 2 {
        return None;
    }
    let sse = (actual - pred).norm_squared();
    let sst: f64 = actual
        .row_iter()
        .map(|r| {
            let mean = r.mean();
            r.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        })
        .sum();
    (sst > 0.0).then(|| 1.0 - sse / sst)
}

/// Root mean square over all entries; zero for an empty matrix.
pub fn rms(m: &Mat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        (m.norm_squared() / m.len() as f64).sqrt()
    }
}

/// First index `k` from which every channel satisfies
/// `|y_i - r_i| <= band |r_i|` for `hold` consecutive samples.
pub fn settling_index(y: &Mat, reference: &Vector, band: f64, hold: usize) -> Option<usize> {
    let inside = |k: usize| (0..y.nrows()).all(|i| (y[(i, k)] - reference[i]).abs() <= band * reference[i].abs());
    let mut run = 0;
    for k in 0..y.ncols() {
        if inside(k) {
            run += 1;
            if run >= hold {
                return Some(k + 1 - hold);
            }
        } else {
            run = 0;
        }
    }
    None
}

pub const SETTLING_BAND: f64 = 0.02;
pub const SETTLING_HOLD: usize = 10;

/// Closed-loop scores of one controller run.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerMetrics {
    /// One-step prediction `R^2` over all control steps.
    pub r_squared: Option<f64>,
    /// RMS of `y - r` in each reference phase.
    pub rms_phase: [f64; 2],
    /// RMS of the noise-free output error over the second half of each phase.
    pub steady_rms: f64,
    /// Control steps from the switch until settling.
    pub settling: Option<usize>,
    /// `max_k |y_k - y_hat_k| / |y_k|`.
    pub max_rel_pred_error: f64,
    pub softened_steps: usize,
}

fn columns(records: &[&StepRecord], f: impl Fn(&StepRecord) -> Vector) -> Mat {
    let rows = records.first().map(|r| f(r).len()).unwrap_or(0);
    let mut m = Mat::zeros(rows, records.len());
    for (k, r) in records.iter().enumerate() {
        m.set_column(k, &f(r));
    }
    m
}

/// `phase_start` is the index of the first record after the switch.
pub fn controller_metrics(records: &[StepRecord], phase_start: usize) -> ControllerMetrics {
    let all: Vec<&StepRecord> = records.iter().collect();
    let split = phase_start.min(records.len());
    let phases = [&all[..split], &all[split..]];
    let pred = columns(&all, |r| r.y_hat.clone());
    let actual = columns(&all, |r| r.y.clone());
    let rms_phase = phases.map(|ph| rms(&columns(ph, |r| &r.y - &r.reference)));
    let steady: Vec<&StepRecord> = phases.iter().flat_map(|ph| ph[ph.len() / 2..].iter().copied()).collect();
    let steady_rms = rms(&columns(&steady, |r| &r.y_clean - &r.reference));
    let settling = phases[1]
        .first()
        .and_then(|first| settling_index(&columns(phases[1], |r| r.y.clone()), &first.reference, SETTLING_BAND, SETTLING_HOLD));
    let max_rel_pred_error = records
        .iter()
        .map(|r| (&r.y - &r.y_hat).norm() / r.y.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    ControllerMetrics {
        r_squared: r_squared(&pred, &actual),
        rms_phase,
        steady_rms,
        settling,
        max_rel_pred_error,
        softened_steps: records.iter().filter(|r| r.softened).count(),
    }
}

/// Median of the finite values; `None` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
