use std::path::Path;

use crate::descriptor::{NoiseRealization, Trajectory, WeierstrassForm};
use crate::error::{dim_check, Error, Result};
use crate::innovation::AugmentedInnovationModel;
use crate::linalg::{Mat, Vector};

/// Innovations `e_k = y~_k - C_xi xi_{k|k-1}` with `y_k = y~_k + d_k`,
/// covering steps `start .. start + len`.
#[derive(Debug, Clone)]
pub struct InnovationSeries {
    pub e: Mat,
    pub y_tilde: Mat,
    pub d: Mat,
    pub start: usize,
}

impl InnovationSeries {
    pub fn len(&self) -> usize {
        self.e.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.e.ncols() == 0
    }

    /// Columns `k, e1..ep, y_tilde1..p, d1..p`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = self.e.nrows();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["k".to_string()];
        for name in ["e", "y_tilde", "d"] {
            header.extend((1..=p).map(|i| format!("{name}{i}")));
        }
        w.write_record(&header)?;
        for j in 0..self.len() {
            let mut rec = vec![(self.start + j).to_string()];
            for m in [&self.e, &self.y_tilde, &self.d] {
                rec.extend(m.column(j).iter().map(|v| format!("{v:e}")));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `d_k = D u_k - C_f sum_{i<s} N^i B_f u_{k+i}` for the window `u_k .. u_{k+s-1}`.
pub fn deterministic_compensation(wf: &WeierstrassForm, d: &Mat, window: &Mat) -> Result<Vector> {
    dim_check(window.ncols() == wf.s && window.nrows() == d.ncols(), || {
        format!("window is {:?}, expected {}x{}", window.shape(), d.ncols(), wf.s)
    })?;
    let mut fast = Vector::zeros(wf.n_f);
    let mut power = Mat::identity(wf.n_f, wf.n_f);
    for i in 0..wf.s {
        fast += &power * &wf.b_f * window.column(i);
        power = &power * &wf.n;
    }
    Ok(d * window.column(0) - &wf.c_f * fast)
}

/// `d_k` for `k = 0..len`; `u` needs `len + s - 1` columns.
pub fn compensation_series(wf: &WeierstrassForm, d: &Mat, u: &Mat, len: usize) -> Result<Mat> {
    if u.ncols() + 1 < len + wf.s {
        return Err(Error::Input(format!("{} inputs cannot cover {len} steps with s = {}", u.ncols(), wf.s)));
    }
    let mut out = Mat::zeros(d.nrows(), len);
    for k in 0..len {
        out.set_column(k, &deterministic_compensation(wf, d, &u.columns(k, wf.s).into_owned())?);
    }
    Ok(out)
}

/// Steady-state Kalman predictor started at `xi_{0|-1} = 0`.
pub fn kalman_innovations(
    model: &AugmentedInnovationModel,
    wf: &WeierstrassForm,
    d: &Mat,
    traj: &Trajectory,
) -> Result<InnovationSeries> {
    kalman_innovations_from(model, wf, d, traj, &Vector::zeros(model.n_xi))
}

pub fn kalman_innovations_from(
    model: &AugmentedInnovationModel,
    wf: &WeierstrassForm,
    d: &Mat,
    traj: &Trajectory,
    xi0: &Vector,
) -> Result<InnovationSeries> {
    let gain = model.gain()?;
    dim_check(xi0.len() == model.n_xi, || format!("xi0 has {} entries, n_xi = {}", xi0.len(), model.n_xi))?;
    let len = traj.len();
    let dk = compensation_series(wf, d, &traj.u, len)?;
    let y_tilde = &traj.y - &dk;
    let mut e = Mat::zeros(traj.y.nrows(), len);
    let mut xi = xi0.clone();
    for k in 0..len {
        let ek = y_tilde.column(k) - &model.c_xi * &xi;
        xi = &model.a_xi * &xi + &model.b_xi * traj.u.column(k) + &gain.k_p * &ek;
        e.set_column(k, &ek);
    }
    Ok(InnovationSeries { e, y_tilde, d: dk, start: 0 })
}

/// `[x0_slow; eps_0; ...; eps_s]`, the augmented state consistent with `noise`.
pub fn initial_augmented_state(model: &AugmentedInnovationModel, noise: &NoiseRealization, x0_slow: &Vector) -> Vector {
    let mut xi = Vector::zeros(model.n_xi);
    xi.rows_mut(0, model.n_s).copy_from(x0_slow);
    if model.r_w > 0 {
        for i in 0..=model.s {
            xi.rows_mut(model.n_s + i * model.r_w, model.r_w).copy_from(&noise.eps.column(i));
        }
    }
    xi
}

/// Propagates the augmented model with the noise of `noise` and rebuilds
/// `y_k = C_xi xi_k + v_k + d_k`. Returns `u.ncols() - s + 1` outputs.
pub fn simulate_augmented(
    model: &AugmentedInnovationModel,
    wf: &WeierstrassForm,
    d: &Mat,
    u: &Mat,
    noise: &NoiseRealization,
    x0_slow: &Vector,
) -> Result<Trajectory> {
    let s = model.s;
    if u.ncols() < s {
        return Err(Error::Input(format!("need at least s = {s} inputs")));
    }
    let len = u.ncols() + 1 - s;
    if noise.v.ncols() < len || (model.r_w > 0 && noise.eps.ncols() < len + s) {
        return Err(Error::Input(format!("noise realization is shorter than {len} steps plus the s-step buffer")));
    }
    let dk = compensation_series(wf, d, u, len)?;
    let mut xi = initial_augmented_state(model, noise, x0_slow);
    let mut y = Mat::zeros(d.nrows(), len);
    for k in 0..len {
        y.set_column(k, &(&model.c_xi * &xi + noise.v.column(k) + dk.column(k)));
        if k + 1 < len {
            let mut next = &model.a_xi * &xi + &model.b_xi * u.column(k);
            if model.r_w > 0 {
                next += &model.g_xi * noise.eps.column(k + s + 1);
            }
            xi = next;
        }
    }
    Ok(Trajectory { u: u.clone(), y, x: None })
}

/// Multi-step prediction `y_{k+j|k-1}, j = 0..horizon` from the filter state
/// `xi_{k|k-1}`; `u_window` holds `u_k .. u_{k+horizon+s-2}`.
pub fn oracle_predict(
    model: &AugmentedInnovationModel,
    wf: &WeierstrassForm,
    d: &Mat,
    xi_hat: &Vector,
    u_window: &Mat,
    horizon: usize,
) -> Result<Mat> {
    let dk = compensation_series(wf, d, u_window, horizon)?;
    let mut xi = xi_hat.clone();
    let mut out = Mat::zeros(d.nrows(), horizon);
    for j in 0..horizon {
        out.set_column(j, &(&model.c_xi * &xi + dk.column(j)));
        xi = &model.a_xi * &xi + &model.b_xi * u_window.column(j);
    }
    Ok(out)
}

/// Filter states `xi_{k|k-1}` for `k = 0..=len`, started at zero.
pub fn filter_states(
    model: &AugmentedInnovationModel,
    series: &InnovationSeries,
    u: &Mat,
) -> Result<Vec<Vector>> {
    let gain = model.gain()?;
    let mut xi = Vector::zeros(model.n_xi);
    let mut out = Vec::with_capacity(series.len() + 1);
    out.push(xi.clone());
    for k in 0..series.len() {
        xi = &model.a_xi * &xi + &model.b_xi * u.column(series.start + k) + &gain.k_p * series.e.column(k);
        out.push(xi.clone());
    }
    Ok(out)
}

/// Per-channel normalized autocorrelation `rho(tau)` for `tau = 1..=max_lag`
/// (`p x max_lag`).
pub fn autocorrelation(e: &Mat, max_lag: usize) -> Mat {
    let (p, n) = e.shape();
    let mut out = Mat::zeros(p, max_lag);
    for i in 0..p {
        let row = e.row(i);
        let mean = row.mean();
        let c0: f64 = row.iter().map(|v| (v - mean).powi(2)).sum();
        for tau in 1..=max_lag.min(n.saturating_sub(1)) {
            let c: f64 = (0..n - tau).map(|k| (row[k] - mean) * (row[k + tau] - mean)).sum();
            out[(i, tau - 1)] = if c0 > 0.0 { c / c0 } else { 0.0 };
        }
    }
    out
}

/// Unbiased sample covariance of the columns of `e`.
pub fn sample_covariance(e: &Mat) -> Mat {
    let (p, n) = e.shape();
    if n < 2 {
        return Mat::zeros(p, p);
    }
    let mean = e.column_mean();
    let centered = e - &mean * nalgebra::RowDVector::from_element(n, 1.0);
    &centered * centered.transpose() / (n - 1) as f64
}
