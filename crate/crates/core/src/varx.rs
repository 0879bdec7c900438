//! VARX regression with future input terms,
//!
//! ```text
//! y_k = sum_{i=1..l} Ty_i y_{k-i} + sum_{i=0..l} Tu_i u_{k-i} + sum_{j=1..s-1} Tf_j u_{k+j} + e_k,
//! ```
//!
//! fitted by (ridge) least squares to estimate the innovations of recorded data.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{default_rank_threshold, pinv, Mat};

/// Regression targets and regressors for `k = l .. T - s`.
///
/// Column `j` of `phi` (time `k = l + j`) stacks `y_{k-1}, ..., y_{k-l}`,
/// then `u_k, ..., u_{k-l}`, then `u_{k+1}, ..., u_{k+s-1}`.
#[derive(Debug, Clone)]
pub struct RegressorPair {
    pub y_mat: Mat,
    pub phi: Mat,
    pub n_e: usize,
    /// First and last time index covered.
    pub k_range: (usize, usize),
    pub ell: usize,
    pub s: usize,
    pub m: usize,
    pub p: usize,
}

impl RegressorPair {
    pub fn n_phi(&self) -> usize {
        self.phi.nrows()
    }
}

pub fn regressor_dim(ell: usize, s: usize, m: usize, p: usize) -> usize {
    ell * p + (ell + 1) * m + (s.max(1) - 1) * m
}

/// `T` is the number of outputs; `u` must hold at least `T` samples.
pub fn build_regressor(u: &Mat, y: &Mat, ell: usize, s: usize) -> Result<RegressorPair> {
    let (m, p, t) = (u.nrows(), y.nrows(), y.ncols());
    let s = s.max(1);
    if ell == 0 {
        return Err(Error::Input("VARX order must be at least 1".into()));
    }
    if t < ell + s || u.ncols() < t {
        return Err(Error::Input(format!(
            "VARX of order {ell} with s = {s} needs T >= {} aligned samples; got {t} outputs and {} inputs",
            ell + s,
            u.ncols()
        )));
    }
    let n_e = t - ell - s + 1;
    let n_phi = regressor_dim(ell, s, m, p);
    let mut phi = Mat::zeros(n_phi, n_e);
    let mut y_mat = Mat::zeros(p, n_e);
    for j in 0..n_e {
        let k = ell + j;
        y_mat.set_column(j, &y.column(k));
        let mut r = 0;
        for i in 1..=ell {
            phi.view_mut((r, j), (p, 1)).copy_from(&y.column(k - i));
            r += p;
        }
        for i in 0..=ell {
            phi.view_mut((r, j), (m, 1)).copy_from(&u.column(k - i));
            r += m;
        }
        for i in 1..s {
            phi.view_mut((r, j), (m, 1)).copy_from(&u.column(k + i));
            r += m;
        }
    }
    Ok(RegressorPair { y_mat, phi, n_e, k_range: (ell, t - s), ell, s, m, p })
}

#[derive(Debug, Clone)]
pub struct VarxModel {
    /// `[Theta_y, Theta_u, Theta_f]`, columns in regressor order.
    pub theta: Mat,
    pub ell: usize,
    pub s: usize,
    pub m: usize,
    pub p: usize,
    pub ridge: f64,
}

impl VarxModel {
    pub fn n_phi(&self) -> usize {
        self.theta.ncols()
    }

    /// `p x (l p)`, lags `1..=l`.
    pub fn theta_y(&self) -> Mat {
        self.theta.columns(0, self.ell * self.p).into_owned()
    }

    /// `p x ((l + 1) m)`, lags `0..=l`.
    pub fn theta_u(&self) -> Mat {
        self.theta.columns(self.ell * self.p, (self.ell + 1) * self.m).into_owned()
    }

    /// `p x ((s - 1) m)`, leads `1..s`.
    pub fn theta_f(&self) -> Mat {
        let off = self.ell * self.p + (self.ell + 1) * self.m;
        self.theta.columns(off, self.theta.ncols() - off).into_owned()
    }

    /// Long-format coefficients: `block, lag, output, input, value`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["block", "lag", "output", "input", "value"])?;
        let mut emit = |block: &str, lag: i64, cols: Mat, width: usize| -> Result<()> {
            for out in 0..self.p {
                for c in 0..width {
                    w.write_record([
                        block.to_string(),
                        lag.to_string(),
                        (out + 1).to_string(),
                        (c + 1).to_string(),
                        format!("{:e}", cols[(out, c)]),
                    ])?;
                }
            }
            Ok(())
        };
        let (ty, tu, tf) = (self.theta_y(), self.theta_u(), self.theta_f());
        for i in 0..self.ell {
            emit("y", (i + 1) as i64, ty.columns(i * self.p, self.p).into_owned(), self.p)?;
        }
        for i in 0..=self.ell {
            emit("u", i as i64, tu.columns(i * self.m, self.m).into_owned(), self.m)?;
        }
        for j in 0..self.s.saturating_sub(1) {
            emit("u_future", -((j + 1) as i64), tf.columns(j * self.m, self.m).into_owned(), self.m)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `1e-8 * trace(Phi Phi^T) / n_phi`.
pub fn default_ridge(pair: &RegressorPair) -> f64 {
    1e-8 * pair.phi.norm_squared() / pair.n_phi().max(1) as f64
}

/// Minimizes `|Y - Theta Phi|_F^2 + ridge |Theta|_F^2` through a Cholesky
/// factorization of `Phi Phi^T + ridge I`.
pub fn fit_varx(pair: &RegressorPair, ridge: f64) -> Result<VarxModel> {
    if !(ridge >= 0.0) {
        return Err(Error::Input(format!("ridge must be non-negative, got {ridge}")));
    }
    let n_phi = pair.n_phi();
    let gram = &pair.phi * pair.phi.transpose() + Mat::identity(n_phi, n_phi) * ridge;
    let chol = gram.clone().cholesky().ok_or_else(|| conditioning(ridge, "normal matrix is not positive definite"))?;
    let l = chol.l();
    let diag = l.diagonal();
    let (dmin, dmax) = diag.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if dmax == 0.0 || (dmin / dmax).powi(2) < 1e-15 {
        return Err(conditioning(ridge, "normal matrix is numerically singular"));
    }
    let theta = chol.solve(&(&pair.phi * pair.y_mat.transpose())).transpose();
    Ok(VarxModel { theta, ell: pair.ell, s: pair.s, m: pair.m, p: pair.p, ridge })
}

/// Minimum-norm least squares `Theta = Y Phi^+` through a truncated SVD.
/// Coincides with the normal-equation estimate when `Phi` has full row rank
/// and stays exact on noise-free data whose regressor rows are dependent.
pub fn fit_varx_min_norm(pair: &RegressorPair) -> VarxModel {
    let theta = &pair.y_mat * pinv(&pair.phi, default_rank_threshold(&pair.phi));
    VarxModel { theta, ell: pair.ell, s: pair.s, m: pair.m, p: pair.p, ridge: 0.0 }
}

/// Plain least squares (`ridge = 0`), falling back to [`fit_varx_min_norm`] when
/// the normal matrix is numerically singular.
pub fn fit_varx_auto(pair: &RegressorPair) -> VarxModel {
    match fit_varx(pair, 0.0) {
        Ok(model) => model,
        Err(e) => {
            log::info!("{e}; using the minimum-norm solution");
            fit_varx_min_norm(pair)
        }
    }
}

fn conditioning(ridge: f64, what: &str) -> Error {
    if ridge == 0.0 {
        Error::Conditioning(format!("{what}; retry with a positive ridge (see default_ridge)"))
    } else {
        Error::Conditioning(format!("{what} even with ridge {ridge:e}"))
    }
}

/// Estimated innovations `e_hat_k = y_k - Theta Phi_k` for `k` in `k_range`.
#[derive(Debug, Clone)]
pub struct InnovationEstimate {
    pub e_hat: Mat,
    pub start: usize,
}

impl InnovationEstimate {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["k".to_string()];
        header.extend((1..=self.e_hat.nrows()).map(|i| format!("e{i}")));
        w.write_record(&header)?;
        for j in 0..self.e_hat.ncols() {
            let mut rec = vec![(self.start + j).to_string()];
            rec.extend(self.e_hat.column(j).iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn estimate_innovations(model: &VarxModel, pair: &RegressorPair) -> InnovationEstimate {
    InnovationEstimate { e_hat: &pair.y_mat - &model.theta * &pair.phi, start: pair.k_range.0 }
}

/// Warns (and returns the message) when the order is below a known bound on
/// the augmented state dimension.
pub fn check_order(ell: usize, n_xi: Option<usize>) -> Option<String> {
    let n_xi = n_xi?;
    (ell < n_xi).then(|| {
        let msg = format!("VARX order {ell} is below the augmented state dimension {n_xi}; the finite-order fit is approximate");
        log::warn!("{msg}");
        msg
    })
}
