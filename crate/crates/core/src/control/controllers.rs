use crate::control::qp::solve_qp_with_bounds;
use crate::control::{AffinePredictor, ControllerConfig, ControllerState, InnoPredictor};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{default_rank_threshold, null_space, pinv, repeat_diag, stack_window, symmetrize, vcat, vcat_vec, Mat, Vector};

/// Penalty on output-box slack once the hard problem is infeasible.
pub const SOFT_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Default)]
pub struct QpStatus {
    pub iterations: usize,
    pub active: usize,
    /// Output bounds were relaxed to recover feasibility.
    pub softened: bool,
}

/// Plan returned by one controller step.
#[derive(Debug, Clone)]
pub struct Decision {
    /// Optimal stacked inputs `u_t .. u_{t+L_f-1}`.
    pub u_f: Vector,
    /// Predicted stacked outputs over the horizon.
    pub y_f: Vector,
    pub status: QpStatus,
}

/// Uniform receding-horizon interface.
///
/// `committed` holds the `s - 1` inputs already issued for `t, t+1, ...`
/// (the plant's output at `t` depends on them); they are fixed in the plan.
/// `reference` is the stacked `p L_f` target.
pub trait Controller: Send {
    fn name(&self) -> &'static str;
    fn decide(&mut self, state: &ControllerState, committed: &Mat, reference: &Vector) -> Result<Decision>;
}

/// `lower <= map z + offset <= upper`, row-wise.
struct AffineBand {
    map: Mat,
    offset: Vector,
    lower: Vector,
    upper: Vector,
}

impl AffineBand {
    fn rows(&self) -> (Mat, Vector) {
        let mut rows: Vec<(Vector, f64)> = Vec::new();
        for i in 0..self.map.nrows() {
            let r = self.map.row(i).transpose();
            if self.lower[i].is_finite() {
                rows.push((r.clone(), self.lower[i] - self.offset[i]));
            }
            if self.upper[i].is_finite() {
                rows.push((-r, self.offset[i] - self.upper[i]));
            }
        }
        let n = self.map.ncols();
        let mut c = Mat::zeros(rows.len(), n);
        let mut d = Vector::zeros(rows.len());
        for (k, (r, rhs)) in rows.into_iter().enumerate() {
            c.set_row(k, &r.transpose());
            d[k] = rhs;
        }
        (c, d)
    }
}

/// Solves with hard variable bounds and hard `hard` rows; `soft` rows are
/// first imposed exactly and relaxed with penalized slacks on infeasibility.
fn solve_banded(
    h: &Mat,
    f: &Vector,
    lower: Option<&Vector>,
    upper: Option<&Vector>,
    hard: Option<&AffineBand>,
    soft: Option<&AffineBand>,
) -> Result<(Vector, QpStatus)> {
    let n = h.nrows();
    let (hc, hd) = hard.map(|b| b.rows()).unwrap_or_else(|| (Mat::zeros(0, n), Vector::zeros(0)));
    let (sc, sd) = soft.map(|b| b.rows()).unwrap_or_else(|| (Mat::zeros(0, n), Vector::zeros(0)));
    let c = vcat(&[&hc, &sc]);
    let d = vcat_vec(&[&hd, &sd]);
    match solve_qp_with_bounds(h, f, lower, upper, &c, &d) {
        Ok(sol) => Ok((sol.z, QpStatus { iterations: sol.iterations, active: sol.active.len(), softened: false })),
        Err(Error::Infeasible(_)) if sc.nrows() > 0 => {
            let k = sc.nrows();
            let mut h_aug = Mat::zeros(n + k, n + k);
            h_aug.view_mut((0, 0), (n, n)).copy_from(h);
            h_aug.view_mut((n, n), (k, k)).fill_with_identity();
            h_aug.view_mut((n, n), (k, k)).scale_mut(2.0 * SOFT_PENALTY);
            let f_aug = vcat_vec(&[f, &Vector::zeros(k)]);
            let lo = vcat_vec(&[&lower.cloned().unwrap_or_else(|| Vector::from_element(n, f64::NEG_INFINITY)), &Vector::zeros(k)]);
            let hi = vcat_vec(&[&upper.cloned().unwrap_or_else(|| Vector::from_element(n, f64::INFINITY)), &Vector::from_element(k, f64::INFINITY)]);
            let mut c_aug = Mat::zeros(hc.nrows() + k, n + k);
            c_aug.view_mut((0, 0), (hc.nrows(), n)).copy_from(&hc);
            c_aug.view_mut((hc.nrows(), 0), (k, n)).copy_from(&sc);
            c_aug.view_mut((hc.nrows(), n), (k, k)).fill_with_identity();
            let sol = solve_qp_with_bounds(&h_aug, &f_aug, Some(&lo), Some(&hi), &c_aug, &d)?;
            log::warn!("output constraints softened");
            Ok((sol.z.rows(0, n).into_owned(), QpStatus { iterations: sol.iterations, active: sol.active.len(), softened: true }))
        }
        Err(e) => Err(e),
    }
}

/// Input bounds over the horizon with the committed leading blocks fixed.
fn horizon_bounds(cfg: &ControllerConfig, m: usize, committed: &Mat) -> (Vector, Vector) {
    let n = m * cfg.l_f;
    let (mut lo, mut hi) = match &cfg.u_box {
        Some(b) => b.repeated(cfg.l_f),
        None => (Vector::from_element(n, f64::NEG_INFINITY), Vector::from_element(n, f64::INFINITY)),
    };
    let fixed = stack_window(committed, 0, committed.ncols());
    lo.rows_mut(0, fixed.len()).copy_from(&fixed);
    hi.rows_mut(0, fixed.len()).copy_from(&fixed);
    (lo, hi)
}

fn output_band(cfg: &ControllerConfig, map: Mat, offset: Vector) -> Option<AffineBand> {
    cfg.y_box.as_ref().map(|b| {
        let (lower, upper) = b.repeated(cfg.l_f);
        AffineBand { map, offset, lower, upper }
    })
}

/// Tracking QP over an affine predictor; shared by Inno-DeePC and SPC.
#[derive(Debug, Clone)]
pub struct AffineController {
    name: &'static str,
    pub predictor: AffinePredictor,
    pub cfg: ControllerConfig,
    wy_bar: Mat,
    h: Mat,
    m: usize,
}

impl AffineController {
    pub fn new(name: &'static str, predictor: AffinePredictor, cfg: ControllerConfig) -> Result<Self> {
        let (p, m) = (cfg.w_y.nrows(), cfg.w_u.nrows());
        dim_check(predictor.gamma.shape() == (p * cfg.l_f, m * cfg.l_f), || {
            format!("predictor gain is {:?}, expected {}x{}", predictor.gamma.shape(), p * cfg.l_f, m * cfg.l_f)
        })?;
        let wy_bar = repeat_diag(&cfg.w_y, cfg.l_f);
        let wu_bar = repeat_diag(&cfg.w_u, cfg.l_f);
        let g = &predictor.gamma;
        let h = symmetrize(&((g.transpose() * &wy_bar * g + wu_bar) * 2.0));
        Ok(Self { name, predictor, cfg, wy_bar, h, m })
    }

    /// Inno-DeePC: the innovation-aware pseudo-inverse predictor.
    pub fn inno(pred: &InnoPredictor, cfg: ControllerConfig) -> Result<Self> {
        Self::new("inno-deepc", pred.affine.clone(), cfg)
    }

    pub fn spc(pred: AffinePredictor, cfg: ControllerConfig) -> Result<Self> {
        Self::new("spc", pred, cfg)
    }

    /// Quadratic term `H` of `1/2 u^T H u + f^T u`.
    pub fn hessian(&self) -> &Mat {
        &self.h
    }

    pub fn linear_term(&self, bias: &Vector, reference: &Vector) -> Vector {
        self.predictor.gamma.transpose() * &self.wy_bar * (bias - reference) * 2.0
    }
}

impl Controller for AffineController {
    fn name(&self) -> &'static str {
        self.name
    }

    fn decide(&mut self, state: &ControllerState, committed: &Mat, reference: &Vector) -> Result<Decision> {
        let bias = self.predictor.bias(state);
        let f = self.linear_term(&bias, reference);
        let (lo, hi) = horizon_bounds(&self.cfg, self.m, committed);
        let band = output_band(&self.cfg, self.predictor.gamma.clone(), bias.clone());
        let (u_f, status) = solve_banded(&self.h, &f, Some(&lo), Some(&hi), None, band.as_ref())?;
        let y_f = &self.predictor.gamma * &u_f + bias;
        Ok(Decision { u_f, y_f, status })
    }
}

/// Regularized DeePC:
/// `min |Y_f g - r|_Wy^2 + |U_f g|_Wu^2 + lambda_g |g|^2` subject to
/// `[U_p; Y_p] g = [u_p; y_p]` and the committed rows of `U_f g`,
/// solved over `g = A^+ b + Z v` with `Z` a null-space basis of the
/// equality matrix `A`.
#[derive(Debug, Clone)]
pub struct RegDeePC {
    pub cfg: ControllerConfig,
    u_f: Mat,
    y_f: Mat,
    a_pinv: Mat,
    z: Mat,
    h_g: Mat,
    h_v: Mat,
    wy_bar: Mat,
    m: usize,
    committed_rows: usize,
}

impl RegDeePC {
    /// `lookahead` is the number of committed input blocks (`s - 1`).
    pub fn new(u_p: &Mat, y_p: &Mat, u_f: &Mat, y_f: &Mat, cfg: ControllerConfig, lookahead: usize) -> Result<Self> {
        let m = cfg.w_u.nrows();
        let committed_rows = m * lookahead;
        dim_check(committed_rows <= u_f.nrows(), || "look-ahead exceeds the horizon".into())?;
        let a = vcat(&[u_p, y_p, &u_f.rows(0, committed_rows).into_owned()]);
        let a_pinv = pinv(&a, default_rank_threshold(&a));
        let z = null_space(&a, default_rank_threshold(&a));
        if z.ncols() == 0 {
            return Err(Error::Structural("Hankel data leave no freedom after the consistency constraints".into()));
        }
        let wy_bar = repeat_diag(&cfg.w_y, cfg.l_f);
        let wu_bar = repeat_diag(&cfg.w_u, cfg.l_f);
        let n_c = u_f.ncols();
        let h_g = y_f.transpose() * &wy_bar * y_f + u_f.transpose() * wu_bar * u_f + Mat::identity(n_c, n_c) * cfg.lambda_g;
        let h_v = symmetrize(&(z.transpose() * &h_g * &z * 2.0));
        Ok(Self { cfg, u_f: u_f.clone(), y_f: y_f.clone(), a_pinv, z, h_g, h_v, wy_bar, m, committed_rows })
    }
}

impl Controller for RegDeePC {
    fn name(&self) -> &'static str {
        "reg-deepc"
    }

    fn decide(&mut self, state: &ControllerState, committed: &Mat, reference: &Vector) -> Result<Decision> {
        let fixed = stack_window(committed, 0, committed.ncols());
        dim_check(fixed.len() == self.committed_rows, || "committed inputs do not match the look-ahead".into())?;
        let b = vcat_vec(&[&state.u_p(), &state.y_p(), &fixed]);
        let g0 = &self.a_pinv * b;
        let f = self.z.transpose() * (&self.h_g * &g0 - self.y_f.transpose() * &self.wy_bar * reference) * 2.0;
        let input_band = self.cfg.u_box.as_ref().map(|bx| {
            let (lower, upper) = bx.repeated(self.cfg.l_f);
            let free = self.u_f.nrows() - self.committed_rows;
            let rows = self.u_f.rows(self.committed_rows, free);
            AffineBand {
                map: rows * &self.z,
                offset: rows * &g0,
                lower: lower.rows(self.committed_rows, free).into_owned(),
                upper: upper.rows(self.committed_rows, free).into_owned(),
            }
        });
        let out_band = output_band(&self.cfg, &self.y_f * &self.z, &self.y_f * &g0);
        let (v, status) = solve_banded(&self.h_v, &f, None, None, input_band.as_ref(), out_band.as_ref())?;
        let g = g0 + &self.z * v;
        let mut u_f = &self.u_f * &g;
        u_f.rows_mut(0, self.committed_rows).copy_from(&fixed);
        let y_f = &self.y_f * &g;
        debug_assert_eq!(u_f.len(), self.m * self.cfg.l_f);
        Ok(Decision { u_f, y_f, status })
    }
}
