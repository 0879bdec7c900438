use crate::descriptor::{WeierstrassForm, NOISE_RANK_REL};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{hcat, kron, mat_pow, norm_inf, pinv_default, psd_factor, spectral_radius, symmetrize, vcat, Mat};

pub const RICCATI_TOL: f64 = 1e-12;
pub const RICCATI_MAX_ITER: usize = 100_000;

/// Causal model of the descriptor system with the noise buffer
/// `eta_k = [eps_k; ...; eps_{k+s}]` appended to the slow state:
///
/// ```text
/// xi_{k+1} = A_xi xi_k + B_xi u_k + G_xi eps_{k+s+1}
/// y~_k     = C_xi xi_k + v_k
/// ```
#[derive(Debug, Clone)]
pub struct AugmentedInnovationModel {
    pub a_xi: Mat,
    pub b_xi: Mat,
    pub g_xi: Mat,
    pub c_xi: Mat,
    pub a_eta: Mat,
    pub b_eta: Mat,
    pub s_0: Mat,
    pub s_f: Mat,
    /// `[I, N, ..., N^s]`.
    pub m_pow: Mat,
    pub r_noise: Mat,
    pub n_s: usize,
    pub r_w: usize,
    pub s: usize,
    pub n_xi: usize,
    pub gain: Option<KalmanGain>,
}

#[derive(Debug, Clone)]
pub struct KalmanGain {
    pub k_p: Mat,
    pub p_inf: Mat,
    pub sigma_e: Mat,
    /// `A_xi - K_p C_xi`.
    pub a_bar: Mat,
    pub iterations: usize,
    pub spectral_radius: f64,
}

pub fn build_augmented(wf: &WeierstrassForm, r_noise: &Mat) -> Result<AugmentedInnovationModel> {
    let p = wf.c_s.nrows();
    dim_check(r_noise.shape() == (p, p), || format!("R is {:?}, expected {p}x{p}", r_noise.shape()))?;
    let (n_s, n_f, s) = (wf.n_s, wf.n_f, wf.s);
    let l = psd_factor(&wf.q_bar, NOISE_RANK_REL);
    let r_w = l.ncols();
    let l_s = l.rows(0, n_s).into_owned();
    let l_f = l.rows(n_s, n_f).into_owned();
    let nb = r_w * (s + 1);

    let mut a_eta = Mat::zeros(nb, nb);
    for i in 0..s {
        a_eta.view_mut((i * r_w, (i + 1) * r_w), (r_w, r_w)).fill_with_identity();
    }
    let mut b_eta = Mat::zeros(nb, r_w);
    b_eta.view_mut((s * r_w, 0), (r_w, r_w)).fill_with_identity();
    let mut s_0 = Mat::zeros(r_w, nb);
    s_0.view_mut((0, 0), (r_w, r_w)).fill_with_identity();
    let s_f = kron(&Mat::identity(s + 1, s + 1), &l_f);
    let powers: Vec<Mat> = (0..=s).map(|i| mat_pow(&wf.n, i)).collect();
    let m_pow = hcat(&powers.iter().collect::<Vec<_>>());

    let a_xi = vcat(&[&hcat(&[&wf.j, &(&l_s * &s_0)]), &hcat(&[&Mat::zeros(nb, n_s), &a_eta])]);
    let b_xi = vcat(&[&wf.b_s, &Mat::zeros(nb, wf.b_s.ncols())]);
    let g_xi = vcat(&[&Mat::zeros(n_s, r_w), &b_eta]);
    let c_xi = hcat(&[&wf.c_s, &(-(&wf.c_f * &m_pow * &s_f))]);

    Ok(AugmentedInnovationModel {
        a_xi,
        b_xi,
        g_xi,
        c_xi,
        a_eta,
        b_eta,
        s_0,
        s_f,
        m_pow,
        r_noise: r_noise.clone(),
        n_s,
        r_w,
        s,
        n_xi: n_s + nb,
        gain: None,
    })
}

impl AugmentedInnovationModel {
    /// Attaches the steady-state Kalman gain.
    pub fn with_gain(mut self) -> Result<Self> {
        self.gain = Some(solve_steady_kalman(&self, &self.r_noise.clone())?);
        Ok(self)
    }

    pub fn gain(&self) -> Result<&KalmanGain> {
        self.gain.as_ref().ok_or_else(|| Error::Precondition("Kalman gain not computed; call with_gain".into()))
    }

    /// Number of initial filter steps excluded from stationary statistics.
    pub fn burn_in(&self) -> usize {
        burn_in(self.n_xi)
    }
}

pub fn burn_in(n_xi: usize) -> usize {
    (5 * n_xi).max(50)
}

fn riccati_step(model: &AugmentedInnovationModel, r: &Mat, p: &Mat) -> (Mat, Mat, Mat) {
    let (a, c) = (&model.a_xi, &model.c_xi);
    let sigma = symmetrize(&(c * p * c.transpose() + r));
    let sigma_inv = sigma.clone().cholesky().map(|ch| ch.inverse()).unwrap_or_else(|| pinv_default(&sigma));
    let k = a * p * c.transpose() * &sigma_inv;
    let next = a * p * a.transpose() + &model.g_xi * model.g_xi.transpose() - &k * &sigma * k.transpose();
    (symmetrize(&next), k, sigma)
}

/// First `count` iterates `P_0 = 0, P_1, ...` of the predictor Riccati map.
pub fn riccati_iterates(model: &AugmentedInnovationModel, r_noise: &Mat, count: usize) -> Vec<Mat> {
    let mut out = vec![Mat::zeros(model.n_xi, model.n_xi)];
    while out.len() < count {
        let next = riccati_step(model, r_noise, out.last().expect("non-empty")).0;
        out.push(next);
    }
    out
}

/// Fixed point of
/// `P = A P A^T + G G^T - A P C^T (C P C^T + R)^{-1} C P A^T`, iterated from
/// `P = 0` until `|P_{j+1} - P_j|_inf <= 1e-12 |P_j|_inf`.
pub fn solve_steady_kalman(model: &AugmentedInnovationModel, r_noise: &Mat) -> Result<KalmanGain> {
    let p_out = model.c_xi.nrows();
    dim_check(r_noise.shape() == (p_out, p_out), || "R does not match the output dimension".into())?;
    let mut p = Mat::zeros(model.n_xi, model.n_xi);
    let mut residual = f64::INFINITY;
    for it in 1..=RICCATI_MAX_ITER {
        let (next, _, _) = riccati_step(model, r_noise, &p);
        residual = norm_inf(&(&next - &p));
        if !residual.is_finite() {
            return Err(Error::Convergence { iterations: it, residual });
        }
        let scale = norm_inf(&p);
        p = next;
        if residual <= RICCATI_TOL * scale || residual == 0.0 {
            let (_, k_p, sigma_e) = riccati_step(model, r_noise, &p);
            let a_bar = &model.a_xi - &k_p * &model.c_xi;
            let rho = spectral_radius(&a_bar);
            if rho >= 1.0 {
                return Err(Error::Detectability(rho));
            }
            return Ok(KalmanGain { k_p, p_inf: p, sigma_e, a_bar, iterations: it, spectral_radius: rho });
        }
    }
    Err(Error::Convergence { iterations: RICCATI_MAX_ITER, residual })
}
