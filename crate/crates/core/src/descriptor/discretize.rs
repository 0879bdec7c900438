//! First-order-hold discretization of continuous descriptor systems.
//!
//! The continuous system is split into `x_s' = J x_s + B_s u` and
//! `N x_f' = x_f + B_f u`. With piecewise-linear inputs:
//!
//! * slow part, exactly:
//!   `x_s[k+1] = Phi x_s[k] + (M0 - M1) u[k] + M1 u[k+1]` where
//!   `M0 = int_0^h e^{J s} ds B_s` and `M1 = int_0^h e^{J (h - t)} (t / h) dt B_s`.
//!   The shifted state `z = x_s - M1 u` removes the `u[k+1]` term and moves
//!   `C_s M1` into the feedthrough.
//! * fast part: input derivatives become forward divided differences
//!   `(u[k+1] - u[k]) / h`, which is realized by the discrete chain
//!   `N_d = N / h`, `B_fd = (I - N_d) B_f`. For continuous index 2 this is exact
//!   under the hold; higher-order derivatives map to higher divided differences.
//!
//! The discrete system is reassembled with `P_d = T^{-1}`, so the state keeps
//! the coordinates of the continuous decomposition basis `T`.

use crate::descriptor::{weierstrass_decompose, DescriptorSystem, DEFAULT_DECOMPOSITION_TOL};
use crate::error::{Error, Result};
use crate::linalg::{block_diag, vcat, Mat};

#[derive(Debug, Clone)]
pub struct FohDiscretization {
    /// Discrete-time system; the covariances of the input are carried over
    /// unchanged and read as discrete-time covariances.
    pub system: DescriptorSystem,
    pub h: f64,
    pub n_s: usize,
    pub n_f: usize,
    /// Nilpotency index of the discrete fast chain.
    pub s: usize,
    pub phi: Mat,
    pub m0: Mat,
    pub m1: Mat,
}

pub fn discretize_foh(cont: &DescriptorSystem, h: f64) -> Result<FohDiscretization> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Input(format!("sampling period must be positive, got {h}")));
    }
    let wf = weierstrass_decompose(cont, DEFAULT_DECOMPOSITION_TOL)?;
    let (n_s, n_f, m) = (wf.n_s, wf.n_f, cont.m());
    let (phi, m0, m1) = foh_integrals(&wf.j, &wf.b_s, h);

    let b_sd = &phi * &m1 + &m0 - &m1;
    let n_d = &wf.n / h;
    let b_fd = (Mat::identity(n_f, n_f) - &n_d) * &wf.b_f;

    let t = &wf.t;
    let t_inv = t.clone().try_inverse().ok_or_else(|| Error::Structural("T is singular".into()))?;
    let e_d = t * block_diag(&[&Mat::identity(n_s, n_s), &n_d]) * &t_inv;
    let a_d = t * block_diag(&[&phi, &Mat::identity(n_f, n_f)]) * &t_inv;
    let b_d = t * vcat(&[&b_sd, &b_fd]);
    let d_d = &cont.d + &wf.c_s * &m1;
    debug_assert_eq!(b_d.ncols(), m);

    let system = DescriptorSystem::new(e_d, a_d, b_d, cont.c.clone(), d_d, cont.q_noise.clone(), cont.r_noise.clone())?;
    let s = if n_f == 0 { 1 } else { wf.s };
    Ok(FohDiscretization { system, h, n_s, n_f, s, phi, m0, m1 })
}

/// `(Phi, M0, M1)` from one exponential of
/// `[[J, B, 0], [0, 0, I/h], [0, 0, 0]] * h`.
pub fn foh_integrals(j: &Mat, b: &Mat, h: f64) -> (Mat, Mat, Mat) {
    let (n, m) = (j.nrows(), b.ncols());
    let size = n + 2 * m;
    let mut f = Mat::zeros(size, size);
    f.view_mut((0, 0), (n, n)).copy_from(j);
    f.view_mut((0, n), (n, m)).copy_from(b);
    f.view_mut((n, n + m), (m, m)).copy_from(&(Mat::identity(m, m) / h));
    let ef = (f * h).exp();
    (
        ef.view((0, 0), (n, n)).into_owned(),
        ef.view((0, n), (n, m)).into_owned(),
        ef.view((0, n + m), (n, m)).into_owned(),
    )
}
