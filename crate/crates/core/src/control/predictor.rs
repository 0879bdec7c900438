use crate::behavioral::HankelBundle;
use crate::control::ControllerState;
use crate::error::{dim_check, Error, Result};
use crate::linalg::{default_rank_threshold, null_space, norm2, pinv, singular_values, vcat, vcat_vec, Mat, Vector};

/// Multi-step predictor `y_f = Gamma u_f + bias_map z_p` where
/// `z_p = [u_p; y_p]` or `[u_p; y_p; e_p]`.
#[derive(Debug, Clone)]
pub struct AffinePredictor {
    pub gamma: Mat,
    pub bias_map: Mat,
    pub uses_innovation: bool,
}

impl AffinePredictor {
    pub fn past(&self, state: &ControllerState) -> Vector {
        if self.uses_innovation {
            vcat_vec(&[&state.u_p(), &state.y_p(), &state.e_p()])
        } else {
            vcat_vec(&[&state.u_p(), &state.y_p()])
        }
    }

    pub fn bias(&self, state: &ControllerState) -> Vector {
        &self.bias_map * self.past(state)
    }

    pub fn predict(&self, state: &ControllerState, u_f: &Vector) -> Vector {
        &self.gamma * u_f + self.bias(state)
    }
}

/// Innovation-aware pseudo-inverse predictor.
///
/// With `Ef_perp` an orthonormal null-space basis of `E_f`,
/// `Pi = [U_p; Y_p; E_p; U_f] Ef_perp` and
/// `y_f = Y_f Ef_perp Pi^+ [u_p; y_p; e_p; u_f]`.
#[derive(Debug, Clone)]
pub struct InnoPredictor {
    pub ef_perp: Mat,
    pub pi: Mat,
    pub pi_pinv: Mat,
    pub yf_map: Mat,
    pub affine: AffinePredictor,
    /// Numeric rank of `E_f` and its full row count.
    pub ef_rank: usize,
    pub ef_rows: usize,
}

/// Null-space threshold relative to the largest singular value of `Y_f`.
/// Innovation blocks of noise-free data are pure round-off and fall below
/// it, which leaves `Ef_perp = I`.
pub const INNOVATION_REL_TOL: f64 = 1e-8;

pub fn build_inno_predictor(bundle: &HankelBundle, rank_tol: f64) -> Result<InnoPredictor> {
    let threshold = rank_tol * norm2(&bundle.y_f).max(f64::MIN_POSITIVE);
    let ef_rows = bundle.e_f.nrows();
    let ef_rank = singular_values(&bundle.e_f).iter().filter(|v| **v > threshold).count();
    if ef_rank < ef_rows {
        log::warn!("innovation block E_f has numeric rank {ef_rank} < {ef_rows}; using the reduced null space");
    }
    let ef_perp = null_space(&bundle.e_f, threshold);
    if ef_perp.ncols() == 0 {
        return Err(Error::Structural("E_f has a trivial null space; no predictor exists".into()));
    }
    let pi = vcat(&[&bundle.u_p, &bundle.y_p, &bundle.e_p, &bundle.u_f]) * &ef_perp;
    let pi_pinv = pinv(&pi, default_rank_threshold(&pi));
    let yf_map = &bundle.y_f * &ef_perp;
    let g = &yf_map * &pi_pinv;
    let past = bundle.u_p.nrows() + bundle.y_p.nrows() + bundle.e_p.nrows();
    let affine = AffinePredictor {
        gamma: g.columns(past, bundle.u_f.nrows()).into_owned(),
        bias_map: g.columns(0, past).into_owned(),
        uses_innovation: true,
    };
    Ok(InnoPredictor { ef_perp, pi, pi_pinv, yf_map, affine, ef_rank, ef_rows })
}

impl InnoPredictor {
    pub fn predict(&self, state: &ControllerState, u_f: &Vector) -> Vector {
        self.affine.predict(state, u_f)
    }

    /// Forms `h_pinv` explicitly instead of using the affine reduction.
    pub fn predict_explicit(&self, state: &ControllerState, u_f: &Vector) -> Vector {
        let rhs = vcat_vec(&[&state.u_p(), &state.y_p(), &state.e_p(), u_f]);
        &self.yf_map * (&self.pi_pinv * rhs)
    }

    /// `|E_f Ef_perp|_inf`, the null-space certificate.
    pub fn null_space_defect(&self, bundle: &HankelBundle) -> f64 {
        (&bundle.e_f * &self.ef_perp).amax()
    }
}

/// Least-squares subspace predictor `Y_f ~ Theta [U_p; Y_p; U_f]` through the
/// pseudo-inverse.
pub fn build_spc_predictor(u_p: &Mat, y_p: &Mat, u_f: &Mat, y_f: &Mat) -> Result<AffinePredictor> {
    dim_check(u_p.ncols() == y_f.ncols() && y_p.ncols() == y_f.ncols() && u_f.ncols() == y_f.ncols(), || {
        "SPC data blocks differ in column count".into()
    })?;
    let z = vcat(&[u_p, y_p, u_f]);
    let theta = y_f * pinv(&z, default_rank_threshold(&z));
    let past = u_p.nrows() + y_p.nrows();
    Ok(AffinePredictor {
        gamma: theta.columns(past, u_f.nrows()).into_owned(),
        bias_map: theta.columns(0, past).into_owned(),
        uses_innovation: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavioral::partition_bundle;
    use crate::rng::{gaussian_matrix, stream_rng, Stream};

    fn random_bundle(noise: f64) -> HankelBundle {
        let mut rng = stream_rng(71, Stream::Probe);
        let u = gaussian_matrix(&mut rng, 1, 120);
        let e = gaussian_matrix(&mut rng, 1, 120) * noise;
        let mut y = Mat::zeros(1, 120);
        let mut x = 0.0;
        for k in 0..120 {
            y[(0, k)] = x + e[(0, k)];
            x = 0.8 * x + u[(0, k)] + 0.5 * e[(0, k)];
        }
        partition_bundle(&u, &y, &e, 4, 3).unwrap()
    }

    #[test]
    fn zero_innovations_give_identity_null_space() {
        let b = random_bundle(0.0);
        let pred = build_inno_predictor(&b, INNOVATION_REL_TOL).unwrap();
        assert_eq!(pred.ef_perp.ncols(), b.n_c);
        assert_eq!(pred.ef_rank, 0);
    }

    #[test]
    fn affine_and_explicit_paths_agree() {
        let b = random_bundle(0.3);
        let pred = build_inno_predictor(&b, INNOVATION_REL_TOL).unwrap();
        assert!(pred.null_space_defect(&b) <= 1e-10 * b.e_f.amax());
        let mut rng = stream_rng(72, Stream::Probe);
        let mut st = ControllerState::new(1, 1, 4);
        for _ in 0..4 {
            let v = gaussian_matrix(&mut rng, 3, 1);
            st.push(&v.rows(0, 1).column(0).into(), &v.rows(1, 1).column(0).into(), &v.rows(2, 1).column(0).into());
        }
        let uf = Vector::from_column_slice(gaussian_matrix(&mut rng, 3, 1).as_slice());
        let a = pred.predict(&st, &uf);
        let e = pred.predict_explicit(&st, &uf);
        assert!((a - &e).amax() <= 1e-10 * (1.0 + e.amax()));
    }

    #[test]
    fn prediction_is_affine_in_future_inputs() {
        let b = random_bundle(0.3);
        let pred = build_inno_predictor(&b, INNOVATION_REL_TOL).unwrap();
        let st = ControllerState::new(1, 1, 4);
        let (u1, u2) = (Vector::from_vec(vec![1.0, -2.0, 0.5]), Vector::from_vec(vec![0.3, 0.1, -1.0]));
        let y0 = pred.predict(&st, &Vector::zeros(3));
        let lhs = pred.predict(&st, &(&u1 + &u2)) - &y0;
        let rhs = (pred.predict(&st, &u1) - &y0) + (pred.predict(&st, &u2) - &y0);
        assert!((lhs - rhs).amax() < 1e-10);
        assert!(y0.amax() < 1e-12);
    }
}
