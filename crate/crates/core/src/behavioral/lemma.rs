use crate::behavioral::{block_hankel, is_persistently_exciting, RankTol};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{default_rank_threshold, pinv, vcat, vcat_vec, Mat, Vector};

/// Relative residual at or below which a candidate is declared a trajectory.
pub const MEMBERSHIP_TOL: f64 = 1e-6;

/// How the excitation order `L + n_s + s - 1` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaOrder {
    Known { n_s: usize, s: usize },
    /// `n_s + s - 1` replaced by the state dimension `n`; `s` is still used
    /// for the truncation.
    UpperBound { n: usize, s: usize },
}

impl LemmaOrder {
    fn extra(&self) -> usize {
        match *self {
            LemmaOrder::Known { n_s, s } => n_s + s.max(1) - 1,
            LemmaOrder::UpperBound { n, .. } => n,
        }
    }

    fn s(&self) -> usize {
        match *self {
            LemmaOrder::Known { s, .. } | LemmaOrder::UpperBound { s, .. } => s.max(1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MembershipReport {
    /// `||H alpha - c|| / ||c||`, zero for a zero candidate.
    pub residual: f64,
    pub absolute_residual: f64,
    pub member: bool,
    pub alpha: Vector,
}

/// Least-squares test of `[H_L(u[0..=T-s]); H_L(y[0..=T-s])] alpha = [u_c; y_c]`.
///
/// `data_u`/`data_y` hold `T` aligned samples (extra trailing input columns
/// are ignored). Candidates are `m x L` and `p x L`.
pub fn fl_membership(
    data_u: &Mat,
    data_y: &Mat,
    window: usize,
    order: LemmaOrder,
    cand_u: &Mat,
    cand_y: &Mat,
) -> Result<MembershipReport> {
    let t = data_y.ncols();
    dim_check(data_u.ncols() >= t, || format!("u has {} samples, y has {t}", data_u.ncols()))?;
    dim_check(cand_u.shape() == (data_u.nrows(), window) && cand_y.shape() == (data_y.nrows(), window), || {
        format!("candidate shapes {:?}/{:?} do not match window {window}", cand_u.shape(), cand_y.shape())
    })?;
    let s = order.s();
    let m = data_u.nrows();
    let pe_order = window + order.extra();
    if t < s || (m + 1) * (pe_order + 1) - 1 > t {
        return Err(Error::Precondition(format!(
            "{t} samples cannot support excitation of order {pe_order} (need at least {})",
            (m + 1) * (pe_order + 1) - 1
        )));
    }
    let kept = t - s + 1;
    let u_bar = data_u.columns(0, kept).into_owned();
    let y_bar = data_y.columns(0, kept).into_owned();
    let pe = is_persistently_exciting(&u_bar, pe_order, RankTol::Default);
    if !pe.exciting {
        return Err(Error::Precondition(format!(
            "input is not persistently exciting of order {pe_order} (rank {} of {})",
            pe.rank, pe.target
        )));
    }
    let h = vcat(&[&block_hankel(&u_bar, window)?.data, &block_hankel(&y_bar, window)?.data]);
    let c = vcat_vec(&[&stacked(cand_u), &stacked(cand_y)]);
    let alpha = pinv(&h, default_rank_threshold(&h)) * &c;
    let absolute_residual = (&h * &alpha - &c).norm();
    let scale = c.norm();
    let residual = if scale > 0.0 { absolute_residual / scale } else { absolute_residual };
    Ok(MembershipReport { residual, absolute_residual, member: residual <= MEMBERSHIP_TOL, alpha })
}

fn stacked(m: &Mat) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, stream_rng, Stream};

    // x+ = A x + B u, y = C x with n = 2.
    fn run(a: &Mat, b: &Mat, c: &Mat, u: &Mat, x0: &Vector) -> Mat {
        let mut x = x0.clone();
        let mut y = Mat::zeros(c.nrows(), u.ncols());
        for k in 0..u.ncols() {
            y.set_column(k, &(c * &x));
            x = a * &x + b * u.column(k);
        }
        y
    }

    fn plant() -> (Mat, Mat, Mat) {
        (
            Mat::from_row_slice(2, 2, &[0.7, 0.2, -0.1, 0.5]),
            Mat::from_row_slice(2, 1, &[1.0, 0.5]),
            Mat::from_row_slice(1, 2, &[1.0, -0.3]),
        )
    }

    #[test]
    fn own_trajectories_are_members_and_foreign_ones_are_not() {
        let (a, b, c) = plant();
        let mut rng = stream_rng(31, Stream::Probe);
        let u = gaussian_matrix(&mut rng, 1, 80);
        let y = run(&a, &b, &c, &u, &Vector::zeros(2));
        let order = LemmaOrder::Known { n_s: 2, s: 1 };

        let cu = gaussian_matrix(&mut rng, 1, 5);
        let cy = run(&a, &b, &c, &cu, &Vector::from_vec(vec![0.4, -1.0]));
        let rep = fl_membership(&u, &y, 5, order, &cu, &cy).unwrap();
        assert!(rep.member, "residual {}", rep.residual);

        let other = Mat::from_row_slice(2, 2, &[-0.6, 0.3, 0.4, 0.2]);
        let fy = run(&other, &b, &c, &cu, &Vector::from_vec(vec![0.4, -1.0]));
        let rep = fl_membership(&u, &y, 5, order, &cu, &fy).unwrap();
        assert!(rep.residual > 1e-3, "residual {}", rep.residual);
    }

    #[test]
    fn zero_candidate_has_zero_residual() {
        let (a, b, c) = plant();
        let u = gaussian_matrix(&mut stream_rng(32, Stream::Probe), 1, 60);
        let y = run(&a, &b, &c, &u, &Vector::zeros(2));
        let rep = fl_membership(&u, &y, 4, LemmaOrder::UpperBound { n: 2, s: 1 }, &Mat::zeros(1, 4), &Mat::zeros(1, 4)).unwrap();
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn constant_input_violates_precondition() {
        let u = Mat::from_element(1, 60, 1.0);
        let y = Mat::zeros(1, 60);
        let err = fl_membership(&u, &y, 4, LemmaOrder::Known { n_s: 2, s: 1 }, &Mat::zeros(1, 4), &Mat::zeros(1, 4));
        assert!(matches!(err, Err(Error::Precondition(_))));
    }
}
