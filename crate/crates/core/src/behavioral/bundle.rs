use crate::behavioral::block_hankel;
use crate::error::{dim_check, Error, Result};
use crate::linalg::Mat;

/// Depth-`L_p + L_f` Hankel matrices of `(u, y, e)` split into past and
/// future row blocks.
#[derive(Debug, Clone)]
pub struct HankelBundle {
    pub u_p: Mat,
    pub u_f: Mat,
    pub y_p: Mat,
    pub y_f: Mat,
    pub e_p: Mat,
    pub e_f: Mat,
    pub n_c: usize,
    pub l_p: usize,
    pub l_f: usize,
}

impl HankelBundle {
    pub fn m(&self) -> usize {
        self.u_p.nrows() / self.l_p.max(1)
    }

    pub fn p(&self) -> usize {
        self.y_p.nrows() / self.l_p.max(1)
    }
}

/// Builds the bundle from aligned sequences of equal length `N_e`;
/// `N_c = N_e - (L_p + L_f) + 1`.
pub fn partition_bundle(u: &Mat, y: &Mat, e_hat: &Mat, l_p: usize, l_f: usize) -> Result<HankelBundle> {
    let n_e = u.ncols();
    dim_check(y.ncols() == n_e && e_hat.ncols() == n_e, || {
        format!("sequence lengths differ: u {n_e}, y {}, e {}", y.ncols(), e_hat.ncols())
    })?;
    dim_check(e_hat.nrows() == y.nrows(), || "innovations and outputs differ in dimension".into())?;
    let depth = l_p + l_f;
    if l_p == 0 || l_f == 0 || depth > n_e {
        return Err(Error::Input(format!("horizons L_p = {l_p}, L_f = {l_f} leave no columns from {n_e} samples")));
    }
    let split = |z: &Mat| -> Result<(Mat, Mat)> {
        let h = block_hankel(z, depth)?;
        Ok((h.block_rows(0, l_p), h.block_rows(l_p, l_f)))
    };
    let (u_p, u_f) = split(u)?;
    let (y_p, y_f) = split(y)?;
    let (e_p, e_f) = split(e_hat)?;
    Ok(HankelBundle { n_c: n_e - depth + 1, u_p, u_f, y_p, y_f, e_p, e_f, l_p, l_f })
}
