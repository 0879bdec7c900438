use crate::error::{dim_check, Error, Result};
use crate::linalg::{min_eigenvalue_sym, stack_window, Mat, Vector};

/// Per-channel bounds `lower <= z <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBox {
    pub lower: Vector,
    pub upper: Vector,
}

impl ChannelBox {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        dim_check(lower.len() == upper.len(), || "box bounds differ in length".into())?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::Input("box has lower > upper".into()));
        }
        Ok(Self { lower, upper })
    }

    /// Bounds repeated over `horizon` stacked steps.
    pub fn repeated(&self, horizon: usize) -> (Vector, Vector) {
        let d = self.lower.len();
        (
            Vector::from_fn(d * horizon, |i, _| self.lower[i % d]),
            Vector::from_fn(d * horizon, |i, _| self.upper[i % d]),
        )
    }
}

/// Receding-horizon settings shared by all controllers.
///
/// `w_y` and `w_u` weight `|y - r|^2` and `|u|^2` per step.
#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub l_p: usize,
    pub l_f: usize,
    pub w_y: Mat,
    pub w_u: Mat,
    pub u_box: Option<ChannelBox>,
    pub y_box: Option<ChannelBox>,
    pub lambda_g: f64,
}

impl ControllerConfig {
    pub fn validate(&self, m: usize, p: usize, s: usize) -> Result<()> {
        if self.l_p == 0 {
            return Err(Error::Input("L_p must be positive".into()));
        }
        if self.l_f < s.max(1) {
            return Err(Error::Input(format!("L_f = {} must be at least s = {s}", self.l_f)));
        }
        dim_check(self.w_y.shape() == (p, p), || format!("W_y must be {p}x{p}"))?;
        dim_check(self.w_u.shape() == (m, m), || format!("W_u must be {m}x{m}"))?;
        if min_eigenvalue_sym(&self.w_y) < -1e-12 {
            return Err(Error::Input("W_y must be positive semidefinite".into()));
        }
        if min_eigenvalue_sym(&self.w_u) <= 0.0 {
            return Err(Error::Input("W_u must be positive definite".into()));
        }
        if let Some(b) = &self.u_box {
            dim_check(b.lower.len() == m, || "input box has wrong channel count".into())?;
        }
        if let Some(b) = &self.y_box {
            dim_check(b.lower.len() == p, || "output box has wrong channel count".into())?;
        }
        if !(self.lambda_g >= 0.0) {
            return Err(Error::Input("lambda_g must be non-negative".into()));
        }
        Ok(())
    }
}

/// Rolling windows of the last `L_p` inputs, outputs and innovation
/// estimates, oldest first. Innovations start at zero.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub u: Mat,
    pub y: Mat,
    pub e: Mat,
    pub t: usize,
}

impl ControllerState {
    pub fn new(m: usize, p: usize, l_p: usize) -> Self {
        Self { u: Mat::zeros(m, l_p), y: Mat::zeros(p, l_p), e: Mat::zeros(p, l_p), t: 0 }
    }

    pub fn l_p(&self) -> usize {
        self.u.ncols()
    }

    /// Drops the oldest sample and appends `(u_t, y_t, e_t)`.
    pub fn push(&mut self, u: &Vector, y: &Vector, e: &Vector) {
        let l = self.l_p();
        for (w, v) in [(&mut self.u, u), (&mut self.y, y), (&mut self.e, e)] {
            if l > 1 {
                let tail = w.columns(1, l - 1).into_owned();
                w.columns_mut(0, l - 1).copy_from(&tail);
            }
            w.set_column(l - 1, v);
        }
        self.t += 1;
    }

    pub fn u_p(&self) -> Vector {
        stack_window(&self.u, 0, self.l_p())
    }

    pub fn y_p(&self) -> Vector {
        stack_window(&self.y, 0, self.l_p())
    }

    pub fn e_p(&self) -> Vector {
        stack_window(&self.e, 0, self.l_p())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_shifts_windows() {
        let mut st = ControllerState::new(1, 1, 3);
        for k in 1..=4 {
            let v = Vector::from_element(1, k as f64);
            st.push(&v, &(&v * 10.0), &(&v * 100.0));
        }
        assert_eq!(st.u_p().as_slice(), &[2.0, 3.0, 4.0]);
        assert_eq!(st.y_p().as_slice(), &[20.0, 30.0, 40.0]);
        assert_eq!(st.e_p().as_slice(), &[200.0, 300.0, 400.0]);
        assert_eq!(st.t, 4);
    }

    #[test]
    fn horizon_shorter_than_index_is_rejected() {
        let cfg = ControllerConfig {
            l_p: 2,
            l_f: 1,
            w_y: Mat::identity(1, 1),
            w_u: Mat::identity(1, 1),
            u_box: None,
            y_box: None,
            lambda_g: 0.0,
        };
        assert!(cfg.validate(1, 1, 2).is_err());
        assert!(cfg.validate(1, 1, 1).is_ok());
    }
}
