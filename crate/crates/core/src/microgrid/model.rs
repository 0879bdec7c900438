use crate::descriptor::DescriptorSystem;
use crate::error::{Error, Result};
use crate::linalg::{pinv_default, Mat, Vector};

/// Direction of the Bus 2 / Bus 3 cable current `i23`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bus3Orientation {
    /// `i23` flows Bus 2 -> Bus 3, so `u2` is a current drawn at Bus 3 and
    /// `L23 i23' = V2 - V3 - R23 i23`.
    Load,
    /// `i23` flows Bus 3 -> Bus 2 (`u2` injected at Bus 3) and
    /// `L23 i23' = V3 - V2 - R23 i23`.
    Generation,
}

impl std::str::FromStr for Bus3Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "load" => Ok(Self::Load),
            "generation" => Ok(Self::Generation),
            other => Err(Error::Parse(format!("unknown orientation '{other}' (load | generation)"))),
        }
    }
}

impl std::fmt::Display for Bus3Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Load => "load",
            Self::Generation => "generation",
        })
    }
}

/// Four-bus DC microgrid. SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridParams {
    pub c1: f64,
    pub c4: f64,
    pub l12: f64,
    pub l23: f64,
    pub l24: f64,
    pub r12: f64,
    pub r23: f64,
    pub r24: f64,
    pub r_load: f64,
    pub h: f64,
    pub orientation: Bus3Orientation,
}

impl Default for MicrogridParams {
    fn default() -> Self {
        Self {
            c1: 2.2e-3,
            c4: 1.5e-3,
            l12: 0.5e-3,
            l23: 0.8e-3,
            l24: 0.6e-3,
            r12: 0.10,
            r23: 0.15,
            r24: 0.12,
            r_load: 60.0,
            h: 0.1,
            orientation: Bus3Orientation::Load,
        }
    }
}

impl MicrogridParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("C1", self.c1),
            ("C4", self.c4),
            ("L12", self.l12),
            ("L23", self.l23),
            ("L24", self.l24),
            ("R12", self.r12),
            ("R23", self.r23),
            ("R24", self.r24),
            ("R_L", self.r_load),
            ("h", self.h),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

// state order
const V1: usize = 0;
const V2: usize = 1;
const V3: usize = 2;
const V4: usize = 3;
const I12: usize = 4;
const I23: usize = 5;
const I24: usize = 6;

/// Continuous-time circuit `E x' = A x + B u`, `y = [V1, V3, V4]` with
/// `x = [V1, V2, V3, V4, i12, i23, i24]`. Noise covariances are left at zero.
pub fn build_microgrid(p: &MicrogridParams) -> Result<DescriptorSystem> {
    p.validate()?;
    let mut e = Mat::zeros(7, 7);
    for (i, v) in [(V1, p.c1), (V4, p.c4), (I12, p.l12), (I23, p.l23), (I24, p.l24)] {
        e[(i, i)] = v;
    }
    let mut a = Mat::zeros(7, 7);
    let mut b = Mat::zeros(7, 2);
    // C1 V1' = u1 - i12
    a[(0, I12)] = -1.0;
    b[(0, 0)] = 1.0;
    // KCL at Bus 2
    a[(1, I12)] = 1.0;
    a[(1, I23)] = -1.0;
    a[(1, I24)] = -1.0;
    // 0 = i23 - u2
    a[(2, I23)] = 1.0;
    b[(2, 1)] = -1.0;
    // C4 V4' = i24 - V4 / R_L
    a[(3, I24)] = 1.0;
    a[(3, V4)] = -1.0 / p.r_load;
    // cable KVL
    let mut kvl = |row: usize, up: usize, down: usize, cur: usize, r: f64| {
        a[(row, up)] = 1.0;
        a[(row, down)] = -1.0;
        a[(row, cur)] = -r;
    };
    kvl(4, V1, V2, I12, p.r12);
    match p.orientation {
        Bus3Orientation::Load => kvl(5, V2, V3, I23, p.r23),
        Bus3Orientation::Generation => kvl(5, V3, V2, I23, p.r23),
    }
    kvl(6, V2, V4, I24, p.r24);
    let mut c = Mat::zeros(3, 7);
    c[(0, V1)] = 1.0;
    c[(1, V3)] = 1.0;
    c[(2, V4)] = 1.0;
    DescriptorSystem::deterministic(e, a, b, c, Mat::zeros(3, 2))
}

/// Equilibrium of `0 = A x + B u` and its output.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub x: Vector,
    pub y: Vector,
    /// `|A x + B u|_inf`.
    pub residual: f64,
    /// `A` was singular and the pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

pub fn steady_state(sys: &DescriptorSystem, u: &Vector) -> Result<SteadyState> {
    if u.len() != sys.m() {
        return Err(Error::Dimension(format!("steady state needs {} inputs, got {}", sys.m(), u.len())));
    }
    let rhs = -(&sys.b * u);
    let (x, pseudo_inverse) = match sys.a.clone().lu().solve(&rhs) {
        Some(x) if x.iter().all(|v| v.is_finite()) => (x, false),
        _ => {
            log::warn!("A is singular; steady state from the pseudo-inverse");
            (pinv_default(&sys.a) * &rhs, true)
        }
    };
    let residual = (&sys.a * &x - &rhs).amax();
    let y = &sys.c * &x + &sys.d * u;
    Ok(SteadyState { x, y, residual, pseudo_inverse })
}
