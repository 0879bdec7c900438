//! Innovation-based data-enabled predictive control for stochastic linear
//! descriptor systems.
//!
//! The crate covers the whole pipeline:
//!
//! * [`descriptor`]: descriptor models, quasi-Weierstrass decomposition,
//!   first-order-hold discretization and non-causal simulation;
//! * [`behavioral`]: block-Hankel matrices, persistency of excitation,
//!   data-based R-controllability and Fundamental-Lemma membership;
//! * [`innovation`]: the noise-buffer augmented causal model, its steady-state
//!   Kalman filter and the true innovations (used as a test oracle);
//! * [`varx`]: offline innovation estimation with a VARX regression that
//!   includes future input terms;
//! * [`control`]: Inno-DeePC, regularized DeePC and SPC receding-horizon
//!   controllers over a shared dense QP solver;
//! * [`microgrid`]: the DC-microgrid benchmark, experiments, metrics and
//!   report files.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod behavioral;
pub mod control;
pub mod descriptor;
pub mod error;
pub mod innovation;
pub mod linalg;
pub mod microgrid;
pub mod rng;
pub mod varx;

pub use error::{Error, Result};
