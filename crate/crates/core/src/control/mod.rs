//! Receding-horizon controllers over recorded data: Inno-DeePC, regularized
//! DeePC and SPC, the dense QP solver they share, and a closed-loop driver.

mod closed_loop;
mod config;
mod controllers;
mod predictor;
pub mod qp;

pub use closed_loop::{run_closed_loop, ClosedLoopTrace, StepRecord};
pub use config::{ChannelBox, ControllerConfig, ControllerState};
pub use controllers::{AffineController, Controller, Decision, QpStatus, RegDeePC, SOFT_PENALTY};
pub use predictor::{build_inno_predictor, build_spc_predictor, AffinePredictor, InnoPredictor, INNOVATION_REL_TOL};
pub use qp::{kkt_residual, solve_box_qp, solve_qp, QpSolution};
