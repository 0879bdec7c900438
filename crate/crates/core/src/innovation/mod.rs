//! Causal reformulation of the stochastic descriptor system: the noise-buffer
//! augmented model, its steady-state Kalman predictor and the innovations it
//! produces. Everything here needs the true model and serves as the oracle
//! for the data-driven pipeline.

mod filter;
mod model;

pub use filter::{
    autocorrelation, compensation_series, deterministic_compensation, filter_states, initial_augmented_state,
    kalman_innovations, kalman_innovations_from, oracle_predict, sample_covariance, simulate_augmented,
    InnovationSeries,
};
pub use model::{
    build_augmented, burn_in, riccati_iterates, solve_steady_kalman, AugmentedInnovationModel, KalmanGain,
    RICCATI_MAX_ITER, RICCATI_TOL,
};
