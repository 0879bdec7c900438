//! VARX fit with future input terms and the estimated innovations.
//!
//! Run with `cargo run --example varx`.

use inno_deepc::microgrid::{build_plant, collect_data, estimate_dataset_innovations, ExperimentConfig};
use inno_deepc::varx::{build_regressor, default_ridge, fit_varx, regressor_dim};

fn main() -> inno_deepc::Result<()> {
    let cfg = ExperimentConfig::default();
    let plant = build_plant(&cfg)?;
    let data = collect_data(&plant, &cfg, 0)?;
    let traj = &data.trajectory;
    println!("T = {}, SNR {:.1} dB", traj.len(), data.snr_db);

    let (ell, s) = (cfg.ell, plant.s());
    let pair = build_regressor(&traj.u, &traj.y, ell, s)?;
    println!("n_phi = {} (formula {}), N_e = {}", pair.n_phi(), regressor_dim(ell, s, 2, 3), pair.n_e);

    let (model, est) = estimate_dataset_innovations(traj, ell, s)?;
    let rms = (est.e_hat.norm_squared() / est.e_hat.len() as f64).sqrt();
    println!("least squares: innovation RMS {rms:.4}, |Theta_f| = {:.3}", model.theta_f().norm());

    let ridge = default_ridge(&pair);
    let reg = fit_varx(&pair, ridge)?;
    println!("ridge {ridge:.2e}: |Theta| = {:.3} vs {:.3}", reg.theta.norm(), model.theta.norm());
    Ok(())
}
