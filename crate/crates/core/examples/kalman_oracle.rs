//! Causal augmented innovation model, its steady-state Kalman filter and the
//! whiteness of the resulting innovations.
//!
//! Run with `cargo run --example kalman_oracle`.

use inno_deepc::descriptor::{sample_noise, simulate};
use inno_deepc::innovation::{autocorrelation, build_augmented, kalman_innovations, sample_covariance};
use inno_deepc::microgrid::{build_plant, excitation_signal, ExperimentConfig};

fn main() -> inno_deepc::Result<()> {
    let cfg = ExperimentConfig::default();
    let plant = build_plant(&cfg)?;
    let model = build_augmented(&plant.wf, &plant.system.r_noise)?.with_gain()?;
    let gain = model.gain()?;
    println!("n_xi = {}, r_w = {}, Riccati iterations {}", model.n_xi, model.r_w, gain.iterations);
    println!("spectral radius of A_xi - K C_xi: {:.4}", gain.spectral_radius);
    println!("Sigma_e =\n{}", gain.sigma_e);

    let len = 5000;
    let u = excitation_signal(&cfg, len + plant.s() - 1, 2);
    let noise = sample_noise(&plant.system, &plant.wf, len, 2);
    let traj = simulate(&plant.system, &plant.wf, &u, Some(&noise), &plant.x0_slow)?;
    let series = kalman_innovations(&model, &plant.wf, &plant.system.d, &traj)?;
    let skip = model.burn_in();
    let e = series.e.columns(skip, series.len() - skip).into_owned();
    println!("sample covariance after {skip} burn-in steps =\n{}", sample_covariance(&e));
    let rho = autocorrelation(&e, 5);
    println!("autocorrelation at lags 1..5 (rows: channels)\n{rho}");
    Ok(())
}
