//! Noisy open-loop simulation of the discrete microgrid with the default
//! excitation, and the resulting signal-to-noise ratio.
//!
//! Run with `cargo run --example simulate`.

use inno_deepc::descriptor::{sample_noise, simulate};
use inno_deepc::microgrid::{build_plant, excitation_signal, snr_db, ExperimentConfig};

fn main() -> inno_deepc::Result<()> {
    let cfg = ExperimentConfig::default();
    let plant = build_plant(&cfg)?;
    let len = 200;
    let u = excitation_signal(&cfg, len + plant.s() - 1, 1);
    let noise = sample_noise(&plant.system, &plant.wf, len, 1);
    let noisy = simulate(&plant.system, &plant.wf, &u, Some(&noise), &plant.x0_slow)?;
    let clean = simulate(&plant.system, &plant.wf, &u, None, &plant.x0_slow)?;
    println!("{:>5} {:>9} {:>9} {:>9} {:>9} {:>9}", "k", "u1", "u2", "V1", "V3", "V4");
    for k in (0..len).step_by(20) {
        let (uk, yk) = (u.column(k), noisy.y.column(k));
        println!("{k:>5} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}", uk[0], uk[1], yk[0], yk[1], yk[2]);
    }
    println!("SNR {:.1} dB", snr_db(&noisy.y, &clean.y));
    Ok(())
}
