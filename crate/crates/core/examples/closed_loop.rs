//! One seed of the microgrid experiment: offline phase, then Inno-DeePC in
//! closed loop across the setpoint switch.
//!
//! Run with `cargo run --release --example closed_loop`.

use inno_deepc::microgrid::{run_experiment, ExperimentConfig};

fn main() -> inno_deepc::Result<()> {
    let cfg = ExperimentConfig::default();
    let report = run_experiment(&cfg, 0)?;
    println!("SNR {:.1} dB", report.snr_db);
    print!("{}", report.verification.summary());
    let run = report.run("inno-deepc").expect("controller present");
    println!("{:>5} {:>8} {:>8} {:>9} {:>9} {:>9} {:>9}", "k", "u1", "u2", "V1", "r1", "V4", "r3");
    for r in run.trace.records.iter().step_by(10) {
        println!(
            "{:>5} {:>8.3} {:>8.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            report.l_p + r.k,
            r.u[0],
            r.u[1],
            r.y[0],
            r.reference[0],
            r.y[2],
            r.reference[2]
        );
    }
    let m = &run.metrics;
    println!("R^2 {:?}, steady RMS {:.3}, settling {:?}", m.r_squared, m.steady_rms, m.settling);
    Ok(())
}
