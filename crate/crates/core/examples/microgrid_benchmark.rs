//! Ten-seed comparison of Inno-DeePC, regularized DeePC and SPC with the
//! summary table written by the `compare` subcommand.
//!
//! Run with `cargo run --release --example microgrid_benchmark [config]`.

use inno_deepc::microgrid::{format_table, run_seeds, summarize, summary_rows, ExperimentConfig};

fn main() -> inno_deepc::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let mut rows = Vec::new();
    for report in run_seeds(&cfg) {
        let report = report?;
        println!("seed {:>2}: SNR {:.1} dB, verification {}", report.seed, report.snr_db, report.verification.passed());
        rows.extend(summary_rows(&report));
    }
    print!("{}", format_table(&summarize(&rows)));
    Ok(())
}
