//! Four-bus DC-microgrid benchmark: circuit model, excitation experiment,
//! offline verification, closed-loop comparison of the three controllers,
//! metrics and report files.

mod config;
mod data;
mod experiment;
pub mod metrics;
mod model;
mod report;

pub use config::ExperimentConfig;
pub use data::{build_plant, collect_data, excitation_signal, required_pe_order, snr_db, CollectedData, Plant};
pub use model::{build_microgrid, steady_state, Bus3Orientation, MicrogridParams, SteadyState};
pub use experiment::{
    build_controllers, estimate_dataset_innovations, offline_phase, run_experiment, run_seeds, verify_dataset, verify_trajectory, warmup_inputs, ControllerRun,
    ExperimentReport, OfflinePhase, Verification, CONTROLLER_NAMES, REFERENCE_STRUCTURE,
};
pub use report::{
    format_table, read_steps_csv, read_summary_csv, render_svg, summarize, summary_rows, write_report_files, write_steps_csv,
    write_summary_csv, ControllerSummary, SummaryRow,
};
