use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use inno_deepc::descriptor::Trajectory;
use inno_deepc::microgrid::{
    build_plant, collect_data, estimate_dataset_innovations, format_table, read_summary_csv, run_seeds, summarize,
    summary_rows, verify_dataset, write_report_files, write_summary_csv, ExperimentConfig,
};
use inno_deepc::varx::{build_regressor, estimate_innovations, fit_varx};
use inno_deepc::{Error, Result};

#[derive(Parser)]
#[command(name = "inno-deepc", version, about = "Innovation-based DeePC on the DC-microgrid benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat `key = value` experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides one setting, e.g. `--set noise_v_std=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the excitation experiment and write the trajectory CSV.
    CollectData {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Fit the VARX model with future input terms and write its coefficients
    /// and the estimated innovations.
    FitVarx {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 15)]
        ell: usize,
        /// Nilpotency index; taken from the benchmark model when omitted.
        #[arg(long)]
        s: Option<usize>,
        /// Ridge weight; plain least squares with a minimum-norm fallback
        /// when omitted.
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Innovations CSV; defaults to `<out>` with an `_innovations` suffix.
        #[arg(long)]
        innovations: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Check regularity, decomposition structure, R-controllability and
    /// excitation for a recorded trajectory.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Test the recorded outputs instead of a noise-free replay of the inputs.
        #[arg(long)]
        raw: bool,
        /// Per-lambda rank report.
        #[arg(long)]
        ranks_out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Offline phase and closed loop of all three controllers per seed.
    RunExperiment {
        /// A seed count (`10` means seeds 0..10) or a list/range (`3,5,8`, `2..6`).
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Summary table of a report directory (or summary CSV).
    Compare {
        #[arg(long = "in", default_value = "report")]
        input: PathBuf,
    },
}

enum Outcome {
    Ok,
    VerificationFailed,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if spec.contains(',') || spec.contains("..") {
        let mut cfg = ExperimentConfig::default();
        cfg.set("seeds", spec)?;
        return Ok(cfg.seeds);
    }
    let n: u64 = spec.trim().parse().map_err(|_| Error::Parse(format!("--seeds: '{spec}' is not a count or list")))?;
    Ok((0..n).collect())
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::CollectData { seed, out, config } => {
            let cfg = config.load()?;
            let plant = build_plant(&cfg)?;
            let data = collect_data(&plant, &cfg, seed)?;
            data.trajectory.write_csv(&out, cfg.params.h)?;
            println!(
                "wrote {} samples ({} look-ahead inputs) to {}; SNR {:.2} dB; seed {} after {} attempt(s)",
                data.trajectory.len(),
                data.trajectory.lookahead(),
                out.display(),
                data.snr_db,
                data.seed,
                data.attempts
            );
            Ok(Outcome::Ok)
        }
        Command::FitVarx { input, ell, s, ridge, out, innovations, config } => {
            let traj = Trajectory::read_csv(&input)?;
            let s = match s {
                Some(s) => s,
                None => build_plant(&config.load()?)?.s(),
            };
            let (model, est) = match ridge {
                Some(r) => {
                    let pair = build_regressor(&traj.u, &traj.y, ell, s)?;
                    let model = fit_varx(&pair, r)?;
                    let est = estimate_innovations(&model, &pair);
                    (model, est)
                }
                None => estimate_dataset_innovations(&traj, ell, s)?,
            };
            model.write_csv(&out)?;
            let e_path = innovations.unwrap_or_else(|| {
                let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "varx".into());
                out.with_file_name(format!("{stem}_innovations.csv"))
            });
            est.write_csv(&e_path)?;
            println!(
                "n_phi = {}, N_e = {}, ridge = {:e}; coefficients in {}, innovations in {}",
                model.n_phi(),
                est.e_hat.ncols(),
                model.ridge,
                out.display(),
                e_path.display()
            );
            Ok(Outcome::Ok)
        }
        Command::Verify { input, raw, ranks_out, config } => {
            let cfg = config.load()?;
            let plant = build_plant(&cfg)?;
            let traj = Trajectory::read_csv(&input)?;
            if traj.lookahead() + 1 < plant.s() {
                return Err(Error::Input(format!("trajectory needs {} look-ahead inputs", plant.s() - 1)));
            }
            let (_, est) = estimate_dataset_innovations(&traj, cfg.ell, plant.s())?;
            let v = verify_dataset(&plant, &cfg, &traj, &est, !raw)?;
            print!("{}", v.summary());
            if let Some(p) = ranks_out {
                v.r_controllability.write_csv(p)?;
            }
            Ok(if v.passed() { Outcome::Ok } else { Outcome::VerificationFailed })
        }
        Command::RunExperiment { seeds, out, config } => {
            let mut cfg = config.load()?;
            if let Some(spec) = seeds {
                cfg.seeds = parse_seeds(&spec)?;
            }
            cfg.validate()?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("config.txt"), cfg.to_text())?;
            let mut rows = Vec::new();
            let mut all_verified = true;
            for result in run_seeds(&cfg) {
                let report = result?;
                write_report_files(&report, &out)?;
                all_verified &= report.verification.passed();
                rows.extend(summary_rows(&report));
            }
            write_summary_csv(&rows, out.join("summary.csv"))?;
            print!("{}", format_table(&summarize(&rows)));
            if !all_verified {
                eprintln!("offline verification failed for at least one seed; see verification_seed*.txt");
                return Ok(Outcome::VerificationFailed);
            }
            Ok(Outcome::Ok)
        }
        Command::Compare { input } => {
            let path = if input.is_dir() { input.join("summary.csv") } else { input };
            let rows = read_summary_csv(&path)?;
            print!("{}", format_table(&summarize(&rows)));
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
