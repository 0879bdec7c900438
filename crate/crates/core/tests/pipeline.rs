//! End-to-end checks of the offline and closed-loop pipeline on the
//! microgrid benchmark.

use inno_deepc::innovation::{build_augmented, initial_augmented_state, kalman_innovations_from};
use inno_deepc::microgrid::{
    build_plant, estimate_dataset_innovations, offline_phase, read_steps_csv, read_summary_csv, run_experiment,
    summary_rows, write_report_files, write_steps_csv, write_summary_csv, ExperimentConfig, CONTROLLER_NAMES,
};

fn noise_free() -> ExperimentConfig {
    ExperimentConfig { noise_w_std: 0.0, noise_v_std: 0.0, ..Default::default() }
}

#[test]
fn varx_innovations_approach_the_kalman_oracle() {
    // With n_phi regressors over N_e samples the least-squares residual
    // misses roughly sqrt(n_phi / N_e) of the innovation energy.
    let cfg = ExperimentConfig { t_data: 3000, ..Default::default() };
    let plant = build_plant(&cfg).unwrap();
    let offline = offline_phase(&plant, &cfg, 3).unwrap();
    let model = build_augmented(&plant.wf, &plant.system.r_noise).and_then(|m| m.with_gain()).unwrap();
    let xi0 = initial_augmented_state(&model, &offline.data.noise, &plant.x0_slow);
    let oracle = kalman_innovations_from(&model, &plant.wf, &plant.system.d, &offline.data.trajectory, &xi0).unwrap();
    let est = &offline.innovations;
    let truth = oracle.e.columns(est.start - oracle.start, est.e_hat.ncols());
    let rel = (&est.e_hat - truth).norm() / truth.norm();
    let floor = (offline.varx.n_phi() as f64 / est.e_hat.ncols() as f64).sqrt();
    assert!(rel < 1.5 * floor, "relative innovation error {rel}, projection floor {floor}");
}

#[test]
fn noise_free_inno_predictor_extrapolates_unseen_data() {
    use inno_deepc::control::ControllerState;
    use inno_deepc::microgrid::collect_data;
    let cfg = noise_free();
    let plant = build_plant(&cfg).unwrap();
    let offline = offline_phase(&plant, &cfg, 1).unwrap();
    let fresh = collect_data(&plant, &cfg, 77).unwrap().trajectory;
    let (l_p, l_f) = (cfg.l_p, cfg.l_f);
    let mut st = ControllerState::new(2, 3, l_p);
    let at = 100;
    for k in at - l_p..at {
        st.push(&fresh.u.column(k).into_owned(), &fresh.y.column(k).into_owned(), &inno_deepc::linalg::Vector::zeros(3));
    }
    let u_f = inno_deepc::linalg::stack_window(&fresh.u, at, l_f);
    let y_f = inno_deepc::linalg::stack_window(&fresh.y, at, l_f);
    let pred = offline.inno.predict(&st, &u_f);
    // The stiff line modes barely appear in the data, so unseen windows are
    // matched to about 1e-5 rather than to round-off.
    let rel = (&pred - &y_f).amax() / y_f.amax();
    assert!(rel < 1e-5, "relative prediction error {rel}");
}

#[test]
fn noise_free_verification_reports_structure() {
    let cfg = noise_free();
    let plant = build_plant(&cfg).unwrap();
    let v = offline_phase(&plant, &cfg, 2).unwrap().verification;
    assert!(v.regular);
    assert_eq!(v.structure, (3, 4, 2));
    assert_eq!(v.det_degree, 3);
    assert!(v.input_pe.exciting);
    assert!(v.reference_residual <= 1e-10);
    assert!(v.warnings.iter().any(|w| w.contains("reference benchmark")));
}

#[test]
fn experiments_are_reproducible_per_seed() {
    let cfg = ExperimentConfig { run_steps: 40, switch_step: 30, ..Default::default() };
    let a = run_experiment(&cfg, 4).unwrap();
    let b = run_experiment(&cfg, 4).unwrap();
    assert_eq!(a.runs.len(), CONTROLLER_NAMES.len());
    for (ra, rb) in a.runs.iter().zip(&b.runs) {
        assert_eq!(ra.trace.controller, rb.trace.controller);
        for (x, y) in ra.trace.records.iter().zip(&rb.trace.records) {
            assert_eq!(x.u, y.u);
            assert_eq!(x.y, y.y);
        }
    }
    let c = run_experiment(&cfg, 5).unwrap();
    assert_ne!(a.runs[0].trace.records[5].y, c.runs[0].trace.records[5].y);
}

#[test]
fn report_files_round_trip() {
    let cfg = ExperimentConfig { run_steps: 30, switch_step: 25, ..Default::default() };
    let report = run_experiment(&cfg, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_report_files(&report, dir.path()).unwrap();
    for name in ["steps_seed0.csv", "verification_seed0.txt", "ranks_seed0.csv", "plot_seed0.svg"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let steps = dir.path().join("steps.csv");
    write_steps_csv(&report, &steps).unwrap();
    let traces = read_steps_csv(&steps, report.l_p).unwrap();
    assert_eq!(traces.len(), report.runs.len());
    for (t, run) in traces.iter().zip(&report.runs) {
        assert_eq!(t.controller, run.trace.controller);
        assert_eq!(t.records.len(), run.trace.records.len());
        for (a, b) in t.records.iter().zip(&run.trace.records) {
            assert_eq!(a.k, b.k);
            assert_eq!((&a.u, &a.y, &a.reference, &a.y_hat, &a.e), (&b.u, &b.y, &b.reference, &b.y_hat, &b.e));
        }
    }
    let rows = summary_rows(&report);
    let summary = dir.path().join("summary.csv");
    write_summary_csv(&rows, &summary).unwrap();
    let back = read_summary_csv(&summary).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in back.iter().zip(&rows) {
        assert_eq!((a.seed, &a.controller, a.settling_steps, a.verified), (b.seed, &b.controller, b.settling_steps, b.verified));
        assert_eq!(a.steady_rms, b.steady_rms);
        assert_eq!(a.r_squared, b.r_squared);
    }
}

#[test]
fn short_horizon_dataset_is_rejected() {
    let cfg = ExperimentConfig { t_data: 40, ..Default::default() };
    let plant = build_plant(&cfg).unwrap();
    assert!(offline_phase(&plant, &cfg, 0).is_err());
    let traj = inno_deepc::microgrid::collect_data(&plant, &ExperimentConfig::default(), 0).unwrap().trajectory;
    assert!(estimate_dataset_innovations(&traj.truncated(16, 1), 15, 2).is_err());
}

#[test]
fn shipped_config_matches_defaults() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/microgrid.cfg");
    let cfg = ExperimentConfig::load(path).unwrap();
    assert_eq!(cfg.to_text(), ExperimentConfig::default().to_text());
}
