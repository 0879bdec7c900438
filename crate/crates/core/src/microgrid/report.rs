use std::fmt::Write as _;
use std::path::Path;

use crate::control::{ClosedLoopTrace, StepRecord};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::microgrid::metrics::median;
use crate::microgrid::{ExperimentReport, CONTROLLER_NAMES};

fn push_vec(rec: &mut Vec<String>, v: &Vector) {
    rec.extend(v.iter().map(|x| x.to_string()));
}

fn header(m: usize, p: usize) -> Vec<String> {
    let mut h = vec!["controller".to_string(), "k".into(), "t".into()];
    h.extend((1..=m).map(|i| format!("u{i}")));
    for prefix in ["y", "r", "yhat", "e"] {
        h.extend((1..=p).map(|i| format!("{prefix}{i}")));
    }
    h
}

/// Per-step CSV `controller, k, t, u.., y.., r.., yhat.., e..`. `k` counts
/// from the start of the warm-up, so the first control step is `k = L_p`.
pub fn write_steps_csv(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let first = report.runs.first().and_then(|r| r.trace.records.first());
    let (m, p) = first.map(|r| (r.u.len(), r.y.len())).unwrap_or((2, 3));
    w.write_record(header(m, p))?;
    for run in &report.runs {
        for r in &run.trace.records {
            let k = report.l_p + r.k;
            let mut rec = vec![run.trace.controller.clone(), k.to_string(), (k as f64 * report.h).to_string()];
            for v in [&r.u, &r.y, &r.reference, &r.y_hat, &r.e] {
                push_vec(&mut rec, v);
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a per-step CSV back into one trace per controller (in order of
/// first appearance). `k` is shifted back by `l_p`; fields not stored in the
/// file (`y_clean`, QP statistics) are filled with `y` and zeros.
pub fn read_steps_csv(path: impl AsRef<Path>, l_p: usize) -> Result<Vec<ClosedLoopTrace>> {
    let mut r = csv::Reader::from_path(path)?;
    let h = r.headers()?.clone();
    let count = |prefix: &str| {
        h.iter().filter(|c| c.starts_with(prefix) && c[prefix.len()..].chars().all(|ch| ch.is_ascii_digit())).count()
    };
    let (m, p) = (count("u"), count("y"));
    if h.len() != 3 + m + 4 * p {
        return Err(Error::Parse(format!("unexpected step header with {} columns", h.len())));
    }
    let mut traces: Vec<ClosedLoopTrace> = Vec::new();
    for row in r.records() {
        let row = row?;
        let num = |i: usize| -> Result<f64> {
            row[i].parse().map_err(|_| Error::Parse(format!("bad number '{}' in column {}", &row[i], &h[i])))
        };
        let block = |start: usize, len: usize| -> Result<Vector> {
            Ok(Vector::from_vec((start..start + len).map(num).collect::<Result<Vec<_>>>()?))
        };
        let k: usize = row[1].parse().map_err(|_| Error::Parse(format!("bad step index '{}'", &row[1])))?;
        let y = block(3 + m, p)?;
        let rec = StepRecord {
            k: k.checked_sub(l_p).ok_or_else(|| Error::Parse(format!("step {k} precedes the warm-up end")))?,
            u: block(3, m)?,
            y_clean: y.clone(),
            y,
            reference: block(3 + m + p, p)?,
            y_hat: block(3 + m + 2 * p, p)?,
            e: block(3 + m + 3 * p, p)?,
            qp_iterations: 0,
            softened: false,
        };
        let name = &row[0];
        match traces.iter_mut().find(|t| t.controller == name) {
            Some(t) => t.records.push(rec),
            None => traces.push(ClosedLoopTrace { controller: name.to_string(), records: vec![rec] }),
        }
    }
    Ok(traces)
}

/// One line of the cross-seed summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub seed: u64,
    pub controller: String,
    pub r_squared: Option<f64>,
    pub rms_phase1: f64,
    pub rms_phase2: f64,
    pub steady_rms: f64,
    pub settling_steps: Option<usize>,
    pub max_rel_pred_error: f64,
    pub softened_steps: usize,
    pub snr_db: f64,
    pub verified: bool,
}

const SUMMARY_HEADER: [&str; 11] = [
    "seed",
    "controller",
    "r_squared",
    "rms_phase1",
    "rms_phase2",
    "steady_rms",
    "settling_steps",
    "max_rel_pred_error",
    "softened_steps",
    "snr_db",
    "verified",
];

pub fn summary_rows(report: &ExperimentReport) -> Vec<SummaryRow> {
    report
        .runs
        .iter()
        .map(|run| {
            let m = &run.metrics;
            SummaryRow {
                seed: report.seed,
                controller: run.trace.controller.clone(),
                r_squared: m.r_squared,
                rms_phase1: m.rms_phase[0],
                rms_phase2: m.rms_phase[1],
                steady_rms: m.steady_rms,
                settling_steps: m.settling,
                max_rel_pred_error: m.max_rel_pred_error,
                softened_steps: m.softened_steps,
                snr_db: report.snr_db,
                verified: report.verification.passed(),
            }
        })
        .collect()
}

pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_HEADER)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.controller.clone(),
            opt(r.r_squared.map(|v| v.to_string())),
            r.rms_phase1.to_string(),
            r.rms_phase2.to_string(),
            r.steady_rms.to_string(),
            opt(r.settling_steps.map(|v| v.to_string())),
            r.max_rel_pred_error.to_string(),
            r.softened_steps.to_string(),
            r.snr_db.to_string(),
            r.verified.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(SUMMARY_HEADER) {
        return Err(Error::Parse("not a summary file (header mismatch)".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let bad = |i: usize| Error::Parse(format!("bad value '{}' for {}", &rec[i], SUMMARY_HEADER[i]));
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(i));
        let of = |i: usize| if rec[i].is_empty() { Ok(None) } else { f(i).map(Some) };
        rows.push(SummaryRow {
            seed: rec[0].parse().map_err(|_| bad(0))?,
            controller: rec[1].to_string(),
            r_squared: of(2)?,
            rms_phase1: f(3)?,
            rms_phase2: f(4)?,
            steady_rms: f(5)?,
            settling_steps: if rec[6].is_empty() { None } else { Some(rec[6].parse().map_err(|_| bad(6))?) },
            max_rel_pred_error: f(7)?,
            softened_steps: rec[8].parse().map_err(|_| bad(8))?,
            snr_db: f(9)?,
            verified: rec[10].parse().map_err(|_| bad(10))?,
        });
    }
    Ok(rows)
}

/// Cross-seed statistics of one controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSummary {
    pub controller: String,
    pub seeds: usize,
    pub median_r_squared: Option<f64>,
    pub median_rms_phase1: Option<f64>,
    pub median_rms_phase2: Option<f64>,
    pub median_steady_rms: Option<f64>,
    pub median_settling: Option<f64>,
    /// Seeds that settled after the switch.
    pub settled: usize,
    /// Seeds in which this controller had the lowest steady-state RMS.
    pub steady_wins: usize,
}

pub fn summarize(rows: &[SummaryRow]) -> Vec<ControllerSummary> {
    let mut names: Vec<String> = CONTROLLER_NAMES.iter().map(|s| s.to_string()).collect();
    for r in rows {
        if !names.contains(&r.controller) {
            names.push(r.controller.clone());
        }
    }
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let winner = |seed: u64| {
        rows.iter()
            .filter(|r| r.seed == seed)
            .min_by(|a, b| a.steady_rms.total_cmp(&b.steady_rms))
            .map(|r| r.controller.clone())
    };
    let winners: Vec<Option<String>> = seeds.iter().map(|&s| winner(s)).collect();
    names
        .into_iter()
        .filter_map(|name| {
            let mine: Vec<&SummaryRow> = rows.iter().filter(|r| r.controller == name).collect();
            if mine.is_empty() {
                return None;
            }
            Some(ControllerSummary {
                seeds: mine.len(),
                median_r_squared: median(mine.iter().filter_map(|r| r.r_squared)),
                median_rms_phase1: median(mine.iter().map(|r| r.rms_phase1)),
                median_rms_phase2: median(mine.iter().map(|r| r.rms_phase2)),
                median_steady_rms: median(mine.iter().map(|r| r.steady_rms)),
                median_settling: median(mine.iter().filter_map(|r| r.settling_steps.map(|v| v as f64))),
                settled: mine.iter().filter(|r| r.settling_steps.is_some()).count(),
                steady_wins: winners.iter().filter(|w| w.as_deref() == Some(name.as_str())).count(),
                controller: name,
            })
        })
        .collect()
}

pub fn format_table(summaries: &[ControllerSummary]) -> String {
    let f = |v: Option<f64>, prec: usize| v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "-".into());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>5} {:>8} {:>10} {:>10} {:>10} {:>9} {:>8} {:>6}",
        "controller", "seeds", "R2", "rms_ph1", "rms_ph2", "steady", "settling", "settled", "wins"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:>8} {:>10} {:>10} {:>10} {:>9} {:>8} {:>6}",
            s.controller,
            s.seeds,
            f(s.median_r_squared, 4),
            f(s.median_rms_phase1, 4),
            f(s.median_rms_phase2, 4),
            f(s.median_steady_rms, 4),
            f(s.median_settling, 1),
            format!("{}/{}", s.settled, s.seeds),
            s.steady_wins
        );
    }
    out
}

const COLORS: [&str; 3] = ["#1f5fbf", "#c0392b", "#d4a017"];
const DASHES: [&str; 3] = ["", "6,3", "8,3,2,3"];

struct Panel<'a> {
    title: &'a str,
    series: Vec<(usize, Vec<f64>)>,
    reference: Vec<Vec<f64>>,
}

fn polyline(out: &mut String, xs: &[f64], ys: &[f64], map: &dyn Fn(f64, f64) -> (f64, f64), style: &str) {
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| y.is_finite())
        .map(|(x, y)| {
            let (px, py) = map(*x, *y);
            format!("{px:.1},{py:.1}")
        })
        .collect();
    let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, pts.join(" "));
}

/// Three stacked panels (outputs with references, inputs, prediction-error
/// norm) with one colour and dash pattern per controller.
pub fn render_svg(report: &ExperimentReport) -> String {
    let (width, panel_h, margin) = (900.0, 220.0, 60.0);
    let height = 3.0 * (panel_h + margin) + margin;
    let t_of = |r: &StepRecord| (report.l_p + r.k) as f64 * report.h;
    let times: Vec<f64> = report.runs.first().map(|r| r.trace.records.iter().map(t_of).collect()).unwrap_or_default();
    let series = |f: &dyn Fn(&StepRecord) -> Vec<f64>| -> Vec<(usize, Vec<f64>)> {
        let mut s = Vec::new();
        for (ci, run) in report.runs.iter().enumerate() {
            let vals: Vec<Vec<f64>> = run.trace.records.iter().map(f).collect();
            let d = vals.first().map(|v| v.len()).unwrap_or(0);
            for ch in 0..d {
                s.push((ci, vals.iter().map(|v| v[ch]).collect()));
            }
        }
        s
    };
    let reference: Vec<Vec<f64>> = report
        .runs
        .first()
        .map(|run| {
            let p = run.trace.records.first().map(|r| r.reference.len()).unwrap_or(0);
            (0..p).map(|ch| run.trace.records.iter().map(|r| r.reference[ch]).collect()).collect()
        })
        .unwrap_or_default();
    let panels = [
        Panel { title: "outputs [V] and references", series: series(&|r| r.y.iter().copied().collect()), reference },
        Panel { title: "inputs [A]", series: series(&|r| r.u.iter().copied().collect()), reference: Vec::new() },
        Panel { title: "one-step prediction error |y - y_hat| [V]", series: series(&|r| vec![r.e.norm()]), reference: Vec::new() },
    ];
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let t0 = times.first().copied().unwrap_or(0.0);
    let t1 = times.last().copied().unwrap_or(1.0).max(t0 + 1e-9);
    for (pi, panel) in panels.iter().enumerate() {
        let top = margin + pi as f64 * (panel_h + margin);
        let all = panel.series.iter().flat_map(|(_, v)| v.iter()).chain(panel.reference.iter().flatten()).copied();
        let (mut lo, mut hi) = all.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-9 {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        let (x0, x1) = (margin + 20.0, width - 20.0);
        let map = move |t: f64, v: f64| (x0 + (t - t0) / (t1 - t0) * (x1 - x0), top + (hi - v) / (hi - lo) * panel_h);
        let _ = writeln!(out, r#"<text x="{x0}" y="{}" font-weight="bold">{}</text>"#, top - 8.0, panel.title);
        let _ = writeln!(out, r##"<rect x="{x0}" y="{top}" width="{}" height="{panel_h}" fill="none" stroke="#888"/>"##, x1 - x0);
        for (v, anchor) in [(hi, top + 4.0), (lo, top + panel_h)] {
            let _ = writeln!(out, r#"<text x="{}" y="{anchor}" text-anchor="end">{v:.2}</text>"#, x0 - 4.0);
        }
        let switch_t = report.switch_step as f64 * report.h;
        let (sx, _) = map(switch_t, lo);
        let _ = writeln!(out, r##"<line x1="{sx:.1}" y1="{top}" x2="{sx:.1}" y2="{}" stroke="#aaa" stroke-dasharray="2,2"/>"##, top + panel_h);
        for r in &panel.reference {
            polyline(&mut out, &times, r, &map, r##"stroke="#222" stroke-width="1" stroke-dasharray="1,3""##);
        }
        for (ci, vals) in &panel.series {
            let dash = if DASHES[ci % 3].is_empty() { String::new() } else { format!(r#" stroke-dasharray="{}""#, DASHES[ci % 3]) };
            polyline(&mut out, &times, vals, &map, &format!(r#"stroke="{}" stroke-width="1.3"{dash}"#, COLORS[ci % 3]));
        }
        if pi == 2 {
            let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">t [s]</text>"#, (x0 + x1) / 2.0, top + panel_h + 30.0);
            let _ = writeln!(out, r#"<text x="{x0}" y="{}">{t0:.1}</text>"#, top + panel_h + 15.0);
            let _ = writeln!(out, r#"<text x="{x1}" y="{}" text-anchor="end">{t1:.1}</text>"#, top + panel_h + 15.0);
        }
    }
    for (ci, run) in report.runs.iter().enumerate() {
        let y = 20.0;
        let x = margin + 20.0 + ci as f64 * 160.0;
        let _ = writeln!(out, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/>"#, x + 30.0, COLORS[ci % 3]);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x + 36.0, y + 4.0, run.trace.controller);
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `steps_seed{S}.csv`, `verification_seed{S}.txt`,
/// `ranks_seed{S}.csv` and `plot_seed{S}.svg` into `dir`.
pub fn write_report_files(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let s = report.seed;
    write_steps_csv(report, dir.join(format!("steps_seed{s}.csv")))?;
    let mut text = format!("seed {s}\nsnr_db {:.2}\n", report.snr_db);
    text.push_str(&report.verification.summary());
    std::fs::write(dir.join(format!("verification_seed{s}.txt")), text)?;
    report.verification.r_controllability.write_csv(dir.join(format!("ranks_seed{s}.csv")))?;
    std::fs::write(dir.join(format!("plot_seed{s}.svg")), render_svg(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: u64, name: &str, r2: f64, steady: f64) -> SummaryRow {
        SummaryRow {
            seed,
            controller: name.into(),
            r_squared: Some(r2),
            rms_phase1: 1.0,
            rms_phase2: 2.0,
            steady_rms: steady,
            settling_steps: if seed == 0 { None } else { Some(3) },
            max_rel_pred_error: 0.01,
            softened_steps: 0,
            snr_db: 33.0,
            verified: false,
        }
    }

    #[test]
    fn summary_round_trip_and_aggregation() {
        let rows = vec![
            row(0, "inno-deepc", 0.9, 0.1),
            row(0, "spc", 0.8, 0.2),
            row(1, "inno-deepc", 0.7, 0.3),
            row(1, "spc", 0.6, 0.25),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        write_summary_csv(&rows, &path).unwrap();
        assert_eq!(read_summary_csv(&path).unwrap(), rows);
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].controller, "inno-deepc");
        assert!((s[0].median_r_squared.unwrap() - 0.8).abs() < 1e-15);
        assert_eq!((s[0].steady_wins, s[1].steady_wins), (1, 1));
        assert_eq!(s[0].settled, 1);
        assert!(format_table(&s).contains("inno-deepc"));
    }
}
