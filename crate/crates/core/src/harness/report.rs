//! Report persistence: the trial CSV, sweep CSV, and per-step trace CSV.
//!
//! All numbers are written with Rust's shortest round-trip float formatting
//! and rows are emitted in trial order, so identical runs produce identical
//! bytes regardless of worker count.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{SweepSeries, TraceRow, TrialRecord};

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the per-trial report CSV with the columns
/// `run_id,algorithm,source,seed,n,m,alg_welfare,opt,opt_exact,ratio`.
pub fn write_trials_csv<W: Write>(mut w: W, records: &[TrialRecord]) -> io::Result<()> {
    writeln!(
        w,
        "run_id,algorithm,source,seed,n,m,alg_welfare,opt,opt_exact,ratio"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.run_id,
            r.algorithm,
            r.source,
            r.seed,
            r.n,
            r.m,
            r.alg_welfare,
            fmt_opt_f64(r.opt),
            fmt_opt_bool(r.opt_exact),
            fmt_opt_f64(r.ratio),
        )?;
    }
    Ok(())
}

/// Writes a sweep series CSV with the columns
/// `size,mean_opt,mean_alg,mean_ratio,ci_half_width,all_exact`.
pub fn write_sweep_csv<W: Write>(mut w: W, series: &SweepSeries) -> io::Result<()> {
    writeln!(
        w,
        "size,mean_opt,mean_alg,mean_ratio,ci_half_width,all_exact"
    )?;
    for p in &series.points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            p.size, p.mean_opt, p.mean_alg, p.mean_ratio, p.ci_half_width, p.all_exact
        )?;
    }
    Ok(())
}

/// Writes the per-step trace CSV with the columns
/// `j,agent,score_1..score_n,welfare_so_far`.
pub fn write_trace_csv<W: Write>(mut w: W, n: usize, rows: &[TraceRow]) -> io::Result<()> {
    let score_cols: Vec<String> = (1..=n).map(|i| format!("score_{i}")).collect();
    writeln!(w, "j,agent,{},welfare_so_far", score_cols.join(","))?;
    for row in rows {
        let scores: Vec<String> = row.scores.iter().map(|s| s.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{}",
            row.j,
            row.agent,
            scores.join(","),
            row.welfare_so_far
        )?;
    }
    Ok(())
}

pub fn write_trials_csv_file<P: AsRef<Path>>(path: P, records: &[TrialRecord]) -> io::Result<()> {
    write_trials_csv(fs::File::create(path)?, records)
}

pub fn write_sweep_csv_file<P: AsRef<Path>>(path: P, series: &SweepSeries) -> io::Result<()> {
    write_sweep_csv(fs::File::create(path)?, series)
}

pub fn write_trace_csv_file<P: AsRef<Path>>(
    path: P,
    n: usize,
    rows: &[TraceRow],
) -> io::Result<()> {
    write_trace_csv(fs::File::create(path)?, n, rows)
}

/// Serializes any summary as pretty JSON with a trailing newline.
pub fn write_summary_json<W: Write, T: serde::Serialize>(mut w: W, summary: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w)
}

pub fn write_summary_json_file<P: AsRef<Path>, T: serde::Serialize>(
    path: P,
    summary: &T,
) -> io::Result<()> {
    write_summary_json(fs::File::create(path)?, summary)
}
