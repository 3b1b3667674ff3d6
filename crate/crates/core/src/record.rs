//! Persistence: per-step CSV, structured-text summaries and re-analysis of
//! saved runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::clearing::{AuditOutcome, Census, HaltReason, MarketCondition};
use crate::ensemble::{EnsembleSummary, Spread, SweepRow};
use crate::error::{Error, Result};
use crate::sim::{returns_of, Analysis, RunSummary, StepRow};
use crate::stats::{excursions, ExcursionReport, ReturnMode, ReturnStats};

pub const CSV_HEADER: &str = "step,time,underlying,price,condition,halted,jump,jump_size,n_fb_active,n_fs_active,n_tb,n_ts,pareto_lo,pareto_hi,trades,bankruptcies";

/// 17 significant digits; enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn rows_to_csv(rows: &[StepRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 200);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.time),
            fmt_f64(r.underlying),
            fmt_f64(r.price),
            r.condition,
            r.halt.code(),
            u8::from(r.jump.is_some()),
            fmt_f64(r.jump.unwrap_or(0.0)),
            r.census.n_fb,
            r.census.n_fs,
            r.census.n_tb,
            r.census.n_ts,
            fmt_opt(r.pareto_lo),
            fmt_opt(r.pareto_hi),
            r.trades,
            r.bankruptcies
        );
    }
    s
}

pub fn rows_from_csv(text: &str, origin: &str) -> Result<Vec<StepRow>> {
    let bad = |line: usize, message: String| Error::Parse { path: format!("{origin}:{line}"), message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, _)) => return Err(bad(i + 1, "unexpected header".into())),
        None => return Err(bad(0, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 16 {
            return Err(bad(i + 1, format!("expected 16 fields, found {}", f.len())));
        }
        let float = |j: usize| f[j].parse::<f64>().map_err(|_| bad(i + 1, format!("bad number {:?}", f[j])));
        let int = |j: usize| f[j].parse::<usize>().map_err(|_| bad(i + 1, format!("bad count {:?}", f[j])));
        let opt = |j: usize| if f[j].is_empty() { Ok(None) } else { float(j).map(Some) };
        let jump = match f[6] {
            "0" => None,
            "1" => Some(float(7)?),
            other => return Err(bad(i + 1, format!("bad jump flag {other:?}"))),
        };
        rows.push(StepRow {
            step: int(0)?,
            time: float(1)?,
            underlying: float(2)?,
            price: float(3)?,
            condition: f[4].parse().map_err(|e: Error| bad(i + 1, e.to_string()))?,
            halt: HaltReason::from_code(f[5].parse().map_err(|_| bad(i + 1, "bad halt code".into()))?)
                .map_err(|e| bad(i + 1, e.to_string()))?,
            jump,
            census: Census { n_fb: int(8)?, n_fs: int(9)?, n_tb: int(10)?, n_ts: int(11)? },
            pareto_lo: opt(12)?,
            pareto_hi: opt(13)?,
            trades: int(14)?,
            bankruptcies: int(15)?,
        });
    }
    if rows.is_empty() {
        return Err(bad(1, "no data rows".into()));
    }
    Ok(rows)
}

pub fn read_rows(path: &Path) -> Result<Vec<StepRow>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })?;
    rows_from_csv(&text, &path.display().to_string())
}

struct Kv<'a> {
    out: &'a mut String,
    prefix: String,
}

impl Kv<'_> {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{}{key} = {value}", self.prefix);
    }

    fn num(&mut self, key: &str, x: f64) {
        self.put(key, fmt_f64(x));
    }
}

fn write_returns(kv: &mut Kv<'_>, mode: ReturnMode, r: &ReturnStats) {
    kv.put("stats.returns", mode.as_str());
    kv.put("stats.n", r.n);
    kv.num("stats.mean", r.mean);
    kv.num("stats.sd", r.sd);
    kv.num("stats.skewness", r.skewness);
    kv.num("stats.excess_kurtosis", r.excess_kurtosis);
    kv.num("stats.jb_statistic", r.jb_statistic);
    kv.num("stats.jb_p_value", r.jb_p_value);
    kv.num("stats.tail3_frequency", r.tail3_frequency);
    kv.num("stats.tail3_benchmark", r.tail3_benchmark);
}

fn write_excursions(kv: &mut Kv<'_>, e: &ExcursionReport) {
    kv.put("excursions.n_bubbles", e.n_bubbles);
    kv.put("excursions.n_depressions", e.n_depressions);
    kv.put("excursions.max_duration", e.max_duration());
    kv.put("excursions.durations", e.durations.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","));
    kv.num("excursions.time_fraction_outside", e.time_fraction_outside);
    kv.put("excursions.n_jumps", e.n_jumps);
    kv.num("excursions.max_abs_jump", e.max_abs_jump());
    kv.put("excursions.jump_sizes", e.jump_sizes.iter().map(|&j| fmt_f64(j)).collect::<Vec<_>>().join(","));
}

/// The `stats.*` and `excursions.*` sections, which `analyze` reproduces.
pub fn render_analysis(a: &Analysis, prefix: &str) -> String {
    let mut out = String::new();
    let mut kv = Kv { out: &mut out, prefix: prefix.to_string() };
    write_returns(&mut kv, a.mode, &a.returns);
    write_excursions(&mut kv, &a.excursions);
    out
}

pub fn render_summary(s: &RunSummary) -> String {
    let mut out = String::new();
    {
        let mut kv = Kv { out: &mut out, prefix: String::new() };
        kv.put("run.seed", s.seed);
        kv.put("run.config_hash", format!("{:016x}", s.config_hash));
        kv.put("run.n_steps", s.n_steps);
        kv.num("run.opening_price", s.opening_price);
        kv.num("run.final_price", s.final_price);
        kv.put("run.halted_steps", s.halted_steps);
        kv.put("run.trades", s.total_trades);
        kv.put("run.bankruptcies", s.total_bankruptcies);
        kv.num("run.cash_drift", s.cash_drift);
        kv.put("audit.count", s.audits.len());
        for (i, a) in s.audits.iter().enumerate() {
            kv.put(&format!("audit.{i}.pair"), &a.pair);
            match a.outcome {
                AuditOutcome::NotApplicable => kv.put(&format!("audit.{i}.status"), "not_applicable"),
                AuditOutcome::Checked { steps, max_reservation_gap, max_price_gap } => {
                    kv.put(&format!("audit.{i}.status"), "checked");
                    kv.put(&format!("audit.{i}.steps"), steps);
                    kv.num(&format!("audit.{i}.max_reservation_gap"), max_reservation_gap);
                    kv.num(&format!("audit.{i}.max_price_gap"), max_price_gap);
                }
            }
        }
    }
    out.push_str(&render_analysis(&s.analysis, ""));
    out
}

fn write_spread(kv: &mut Kv<'_>, key: &str, s: &Spread) {
    kv.num(&format!("{key}.mean"), s.mean);
    kv.num(&format!("{key}.sd"), s.sd);
    kv.num(&format!("{key}.min"), s.min);
    kv.num(&format!("{key}.max"), s.max);
}

pub fn render_ensemble_summary(s: &EnsembleSummary, mode: ReturnMode) -> String {
    let mut out = String::new();
    let mut kv = Kv { out: &mut out, prefix: String::new() };
    kv.put("ensemble.runs", s.n_runs);
    kv.put("ensemble.config_hash", format!("{:016x}", s.config_hash));
    kv.put("ensemble.runs_with_excursion", s.runs_with_excursion);
    kv.put("ensemble.total_bubbles", s.total_bubbles);
    kv.put("ensemble.total_depressions", s.total_depressions);
    kv.put("ensemble.total_jumps", s.total_jumps);
    kv.put("ensemble.total_halted", s.total_halted);
    write_spread(&mut kv, "ensemble.time_fraction_outside", &s.time_fraction_outside);
    write_spread(&mut kv, "ensemble.kurtosis", &s.kurtosis);
    write_spread(&mut kv, "ensemble.final_price", &s.final_price);
    kv.num("ensemble.jb_rejection_rate", s.jb_rejection_rate);
    kv.prefix = "pooled.".into();
    write_returns(&mut kv, mode, &s.pooled);
    kv.prefix = String::new();
    if let Some(v) = &s.variance {
        kv.put("variance.times", v.times.iter().map(|&t| fmt_f64(t)).collect::<Vec<_>>().join(","));
        kv.put("variance.values", v.variances.iter().map(|&t| fmt_f64(t)).collect::<Vec<_>>().join(","));
        kv.num("variance.slope", v.slope);
        kv.num("variance.r_squared", v.r_squared);
    }
    out
}

pub const SWEEP_HEADER: &str = "value,runs,runs_with_excursion,mean_time_fraction_outside,total_jumps,mean_kurtosis,jb_rejection_rate,pooled_kurtosis,pooled_jb_p_value";

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let e = &r.summary;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.value,
            e.n_runs,
            e.runs_with_excursion,
            fmt_f64(e.time_fraction_outside.mean),
            e.total_jumps,
            fmt_f64(e.kurtosis.mean),
            fmt_f64(e.jb_rejection_rate),
            fmt_f64(e.pooled.excess_kurtosis),
            fmt_f64(e.pooled.jb_p_value)
        );
    }
    s
}

/// Merges per-run excursion reports as if the runs were one long record.
fn pool_excursions(reports: &[(ExcursionReport, usize)]) -> ExcursionReport {
    let mut out = ExcursionReport::default();
    let mut outside = 0.0;
    let mut total = 0usize;
    for (r, n) in reports {
        out.n_bubbles += r.n_bubbles;
        out.n_depressions += r.n_depressions;
        out.durations.extend(&r.durations);
        out.n_jumps += r.n_jumps;
        out.jump_sizes.extend(&r.jump_sizes);
        outside += r.durations.iter().sum::<usize>() as f64;
        total += n;
    }
    out.time_fraction_outside = if total == 0 { 0.0 } else { outside / total as f64 };
    out
}

/// Recomputes the statistics of each saved run and of all runs pooled.
/// Returns across run boundaries are never formed.
pub fn analyze(inputs: &[(String, Vec<StepRow>)], mode: ReturnMode) -> Result<String> {
    if inputs.is_empty() {
        return Err(Error::invalid("analyze needs at least one input"));
    }
    let mut out = String::new();
    let _ = writeln!(out, "input.count = {}", inputs.len());
    let mut pooled_returns = Vec::new();
    let mut reports = Vec::new();
    for (i, (name, rows)) in inputs.iter().enumerate() {
        let a = Analysis::of_rows(rows, mode)?;
        let _ = writeln!(out, "input.{i}.path = {name}");
        let _ = writeln!(out, "input.{i}.rows = {}", rows.len());
        out.push_str(&render_analysis(&a, &format!("input.{i}.")));
        pooled_returns.extend(returns_of(rows, mode)?.diffs);
        let conditions: Vec<MarketCondition> = rows.iter().map(|r| r.condition).collect();
        let jumps: Vec<Option<f64>> = rows.iter().map(|r| r.jump).collect();
        reports.push((excursions(&conditions, &jumps)?, rows.len()));
    }
    let pooled = Analysis { mode, returns: ReturnStats::of(&pooled_returns), excursions: pool_excursions(&reports) };
    out.push_str(&render_analysis(&pooled, "pooled."));
    Ok(out)
}

/// `(key, value)` pairs of a rendered summary, in order.
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines().filter_map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string()))).collect()
}
