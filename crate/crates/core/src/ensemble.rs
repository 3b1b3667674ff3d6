//! Independent replications and parameter sweeps.

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::rng::{self, purpose};
use crate::sim::{returns_of, run_simulation, RunRecord};
use crate::stats::{variance_growth, ReturnStats, VarianceGrowth};

/// Seed of run `index` in an ensemble with master seed `master`.
pub fn run_seed(master: u64, index: usize) -> u64 {
    rng::derive_path(master, &[purpose::RUNS, index as u64])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Spread {
    pub fn of(xs: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = xs.filter(|x| x.is_finite()).collect();
        let count = v.len();
        if count == 0 {
            return Spread { mean: f64::NAN, sd: f64::NAN, min: f64::NAN, max: f64::NAN, count };
        }
        let mean = v.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Spread { mean, sd, min, max, count }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub n_runs: usize,
    pub config_hash: u64,
    pub runs_with_excursion: usize,
    pub total_bubbles: usize,
    pub total_depressions: usize,
    pub total_jumps: usize,
    pub total_halted: usize,
    pub time_fraction_outside: Spread,
    pub kurtosis: Spread,
    pub final_price: Spread,
    /// Share of runs whose Jarque-Bera p-value is below 1%, among runs where
    /// the test is defined.
    pub jb_rejection_rate: f64,
    pub pooled: ReturnStats,
    /// Across-run price variance at the quartile steps; `None` for a single
    /// run.
    pub variance: Option<VarianceGrowth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub runs: Vec<RunRecord>,
    pub summary: EnsembleSummary,
}

/// Quartile checkpoints `n/4, n/2, 3n/4, n-1` of an `n`-row run.
pub fn quartile_steps(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [n / 4, n / 2, 3 * n / 4, n.saturating_sub(1)].into_iter().filter(|&k| k > 0).collect();
    v.dedup();
    v
}

pub fn summarize(cfg: &RunConfig, runs: &[RunRecord]) -> Result<EnsembleSummary> {
    if runs.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let ex = |r: &RunRecord| r.summary.analysis.excursions.clone();
    let mut pooled = Vec::new();
    for r in runs {
        pooled.extend(returns_of(&r.rows, cfg.returns)?.diffs);
    }
    let jb: Vec<f64> = runs.iter().map(|r| r.summary.analysis.returns.jb_p_value).filter(|p| p.is_finite()).collect();
    let variance = if runs.len() >= 2 {
        let paths: Vec<Vec<f64>> = runs.iter().map(|r| r.rows.iter().map(|row| row.price).collect()).collect();
        let steps = quartile_steps(cfg.n_steps);
        let dt = cfg.horizon / cfg.n_steps as f64;
        let times: Vec<f64> = steps.iter().map(|&k| k as f64 * dt).collect();
        variance_growth(&paths, &steps, &times).ok()
    } else {
        None
    };
    Ok(EnsembleSummary {
        n_runs: runs.len(),
        config_hash: cfg.hash(),
        runs_with_excursion: runs.iter().filter(|r| ex(r).n_bubbles + ex(r).n_depressions > 0).count(),
        total_bubbles: runs.iter().map(|r| ex(r).n_bubbles).sum(),
        total_depressions: runs.iter().map(|r| ex(r).n_depressions).sum(),
        total_jumps: runs.iter().map(|r| ex(r).n_jumps).sum(),
        total_halted: runs.iter().map(|r| r.summary.halted_steps).sum(),
        time_fraction_outside: Spread::of(runs.iter().map(|r| ex(r).time_fraction_outside)),
        kurtosis: Spread::of(runs.iter().map(|r| r.summary.analysis.returns.excess_kurtosis)),
        final_price: Spread::of(runs.iter().map(|r| r.summary.final_price)),
        jb_rejection_rate: if jb.is_empty() {
            f64::NAN
        } else {
            jb.iter().filter(|&&p| p < 0.01).count() as f64 / jb.len() as f64
        },
        pooled: ReturnStats::of(&pooled),
        variance,
    })
}

/// Runs `n_runs` replications in parallel. Run `i` uses
/// [`run_seed`]`(cfg.seed, i)`; results are ordered by run index whatever
/// the schedule.
pub fn run_ensemble(cfg: &RunConfig, n_runs: usize) -> Result<EnsembleRecord> {
    if n_runs == 0 {
        return Err(Error::invalid("an ensemble needs at least one run"));
    }
    cfg.validate()?;
    let runs: Vec<RunRecord> =
        (0..n_runs).into_par_iter().map(|i| run_simulation(cfg, run_seed(cfg.seed, i))).collect::<Result<_>>()?;
    let summary = summarize(cfg, &runs)?;
    Ok(EnsembleRecord { runs, summary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub summary: EnsembleSummary,
}

/// One ensemble of `cfg.ensemble_runs` runs per value of `param`.
pub fn sweep(cfg: &RunConfig, param: &str, values: &[String]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set(param, v)?;
            c.validate()?;
            let e = run_ensemble(&c, c.ensemble_runs)?;
            Ok(SweepRow { value: v.clone(), summary: e.summary })
        })
        .collect()
}
