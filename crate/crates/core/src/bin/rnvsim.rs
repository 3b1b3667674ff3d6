use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rnvsim_core::config::RunConfig;
use rnvsim_core::ensemble::{run_ensemble, sweep};
use rnvsim_core::record::{
    analyze, fmt_f64, read_rows, render_ensemble_summary, render_summary, rows_to_csv, sweep_to_csv,
};
use rnvsim_core::sim::run_simulation;
use rnvsim_core::stats::ReturnMode;
use rnvsim_core::stochastic::{girsanov_check, TimeGrid, UnderlyingModel};
use rnvsim_core::{Error, Result};

#[derive(Parser)]
#[command(name = "rnvsim", version, about = "Heterogeneous-trader market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write run.csv, summary.txt and config.txt.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `run.seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to `run.output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run independent replications with seeds derived from the master seed.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `ensemble.runs` from the config.
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One ensemble per value of a config key; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated list of values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute statistics from saved run CSVs.
    Analyze {
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// `diff` or `log_diff`.
        #[arg(long, default_value = "diff")]
        returns: String,
    },
    /// Monte Carlo check of the change of measure that removes the drift.
    GirsanovCheck {
        #[arg(long)]
        drift: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        z0: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
    },
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::invalid("no output directory: pass --out or set run.output_dir"))?;
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}

fn parse_mode(s: &str) -> Result<ReturnMode> {
    match s {
        "diff" => Ok(ReturnMode::Diff),
        "log_diff" | "log-diff" => Ok(ReturnMode::LogDiff),
        other => Err(Error::invalid(format!("unknown returns mode {other:?}"))),
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, seed, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let dir = out_dir(out, &cfg)?;
            let rec = run_simulation(&cfg, cfg.seed)?;
            write(&dir.join("config.txt"), &cfg.canonical())?;
            write(&dir.join("run.csv"), &rows_to_csv(&rec.rows))?;
            write(&dir.join("summary.txt"), &render_summary(&rec.summary))?;
        }
        Command::Ensemble { config, runs, out } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate()?;
            let dir = out_dir(out, &cfg)?;
            let e = run_ensemble(&cfg, runs.unwrap_or(cfg.ensemble_runs))?;
            write(&dir.join("config.txt"), &cfg.canonical())?;
            for (i, r) in e.runs.iter().enumerate() {
                write(&dir.join(format!("run_{i:04}.csv")), &rows_to_csv(&r.rows))?;
                write(&dir.join(format!("summary_{i:04}.txt")), &render_summary(&r.summary))?;
            }
            write(&dir.join("ensemble_summary.txt"), &render_ensemble_summary(&e.summary, cfg.returns))?;
        }
        Command::Sweep { config, param, values, out } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate()?;
            let dir = out_dir(out, &cfg)?;
            let rows = sweep(&cfg, &param, &values)?;
            write(&dir.join("config.txt"), &cfg.canonical())?;
            write(&dir.join("sweep.csv"), &sweep_to_csv(&rows))?;
        }
        Command::Analyze { inputs, out, returns } => {
            let mode = parse_mode(&returns)?;
            let loaded =
                inputs.iter().map(|p| Ok((p.display().to_string(), read_rows(p)?))).collect::<Result<Vec<_>>>()?;
            write(&out, &analyze(&loaded, mode)?)?;
        }
        Command::GirsanovCheck { drift, h, paths, steps, seed, z0, sigma, horizon } => {
            let grid = TimeGrid::new(horizon, steps)?;
            let model = UnderlyingModel::new(z0, drift, sigma)?;
            let mut checkpoints = vec![steps / 2, steps];
            checkpoints.retain(|&k| k > 0);
            checkpoints.dedup();
            let r = girsanov_check(&grid, &model, h, paths, seed, &checkpoints)?;
            println!("girsanov.paths = {}", r.n_paths);
            println!("girsanov.novikov = {}", fmt_f64(r.novikov));
            for c in &r.checkpoints {
                let p = format!("girsanov.step_{}", c.step);
                println!("{p}.time = {}", fmt_f64(c.time));
                println!("{p}.density_mean = {}", fmt_f64(c.density_mean));
                println!("{p}.density_se = {}", fmt_f64(c.density_se));
                println!("{p}.density_is_martingale = {}", c.density_is_martingale);
                println!("{p}.weighted_mean = {}", fmt_f64(c.weighted_mean));
                println!("{p}.weighted_se = {}", fmt_f64(c.weighted_se));
                println!("{p}.drift_removed = {}", c.drift_removed);
            }
            println!("girsanov.pass = {}", r.all_pass());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rnvsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
