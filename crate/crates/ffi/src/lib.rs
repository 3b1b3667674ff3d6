//! C interface to the simulator.
//!
//! Symbols are prefixed `rnv_`. Every fallible function returns an
//! [`RnvStatus`]; on failure a message is kept per thread and can be read
//! with [`rnv_last_error`]. Configurations and run records are opaque
//! handles that the caller releases with the matching `_free` function.
//!
//! Handles are not synchronized. A handle may move between threads but must
//! not be used from two threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rnvsim_core::clearing::MarketCondition;
use rnvsim_core::config::RunConfig;
use rnvsim_core::record::{render_summary, rows_to_csv};
use rnvsim_core::sim::{run_simulation, RunRecord};
use rnvsim_core::stats;
use rnvsim_core::stochastic::{girsanov_check, TimeGrid, UnderlyingModel};
use rnvsim_core::Error;

/// Result codes. Validation and numerical failures use the same values as
/// the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RnvStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8 or an out-of-range index.
    InvalidArgument = 1,
    Validation = 2,
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// Market condition of a step, matching the CSV labels.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RnvCondition {
    NonSpeculative = 0,
    Normal = 1,
    Bubble = 2,
    Depression = 3,
    Halted = 4,
}

impl From<MarketCondition> for RnvCondition {
    fn from(c: MarketCondition) -> Self {
        match c {
            MarketCondition::NonSpeculative => RnvCondition::NonSpeculative,
            MarketCondition::Normal => RnvCondition::Normal,
            MarketCondition::Bubble => RnvCondition::Bubble,
            MarketCondition::Depression => RnvCondition::Depression,
            MarketCondition::Halted => RnvCondition::Halted,
        }
    }
}

/// One row of a run. Absent Pareto bounds are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnvStepRow {
    pub step: usize,
    pub time: f64,
    pub underlying: f64,
    pub price: f64,
    pub condition: RnvCondition,
    pub halt_code: u8,
    pub jump: bool,
    pub jump_size: f64,
    pub n_fb_active: usize,
    pub n_fs_active: usize,
    pub n_tb: usize,
    pub n_ts: usize,
    pub pareto_lo: f64,
    pub pareto_hi: f64,
    pub trades: usize,
    pub bankruptcies: usize,
}

/// Headline statistics of a run. Undefined moments are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnvRunSummary {
    pub seed: u64,
    pub config_hash: u64,
    pub n_steps: usize,
    pub halted_steps: usize,
    pub total_trades: usize,
    pub total_bankruptcies: usize,
    pub final_price: f64,
    pub n_bubbles: usize,
    pub n_depressions: usize,
    pub n_jumps: usize,
    pub time_fraction_outside: f64,
    pub excess_kurtosis: f64,
    pub jb_statistic: f64,
    pub jb_p_value: f64,
}

/// Change-of-measure diagnostics at the horizon.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnvGirsanovReport {
    pub novikov: f64,
    pub density_mean: f64,
    pub density_se: f64,
    pub weighted_mean: f64,
    pub weighted_se: f64,
    /// True when every checkpoint passes both checks.
    pub pass: bool,
}

pub struct RnvConfig(RunConfig);

pub struct RnvRun(RunRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> RnvStatus {
    match e {
        Error::Io(_) => RnvStatus::Io,
        _ if e.is_numerical() => RnvStatus::Numerical,
        _ => RnvStatus::Validation,
    }
}

struct Fail(RnvStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(RnvStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RnvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RnvStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RnvStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| invalid(&format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| invalid(&format!("{name} is null")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid("data is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next `rnv_` call on the same thread.
#[no_mangle]
pub extern "C" fn rnv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rnv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Configuration with every field at its default.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rnv_config_default(out: *mut *mut RnvConfig) -> RnvStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(RnvConfig(RunConfig::default())));
        Ok(())
    })
}

/// Parses `key = value` config text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rnv_config_parse(text: *const c_char, out: *mut *mut RnvConfig) -> RnvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = RunConfig::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(RnvConfig(cfg)));
        Ok(())
    })
}

/// Sets one key, as it would be written in a config file.
///
/// # Safety
/// `cfg` must come from this library; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rnv_config_set(cfg: *mut RnvConfig, key: *const c_char, value: *const c_char) -> RnvStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        cfg.0.set(str_arg(key, "key")?, str_arg(value, "value")?)?;
        Ok(())
    })
}

/// Checks the configuration without running it.
///
/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn rnv_config_validate(cfg: *const RnvConfig) -> RnvStatus {
    guard(|| Ok(ref_arg(cfg, "cfg")?.0.validate()?))
}

/// FNV-1a hash of the canonical form.
///
/// # Safety
/// `cfg` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rnv_config_hash(cfg: *const RnvConfig, out: *mut u64) -> RnvStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(cfg, "cfg")?.0.hash();
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn rnv_config_free(cfg: *mut RnvConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs one simulation. The result is owned by the caller.
///
/// # Safety
/// `cfg` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rnv_simulate(cfg: *const RnvConfig, seed: u64, out: *mut *mut RnvRun) -> RnvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let rec = run_simulation(&ref_arg(cfg, "cfg")?.0, seed)?;
        *out = Box::into_raw(Box::new(RnvRun(rec)));
        Ok(())
    })
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `run` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rnv_run_len(run: *const RnvRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `run` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rnv_run_row(run: *const RnvRun, index: usize, out: *mut RnvStepRow) -> RnvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let rows = &ref_arg(run, "run")?.0.rows;
        let r = rows.get(index).ok_or_else(|| invalid(&format!("row {index} of {}", rows.len())))?;
        *out = RnvStepRow {
            step: r.step,
            time: r.time,
            underlying: r.underlying,
            price: r.price,
            condition: r.condition.into(),
            halt_code: r.halt.code(),
            jump: r.jump.is_some(),
            jump_size: r.jump.unwrap_or(0.0),
            n_fb_active: r.census.n_fb,
            n_fs_active: r.census.n_fs,
            n_tb: r.census.n_tb,
            n_ts: r.census.n_ts,
            pareto_lo: r.pareto_lo.unwrap_or(f64::NAN),
            pareto_hi: r.pareto_hi.unwrap_or(f64::NAN),
            trades: r.trades,
            bankruptcies: r.bankruptcies,
        };
        Ok(())
    })
}

/// Copies up to `len` clearing prices into `out` and stores the number
/// copied in `written`.
///
/// # Safety
/// `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rnv_run_prices(
    run: *const RnvRun,
    out: *mut f64,
    len: usize,
    written: *mut usize,
) -> RnvStatus {
    guard(|| {
        let written = out_arg(written, "written")?;
        let rows = &ref_arg(run, "run")?.0.rows;
        let n = rows.len().min(len);
        if n > 0 && out.is_null() {
            return Err(invalid("out is null"));
        }
        for (i, r) in rows.iter().take(n).enumerate() {
            *out.add(i) = r.price;
        }
        *written = n;
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rnv_run_summary(run: *const RnvRun, out: *mut RnvRunSummary) -> RnvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = &ref_arg(run, "run")?.0.summary;
        let (r, e) = (&s.analysis.returns, &s.analysis.excursions);
        *out = RnvRunSummary {
            seed: s.seed,
            config_hash: s.config_hash,
            n_steps: s.n_steps,
            halted_steps: s.halted_steps,
            total_trades: s.total_trades,
            total_bankruptcies: s.total_bankruptcies,
            final_price: s.final_price,
            n_bubbles: e.n_bubbles,
            n_depressions: e.n_depressions,
            n_jumps: e.n_jumps,
            time_fraction_outside: e.time_fraction_outside,
            excess_kurtosis: r.excess_kurtosis,
            jb_statistic: r.jb_statistic,
            jb_p_value: r.jb_p_value,
        };
        Ok(())
    })
}

/// Writes the per-step CSV and, if `summary_path` is not null, the text
/// summary.
///
/// # Safety
/// Paths must be NUL-terminated; `summary_path` may be null.
#[no_mangle]
pub unsafe extern "C" fn rnv_run_write(
    run: *const RnvRun,
    csv_path: *const c_char,
    summary_path: *const c_char,
) -> RnvStatus {
    guard(|| {
        let rec = &ref_arg(run, "run")?.0;
        let csv = str_arg(csv_path, "csv_path")?;
        std::fs::write(Path::new(csv), rows_to_csv(&rec.rows))
            .map_err(|e| Fail(RnvStatus::Io, format!("{csv}: {e}")))?;
        if !summary_path.is_null() {
            let p = str_arg(summary_path, "summary_path")?;
            std::fs::write(Path::new(p), render_summary(&rec.summary))
                .map_err(|e| Fail(RnvStatus::Io, format!("{p}: {e}")))?;
        }
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn rnv_run_free(run: *mut RnvRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Population excess kurtosis. Fails with `Validation` below 8 samples and
/// `Numerical` for constant data.
///
/// # Safety
/// `data` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rnv_excess_kurtosis(data: *const f64, len: usize, out: *mut f64) -> RnvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = stats::excess_kurtosis(slice_arg(data, len)?)?;
        Ok(())
    })
}

/// Jarque-Bera statistic and its chi-square(2) p-value.
///
/// # Safety
/// `data` must point to `len` doubles; outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rnv_jarque_bera(
    data: *const f64,
    len: usize,
    statistic: *mut f64,
    p_value: *mut f64,
) -> RnvStatus {
    guard(|| {
        let statistic = out_arg(statistic, "statistic")?;
        let p_value = out_arg(p_value, "p_value")?;
        let jb = stats::jarque_bera(slice_arg(data, len)?)?;
        *statistic = jb.statistic;
        *p_value = jb.p_value;
        Ok(())
    })
}

/// Simulates `z0 + sigma B + drift t` with unit horizon and reweights by the
/// stochastic exponential of `-h B`. Checkpoints are the midpoint and the
/// horizon; the report describes the horizon.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rnv_girsanov_check(
    z0: f64,
    drift: f64,
    sigma: f64,
    h: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    out: *mut RnvGirsanovReport,
) -> RnvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let grid = TimeGrid::new(1.0, n_steps)?;
        let model = UnderlyingModel::new(z0, drift, sigma)?;
        let mut checkpoints = vec![n_steps / 2, n_steps];
        checkpoints.retain(|&k| k > 0);
        checkpoints.dedup();
        let r = girsanov_check(&grid, &model, h, n_paths, seed, &checkpoints)?;
        let end = r.checkpoints.last().expect("at least one checkpoint");
        *out = RnvGirsanovReport {
            novikov: r.novikov,
            density_mean: end.density_mean,
            density_se: end.density_se,
            weighted_mean: end.weighted_mean,
            weighted_se: end.weighted_se,
            pass: r.all_pass(),
        };
        Ok(())
    })
}
