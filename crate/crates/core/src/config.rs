//! Run configuration: a flat `key = value` file with dotted section keys.
//!
//! ```text
//! # comment
//! grid.n_steps = 1000
//! securities = forward(0); call(10); steps(500:1:-10:floor)
//! audit.pairs = call(10) - put(10) == forward(10)
//! ```
//!
//! Unknown keys are rejected. Every key has a default, so an empty file is a
//! valid configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::agents::{FundamentalSide, FundamentalTrader, SwitchProbs, TechnicalTrader, UtilityFn};
use crate::clearing::ClearingParams;
use crate::error::{Error, Result};
use crate::rng::{self, purpose};
use crate::securities::{Bundle, SecurityKind, SecuritySpec, StepPayment};
use crate::stats::ReturnMode;
use crate::stochastic::{TimeGrid, UnderlyingModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityFamily {
    Linear,
    Cara,
    Crra,
}

impl UtilityFamily {
    fn as_str(self) -> &'static str {
        match self {
            UtilityFamily::Linear => "linear",
            UtilityFamily::Cara => "cara",
            UtilityFamily::Crra => "crra",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub horizon: f64,
    pub n_steps: usize,
    pub z0: f64,
    pub drift: f64,
    pub sigma: f64,
    /// Security declarations, whitespace stripped.
    pub securities: Vec<String>,
    /// Index into `securities` of the security the market trades.
    pub market_security: usize,
    pub n_fb: usize,
    pub n_fs: usize,
    pub utility: UtilityFamily,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub wealth_floor: f64,
    pub fb_cash: f64,
    pub fs_cash: f64,
    pub fb_holdings: f64,
    pub fs_holdings: f64,
    pub n_technical: usize,
    pub epsilon: f64,
    pub p_buy: f64,
    pub p_sell: f64,
    pub p_idle: f64,
    pub technical_cash: f64,
    pub kappa: f64,
    pub scenarios: usize,
    /// Master seed: population draws and ensemble run seeds derive from it.
    pub seed: u64,
    pub returns: ReturnMode,
    pub ensemble_runs: usize,
    /// `(left, right)` bundle expressions claimed to be payoff-identical.
    pub audit_pairs: Vec<(String, String)>,
    /// Not part of the canonical form.
    pub output_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            n_steps: 1000,
            z0: 10.0,
            drift: 0.0,
            sigma: 1.0,
            securities: vec!["forward(0)".into()],
            market_security: 0,
            n_fb: 5,
            n_fs: 5,
            utility: UtilityFamily::Cara,
            gamma_min: 0.5,
            gamma_max: 2.0,
            eta_min: 1.0,
            eta_max: 3.0,
            wealth_floor: 100.0,
            fb_cash: 1e6,
            fs_cash: 1e6,
            fb_holdings: 0.0,
            fs_holdings: 2.0,
            n_technical: 0,
            epsilon: 0.01,
            p_buy: 0.45,
            p_sell: 0.45,
            p_idle: 0.1,
            technical_cash: 1000.0,
            kappa: 0.05,
            scenarios: 2000,
            seed: 0,
            returns: ReturnMode::Diff,
            ensemble_runs: 10,
            audit_pairs: Vec::new(),
            output_dir: None,
        }
    }
}

/// Keys in canonical order.
pub const KEYS: &[&str] = &[
    "grid.horizon",
    "grid.n_steps",
    "underlying.z0",
    "underlying.drift",
    "underlying.sigma",
    "securities",
    "market.security",
    "population.n_fb",
    "population.n_fs",
    "population.utility",
    "population.gamma_min",
    "population.gamma_max",
    "population.eta_min",
    "population.eta_max",
    "population.wealth_floor",
    "population.fb_cash",
    "population.fs_cash",
    "population.fb_holdings",
    "population.fs_holdings",
    "technical.count",
    "technical.epsilon",
    "technical.p_buy",
    "technical.p_sell",
    "technical.p_idle",
    "technical.cash",
    "clearing.kappa",
    "scenarios.count",
    "run.seed",
    "run.returns",
    "ensemble.runs",
    "audit.pairs",
];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::invalid(format!("{key}: cannot parse {v:?}")))
}

fn split_list(v: &str) -> Vec<String> {
    v.split(';')
        .map(|s| s.chars().filter(|c| !c.is_whitespace()).collect::<String>())
        .filter(|s| !s.is_empty())
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |message: String| Error::Config { line: i + 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| at(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(at(format!("duplicate key {key}")));
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::InvalidParameter(m) => at(m),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// Sets one key from its textual value. Does not re-validate.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "grid.horizon" => self.horizon = parse_num(key, v)?,
            "grid.n_steps" => self.n_steps = parse_num(key, v)?,
            "underlying.z0" => self.z0 = parse_num(key, v)?,
            "underlying.drift" => self.drift = parse_num(key, v)?,
            "underlying.sigma" => self.sigma = parse_num(key, v)?,
            "securities" => self.securities = split_list(v),
            "market.security" => self.market_security = parse_num(key, v)?,
            "population.n_fb" => self.n_fb = parse_num(key, v)?,
            "population.n_fs" => self.n_fs = parse_num(key, v)?,
            "population.utility" => {
                self.utility = match v {
                    "linear" => UtilityFamily::Linear,
                    "cara" => UtilityFamily::Cara,
                    "crra" => UtilityFamily::Crra,
                    _ => return Err(Error::invalid(format!("{key}: expected linear, cara or crra, got {v:?}"))),
                }
            }
            "population.gamma_min" => self.gamma_min = parse_num(key, v)?,
            "population.gamma_max" => self.gamma_max = parse_num(key, v)?,
            "population.eta_min" => self.eta_min = parse_num(key, v)?,
            "population.eta_max" => self.eta_max = parse_num(key, v)?,
            "population.wealth_floor" => self.wealth_floor = parse_num(key, v)?,
            "population.fb_cash" => self.fb_cash = parse_num(key, v)?,
            "population.fs_cash" => self.fs_cash = parse_num(key, v)?,
            "population.fb_holdings" => self.fb_holdings = parse_num(key, v)?,
            "population.fs_holdings" => self.fs_holdings = parse_num(key, v)?,
            "technical.count" => self.n_technical = parse_num(key, v)?,
            "technical.epsilon" => self.epsilon = parse_num(key, v)?,
            "technical.p_buy" => self.p_buy = parse_num(key, v)?,
            "technical.p_sell" => self.p_sell = parse_num(key, v)?,
            "technical.p_idle" => self.p_idle = parse_num(key, v)?,
            "technical.cash" => self.technical_cash = parse_num(key, v)?,
            "clearing.kappa" => self.kappa = parse_num(key, v)?,
            "scenarios.count" => self.scenarios = parse_num(key, v)?,
            "run.seed" => self.seed = parse_num(key, v)?,
            "run.returns" => {
                self.returns = match v {
                    "diff" => ReturnMode::Diff,
                    "log_diff" => ReturnMode::LogDiff,
                    _ => return Err(Error::invalid(format!("{key}: expected diff or log_diff, got {v:?}"))),
                }
            }
            "run.output_dir" => self.output_dir = Some(v.to_string()),
            "ensemble.runs" => self.ensemble_runs = parse_num(key, v)?,
            "audit.pairs" => {
                self.audit_pairs = split_list(v)
                    .into_iter()
                    .map(|p| {
                        p.split_once("==")
                            .map(|(l, r)| (l.to_string(), r.to_string()))
                            .ok_or_else(|| Error::invalid(format!("{key}: pair {p:?} lacks `==`")))
                    })
                    .collect::<Result<_>>()?
            }
            _ => return Err(Error::invalid(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        self.grid()?;
        self.model()?;
        if self.securities.is_empty() {
            return bad("at least one security is required".into());
        }
        let specs = self.security_specs()?;
        if self.market_security >= specs.len() {
            return bad(format!("market.security {} out of range", self.market_security));
        }
        self.audit_bundles()?;
        if self.n_fb == 0 || self.n_fs == 0 {
            return bad("the market needs at least one fundamental buyer and one seller".into());
        }
        let range_ok = |lo: f64, hi: f64| lo > 0.0 && hi >= lo && hi.is_finite();
        match self.utility {
            UtilityFamily::Linear => {}
            UtilityFamily::Cara if !range_ok(self.gamma_min, self.gamma_max) => {
                return bad(format!("gamma range [{}, {}] invalid", self.gamma_min, self.gamma_max))
            }
            UtilityFamily::Crra
                if !range_ok(self.eta_min, self.eta_max) || self.wealth_floor.is_nan() || self.wealth_floor <= 0.0 =>
            {
                return bad("CRRA eta range or wealth floor invalid".into())
            }
            _ => {}
        }
        for (name, x) in [
            ("fb_cash", self.fb_cash),
            ("fs_cash", self.fs_cash),
            ("fb_holdings", self.fb_holdings),
            ("fs_holdings", self.fs_holdings),
            ("technical.cash", self.technical_cash),
        ] {
            if !x.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("technical.epsilon must be nonnegative, got {}", self.epsilon));
        }
        SwitchProbs::new(self.p_buy, self.p_sell, self.p_idle)?;
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad(format!("clearing.kappa must be nonnegative, got {}", self.kappa));
        }
        if self.scenarios == 0 {
            return bad("scenarios.count must be at least 1".into());
        }
        if self.ensemble_runs == 0 {
            return bad("ensemble.runs must be at least 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.n_steps)
    }

    pub fn model(&self) -> Result<UnderlyingModel> {
        UnderlyingModel::new(self.z0, self.drift, self.sigma)
    }

    pub fn clearing_params(&self) -> ClearingParams {
        ClearingParams { kappa: self.kappa }
    }

    pub fn security_specs(&self) -> Result<Vec<SecuritySpec>> {
        let grid = self.grid()?;
        self.securities
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let spec = parse_security(s, i as u32, self.n_steps)?;
                spec.validate(&grid)?;
                Ok(spec)
            })
            .collect()
    }

    pub fn market_spec(&self) -> Result<SecuritySpec> {
        Ok(self.security_specs()?.swap_remove(self.market_security))
    }

    pub fn audit_bundles(&self) -> Result<Vec<(Bundle, Bundle)>> {
        let grid = self.grid()?;
        self.audit_pairs
            .iter()
            .map(|(l, r)| {
                let (l, r) = (parse_bundle(l, self.n_steps)?, parse_bundle(r, self.n_steps)?);
                for (_, s) in l.legs.iter().chain(&r.legs) {
                    s.validate(&grid)?;
                }
                Ok((l, r))
            })
            .collect()
    }

    /// Technical traders are instantiated only when epsilon is positive.
    pub fn active_technicals(&self) -> usize {
        if self.epsilon > 0.0 {
            self.n_technical
        } else {
            0
        }
    }

    /// Fundamental traders with ids `0..n_fb` (buyers) then `n_fb..n_fb+n_fs`
    /// (sellers), risk parameters drawn uniformly from the configured range
    /// with the master seed. Technical traders follow.
    pub fn population(&self) -> Result<(Vec<FundamentalTrader>, Vec<TechnicalTrader>)> {
        use rand::Rng;
        let mut r = rng::stream(self.seed, purpose::POPULATION);
        let mut fundamentals = Vec::with_capacity(self.n_fb + self.n_fs);
        for id in 0..self.n_fb + self.n_fs {
            let u: f64 = r.random();
            let utility = match self.utility {
                UtilityFamily::Linear => UtilityFn::Linear,
                UtilityFamily::Cara => UtilityFn::cara(self.gamma_min + (self.gamma_max - self.gamma_min) * u)?,
                UtilityFamily::Crra => {
                    UtilityFn::crra(self.eta_min + (self.eta_max - self.eta_min) * u, self.wealth_floor)?
                }
            };
            let (side, cash, holdings) = if id < self.n_fb {
                (FundamentalSide::Buyer, self.fb_cash, self.fb_holdings)
            } else {
                (FundamentalSide::Seller, self.fs_cash, self.fs_holdings)
            };
            fundamentals.push(FundamentalTrader { id, side, cash, holdings, utility });
        }
        let probs = SwitchProbs::new(self.p_buy, self.p_sell, self.p_idle)?;
        let base = fundamentals.len();
        let technicals = (0..self.active_technicals())
            .map(|i| TechnicalTrader::new(base + i, self.epsilon, probs))
            .collect::<Result<_>>()?;
        Ok((fundamentals, technicals))
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "grid.horizon" => self.horizon.to_string(),
            "grid.n_steps" => self.n_steps.to_string(),
            "underlying.z0" => self.z0.to_string(),
            "underlying.drift" => self.drift.to_string(),
            "underlying.sigma" => self.sigma.to_string(),
            "securities" => self.securities.join("; "),
            "market.security" => self.market_security.to_string(),
            "population.n_fb" => self.n_fb.to_string(),
            "population.n_fs" => self.n_fs.to_string(),
            "population.utility" => self.utility.as_str().to_string(),
            "population.gamma_min" => self.gamma_min.to_string(),
            "population.gamma_max" => self.gamma_max.to_string(),
            "population.eta_min" => self.eta_min.to_string(),
            "population.eta_max" => self.eta_max.to_string(),
            "population.wealth_floor" => self.wealth_floor.to_string(),
            "population.fb_cash" => self.fb_cash.to_string(),
            "population.fs_cash" => self.fs_cash.to_string(),
            "population.fb_holdings" => self.fb_holdings.to_string(),
            "population.fs_holdings" => self.fs_holdings.to_string(),
            "technical.count" => self.n_technical.to_string(),
            "technical.epsilon" => self.epsilon.to_string(),
            "technical.p_buy" => self.p_buy.to_string(),
            "technical.p_sell" => self.p_sell.to_string(),
            "technical.p_idle" => self.p_idle.to_string(),
            "technical.cash" => self.technical_cash.to_string(),
            "clearing.kappa" => self.kappa.to_string(),
            "scenarios.count" => self.scenarios.to_string(),
            "run.seed" => self.seed.to_string(),
            "run.returns" => self.returns.as_str().to_string(),
            "ensemble.runs" => self.ensemble_runs.to_string(),
            "audit.pairs" => self.audit_pairs.iter().map(|(l, r)| format!("{l} == {r}")).collect::<Vec<_>>().join("; "),
            _ => unreachable!("unknown canonical key {key}"),
        }
    }

    /// Every key in fixed order with its effective value. Parsing the result
    /// yields an equal configuration (apart from the output directory).
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical().as_bytes())
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn args_of<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

/// Parses one security declaration. Option expiries default to the horizon.
pub fn parse_security(text: &str, id: u32, n_steps: usize) -> Result<SecuritySpec> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::invalid(format!("cannot parse security {text:?}"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let option = |args: &str| -> Result<(f64, usize)> {
        let mut parts = args.split(',');
        let strike = num(parts.next().ok_or_else(bad)?)?;
        let expiry = match parts.next() {
            Some(e) => e.parse().map_err(|_| bad())?,
            None => n_steps,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok((strike, expiry))
    };
    let kind = if t == "underlying" {
        SecurityKind::Underlying
    } else if let Some(a) = args_of(&t, "forward") {
        SecurityKind::Forward { strike: num(a)? }
    } else if let Some(a) = args_of(&t, "call") {
        let (strike, expiry) = option(a)?;
        SecurityKind::EuroCall { strike, expiry }
    } else if let Some(a) = args_of(&t, "put") {
        let (strike, expiry) = option(a)?;
        SecurityKind::EuroPut { strike, expiry }
    } else if let Some(a) = args_of(&t, "steps") {
        let table = a
            .split(',')
            .map(|entry| {
                let f: Vec<&str> = entry.split(':').collect();
                let floored = match f.get(3) {
                    None => false,
                    Some(&"floor") => true,
                    Some(_) => return Err(bad()),
                };
                if f.len() < 3 || f.len() > 4 {
                    return Err(bad());
                }
                Ok(StepPayment {
                    step: f[0].parse().map_err(|_| bad())?,
                    slope: num(f[1])?,
                    intercept: num(f[2])?,
                    floored,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SecurityKind::StepPayout { table }
    } else {
        return Err(bad());
    };
    Ok(SecuritySpec::new(id, kind))
}

/// Parses `[q*]security (+|-) [q*]security ...` into a static portfolio.
pub fn parse_bundle(text: &str, n_steps: usize) -> Result<Bundle> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut terms: Vec<(f64, String)> = Vec::new();
    let mut depth = 0i32;
    let mut sign = 1.0;
    let mut cur = String::new();
    for c in t.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (c == '+' || c == '-') && !cur.ends_with('*') && !cur.ends_with('e') {
            if !cur.is_empty() {
                terms.push((sign, std::mem::take(&mut cur)));
            }
            sign = if c == '-' { -1.0 } else { 1.0 };
            continue;
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        terms.push((sign, cur));
    }
    if terms.is_empty() {
        return Err(Error::invalid(format!("empty bundle {text:?}")));
    }
    let legs = terms
        .into_iter()
        .enumerate()
        .map(|(i, (sign, term))| {
            let (q, sec) = match term.split_once('*') {
                Some((q, sec)) => {
                    (q.parse::<f64>().map_err(|_| Error::invalid(format!("bad quantity in {text:?}")))?, sec)
                }
                None => (1.0, term.as_str()),
            };
            Ok((sign * q, parse_security(sec, 1000 + i as u32, n_steps)?))
        })
        .collect::<Result<_>>()?;
    Ok(Bundle { legs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_keys_and_comments() {
        let cfg = RunConfig::parse(
            "grid.n_steps = 50 # short\n\
             technical.count = 3\n\
             securities = forward(0); call(10, 40); steps(10:1:-2:floor, 50:0.5:0)\n\
             audit.pairs = call(10) - put(10) == forward(10)\n\
             run.returns = log_diff\n",
        )
        .unwrap();
        assert_eq!(cfg.n_steps, 50);
        assert_eq!(cfg.n_technical, 3);
        assert_eq!(cfg.returns, ReturnMode::LogDiff);
        let specs = cfg.security_specs().unwrap();
        assert_eq!(specs[1].kind, SecurityKind::EuroCall { strike: 10.0, expiry: 40 });
        assert_eq!(specs[2].to_string(), "steps(10:1:-2:floor,50:0.5:0)");
        let pairs = cfg.audit_bundles().unwrap();
        assert_eq!(pairs[0].0.legs.len(), 2);
        assert_eq!(pairs[0].0.legs[1].0, -1.0);
        assert_eq!(pairs[0].1.legs[0].1.kind, SecurityKind::Forward { strike: 10.0 });
    }

    #[test]
    fn rejects_unknown_and_malformed_input() {
        assert!(matches!(RunConfig::parse("grid.nsteps = 5"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(RunConfig::parse("\ngrid.n_steps"), Err(Error::Config { line: 2, .. })));
        assert!(RunConfig::parse("grid.n_steps = 5\ngrid.n_steps = 6").is_err());
        assert!(RunConfig::parse("population.n_fb = 0").is_err());
        assert!(RunConfig::parse("securities = swap(1)").is_err());
        assert!(RunConfig::parse("technical.p_buy = 0.9").is_err());
        assert!(RunConfig::parse("securities = call(1, 5000)").is_err());
        assert!(RunConfig::parse("market.security = 1").is_err());
    }

    #[test]
    fn canonical_round_trips_and_hash_is_stable() {
        let cfg =
            RunConfig::parse("underlying.z0 = 12.5\naudit.pairs = call(1)==call(1)\nrun.output_dir = /tmp/x").unwrap();
        let again = RunConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(again.canonical(), cfg.canonical());
        assert_eq!(again.hash(), cfg.hash());
        assert_eq!(again.output_dir, None);
        let mut other = cfg.clone();
        other.z0 = 12.0;
        assert_ne!(other.hash(), cfg.hash());
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn population_is_deterministic_and_in_range() {
        let cfg = RunConfig { n_technical: 4, ..Default::default() };
        let (f, t) = cfg.population().unwrap();
        assert_eq!((f.len(), t.len()), (10, 4));
        assert_eq!(cfg.population().unwrap().0, f);
        assert!(f.iter().take(5).all(|x| x.side == FundamentalSide::Buyer));
        assert!(f.iter().all(|x| match x.utility {
            UtilityFn::Cara { gamma } => (0.5..=2.0).contains(&gamma),
            _ => false,
        }));
        assert_eq!(t[0].id, 10);
        let no_eps = RunConfig { n_technical: 4, epsilon: 0.0, ..Default::default() };
        assert!(no_eps.population().unwrap().1.is_empty());
    }

    #[test]
    fn bundle_quantities() {
        let b = parse_bundle("2*forward(1) - 0.5*call(3,10) + underlying", 10).unwrap();
        let q: Vec<f64> = b.legs.iter().map(|l| l.0).collect();
        assert_eq!(q, vec![2.0, -0.5, 1.0]);
        let neg = parse_bundle("steps(5:1:-5)", 10).unwrap();
        assert_eq!(neg.legs.len(), 1);
    }
}
