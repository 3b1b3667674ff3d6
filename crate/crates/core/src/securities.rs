//! Tradable vectors of future contingent consumption.
//!
//! Every security is a payoff functional of the underlying path. A cashflow
//! dated at grid index `j` is paid to whoever holds the security at `j`; a
//! position bought at index `k` receives the cashflows dated in `(k, n]`.
//! The underlying pays its per-step increments, derivatives pay at expiry.
//! Interest is zero, so nothing is discounted.

use std::fmt;

use crate::error::{Error, Result};
use crate::stochastic::{PathView, ScenarioSet, SemimartingalePath, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SecurityId(pub u32);

/// One line of a custom payout table: at `step` pay
/// `slope * z[step] + intercept`, floored at zero when `floored`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPayment {
    pub step: usize,
    pub slope: f64,
    pub intercept: f64,
    pub floored: bool,
}

impl StepPayment {
    fn pay(&self, z: f64) -> f64 {
        let raw = self.slope * z + self.intercept;
        if self.floored {
            raw.max(0.0)
        } else {
            raw
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SecurityKind {
    Underlying,
    /// Pays `Z_T - strike` at the horizon.
    Forward {
        strike: f64,
    },
    EuroCall {
        strike: f64,
        expiry: usize,
    },
    EuroPut {
        strike: f64,
        expiry: usize,
    },
    StepPayout {
        table: Vec<StepPayment>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecuritySpec {
    pub id: SecurityId,
    pub kind: SecurityKind,
}

impl SecuritySpec {
    pub fn new(id: u32, kind: SecurityKind) -> Self {
        Self { id: SecurityId(id), kind }
    }

    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        let n = grid.n_steps();
        let check_strike = |k: f64| {
            if k.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("security {}: strike must be finite", self.id.0)))
            }
        };
        match &self.kind {
            SecurityKind::Underlying => Ok(()),
            SecurityKind::Forward { strike } => check_strike(*strike),
            SecurityKind::EuroCall { strike, expiry } | SecurityKind::EuroPut { strike, expiry } => {
                check_strike(*strike)?;
                if *expiry > n {
                    return Err(Error::invalid(format!("security {}: expiry {expiry} beyond horizon {n}", self.id.0)));
                }
                Ok(())
            }
            SecurityKind::StepPayout { table } => {
                if table.is_empty() {
                    return Err(Error::invalid(format!("security {}: empty payout table", self.id.0)));
                }
                for p in table {
                    if p.step > n || !p.slope.is_finite() || !p.intercept.is_finite() {
                        return Err(Error::invalid(format!(
                            "security {}: bad payout table entry at step {}",
                            self.id.0, p.step
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Last grid index at which the security pays, if it pays at one date only.
    pub fn expiry(&self, n_steps: usize) -> Option<usize> {
        match &self.kind {
            SecurityKind::Forward { .. } => Some(n_steps),
            SecurityKind::EuroCall { expiry, .. } | SecurityKind::EuroPut { expiry, .. } => Some(*expiry),
            _ => None,
        }
    }

    /// Cashflow dated at grid index `j >= 1`.
    pub fn cashflow_at(&self, path: &impl PathView, j: usize) -> f64 {
        let n = path.last_step();
        match &self.kind {
            SecurityKind::Underlying => path.value_at(j) - path.value_at(j - 1),
            SecurityKind::Forward { strike } => {
                if j == n {
                    path.value_at(n) - strike
                } else {
                    0.0
                }
            }
            SecurityKind::EuroCall { strike, expiry } => {
                if j == *expiry {
                    (path.value_at(j) - strike).max(0.0)
                } else {
                    0.0
                }
            }
            SecurityKind::EuroPut { strike, expiry } => {
                if j == *expiry {
                    (strike - path.value_at(j)).max(0.0)
                } else {
                    0.0
                }
            }
            SecurityKind::StepPayout { table } => {
                table.iter().filter(|p| p.step == j).map(|p| p.pay(path.value_at(j))).sum()
            }
        }
    }

    /// Grid indices in `(from_k, n]` at which the payoff reads the underlying.
    pub fn observation_steps(&self, from_k: usize, n_steps: usize) -> Vec<usize> {
        let mut steps: Vec<usize> = match &self.kind {
            SecurityKind::Underlying | SecurityKind::Forward { .. } => vec![n_steps],
            SecurityKind::EuroCall { expiry, .. } | SecurityKind::EuroPut { expiry, .. } => vec![*expiry],
            SecurityKind::StepPayout { table } => table.iter().map(|p| p.step).collect(),
        };
        steps.retain(|&s| s > from_k);
        steps.sort_unstable();
        steps.dedup();
        steps
    }

    /// Sum of cashflows dated in `(from_k, n]`.
    pub fn remaining_total(&self, path: &impl PathView, from_k: usize) -> f64 {
        let n = path.last_step();
        if from_k >= n {
            return 0.0;
        }
        match &self.kind {
            SecurityKind::Underlying => path.value_at(n) - path.value_at(from_k),
            SecurityKind::StepPayout { table } => {
                table.iter().filter(|p| p.step > from_k).map(|p| p.pay(path.value_at(p.step))).sum()
            }
            _ => match self.expiry(n) {
                Some(e) if e > from_k => self.cashflow_at(path, e),
                _ => 0.0,
            },
        }
    }
}

impl fmt::Display for SecuritySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SecurityKind::Underlying => write!(f, "underlying"),
            SecurityKind::Forward { strike } => write!(f, "forward({strike})"),
            SecurityKind::EuroCall { strike, expiry } => write!(f, "call({strike},{expiry})"),
            SecurityKind::EuroPut { strike, expiry } => write!(f, "put({strike},{expiry})"),
            SecurityKind::StepPayout { table } => {
                write!(f, "steps(")?;
                for (i, p) in table.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:{}:{}", p.step, p.slope, p.intercept)?;
                    if p.floored {
                        write!(f, ":floor")?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

/// A static portfolio: `quantity` units of each leg.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub legs: Vec<(f64, SecuritySpec)>,
}

impl Bundle {
    pub fn single(spec: SecuritySpec) -> Self {
        Self { legs: vec![(1.0, spec)] }
    }

    pub fn observation_steps(&self, from_k: usize, n_steps: usize) -> Vec<usize> {
        let mut steps: Vec<usize> = self.legs.iter().flat_map(|(_, s)| s.observation_steps(from_k, n_steps)).collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    }

    pub fn remaining_total(&self, path: &impl PathView, from_k: usize) -> f64 {
        self.legs.iter().map(|(q, s)| q * s.remaining_total(path, from_k)).sum()
    }

    /// Remaining-payoff totals per scenario, paired with scenario weights.
    pub fn samples(&self, scenarios: &ScenarioSet) -> PayoffSamples {
        let k = scenarios.anchor_step;
        PayoffSamples {
            values: scenarios.iter().map(|p| self.remaining_total(&p, k)).collect(),
            weights: scenarios.weights.clone(),
        }
    }
}

impl From<SecuritySpec> for Bundle {
    fn from(spec: SecuritySpec) -> Self {
        Bundle::single(spec)
    }
}

/// Scenario totals of a bundle with their probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffSamples {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PayoffSamples {
    pub fn uniform(values: Vec<f64>) -> Self {
        let w = 1.0 / values.len() as f64;
        let weights = vec![w; values.len()];
        Self { values, weights }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn estimate(&self) -> Estimate {
        let mean: f64 = self.values.iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        let var: f64 = self.values.iter().zip(&self.weights).map(|(x, w)| w * (x - mean).powi(2)).sum();
        let sum_w2: f64 = self.weights.iter().map(|w| w * w).sum();
        let n = self.len() as f64;
        // Bessel correction for the uniform case: sqrt(var * n/(n-1) / n).
        let correction = if n > 1.0 { n / (n - 1.0) } else { 0.0 };
        Estimate { mean, se: (var * correction * sum_w2).sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CashflowStream {
    pub from_k: usize,
    pub increments: Vec<f64>,
}

impl CashflowStream {
    pub fn total(&self) -> f64 {
        self.increments.iter().sum()
    }
}

pub fn payoff_stream(spec: &SecuritySpec, path: &SemimartingalePath, from_k: usize) -> Result<CashflowStream> {
    let n = path.last_step();
    if from_k > n {
        return Err(Error::invalid(format!("start index {from_k} beyond horizon {n}")));
    }
    if let Some(e) = spec.expiry(n) {
        if e < from_k {
            return Err(Error::invalid(format!("security {} expired at {e}, before start index {from_k}", spec.id.0)));
        }
    }
    Ok(CashflowStream { from_k, increments: (from_k + 1..=n).map(|j| spec.cashflow_at(path, j)).collect() })
}

pub fn expected_payoff(bundle: &Bundle, scenarios: &ScenarioSet) -> Estimate {
    bundle.samples(scenarios).estimate()
}

/// Position held by one trader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holding {
    pub trader: usize,
    pub position: f64,
}

/// Per-step accrual: holders receive `position * cashflow`; the issuer, who
/// is short the net outstanding amount, pays the balance.
#[derive(Debug, Clone, PartialEq)]
pub struct Accrual {
    pub transfers: Vec<(usize, f64)>,
    pub issuer: f64,
}

impl Accrual {
    pub fn net(&self) -> f64 {
        self.transfers.iter().map(|(_, x)| x).sum::<f64>() + self.issuer
    }
}

/// Transfers for the cashflow dated `k + 1`, realized on `path`.
pub fn accrue(spec: &SecuritySpec, holders: &[Holding], path: &impl PathView, k: usize) -> Accrual {
    let x = spec.cashflow_at(path, k + 1);
    let transfers: Vec<(usize, f64)> = holders.iter().map(|h| (h.trader, h.position * x)).collect();
    let issuer = -transfers.iter().map(|(_, t)| t).sum::<f64>();
    Accrual { transfers, issuer }
}
