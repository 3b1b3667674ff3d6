//! The per-step market loop.

use crate::agents::{reservation_price, FundamentalSide, FundamentalTrader, Regime};
use crate::clearing::{
    clear_step, law_of_one_price_audit, pareto_set, settle_and_bankrupt, Account, AuditOutcome, Census,
    ClearingStepResult, HaltReason, Ledger, LimitOrder, MarketCondition, MarketOrder, OrderBookSnapshot,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::rng::{self, purpose};
use crate::securities::{accrue, Bundle, Holding, PayoffSamples};
use crate::stats::{excursions, ExcursionReport, ReturnMode, ReturnSeries, ReturnStats};
use crate::stochastic::{scenarios_at, semimartingale_path};

/// One recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub step: usize,
    pub time: f64,
    pub underlying: f64,
    pub price: f64,
    pub condition: MarketCondition,
    pub halt: HaltReason,
    pub jump: Option<f64>,
    pub census: Census,
    pub pareto_lo: Option<f64>,
    pub pareto_hi: Option<f64>,
    pub trades: usize,
    pub bankruptcies: usize,
}

impl StepRow {
    pub fn is_halted(&self) -> bool {
        self.condition == MarketCondition::Halted
    }

    pub fn in_pareto_set(&self) -> bool {
        matches!((self.pareto_lo, self.pareto_hi), (Some(lo), Some(hi)) if lo <= self.price && self.price <= hi)
    }
}

/// Statistics recomputable from the recorded rows alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub mode: ReturnMode,
    pub returns: ReturnStats,
    pub excursions: ExcursionReport,
}

impl Analysis {
    pub fn of_rows(rows: &[StepRow], mode: ReturnMode) -> Result<Self> {
        let series = returns_of(rows, mode)?;
        let conditions: Vec<MarketCondition> = rows.iter().map(|r| r.condition).collect();
        let jumps: Vec<Option<f64>> = rows.iter().map(|r| r.jump).collect();
        Ok(Self { mode, returns: ReturnStats::of(&series.diffs), excursions: excursions(&conditions, &jumps)? })
    }
}

pub fn returns_of(rows: &[StepRow], mode: ReturnMode) -> Result<ReturnSeries> {
    let prices: Vec<f64> = rows.iter().map(|r| r.price).collect();
    let halted: Vec<bool> = rows.iter().map(|r| r.is_halted()).collect();
    ReturnSeries::from_prices(&prices, &halted, mode)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditResult {
    pub pair: String,
    pub outcome: AuditOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub config_hash: u64,
    pub n_steps: usize,
    pub opening_price: f64,
    pub final_price: f64,
    pub halted_steps: usize,
    pub total_trades: usize,
    pub total_bankruptcies: usize,
    /// `|total cash after - total cash before|`, issuer included.
    pub cash_drift: f64,
    pub audits: Vec<AuditResult>,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<StepRow>,
    pub summary: RunSummary,
}

fn holders(ledger: &Ledger) -> Vec<Holding> {
    ledger
        .accounts
        .iter()
        .enumerate()
        .filter(|(_, a)| a.position != 0.0)
        .map(|(trader, a)| Holding { trader, position: a.position })
        .collect()
}

/// Reservation prices of every live fundamental trader, or the first solver
/// failure.
fn quote_fundamentals(
    traders: &[FundamentalTrader],
    ledger: &Ledger,
    samples: &PayoffSamples,
    book: &mut OrderBookSnapshot,
) -> Result<()> {
    for t in traders.iter().filter(|t| ledger.is_alive(t.id)) {
        let order = LimitOrder { trader: t.id, limit: reservation_price(t, samples)?.price };
        match t.side {
            FundamentalSide::Buyer => book.bids.push(order),
            FundamentalSide::Seller => book.asks.push(order),
        }
    }
    Ok(())
}

/// Runs one market from `seed`. The trader population comes from the
/// configuration's master seed, so every seed sees the same traders.
pub fn run_simulation(cfg: &RunConfig, seed: u64) -> Result<RunRecord> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let model = cfg.model()?;
    let spec = cfg.market_spec()?;
    let market = Bundle::single(spec.clone());
    let audits = cfg.audit_bundles()?;
    let (fundamentals, mut technicals) = cfg.population()?;
    let params = cfg.clearing_params();
    let n = grid.n_steps();

    let path = semimartingale_path(&grid, &model, rng::derive_seed(seed, purpose::UNDERLYING), 0);
    // Common random numbers: every step reuses the same scenario stream, so
    // Monte Carlo error in reservation prices varies smoothly over time.
    let scenario_seed = rng::derive_seed(seed, purpose::SCENARIOS);
    let regime_seed = rng::derive_seed(seed, purpose::REGIMES);
    let mut regime_rngs: Vec<_> = technicals.iter().map(|t| rng::stream(regime_seed, t.id as u64)).collect();

    let mut accounts: Vec<Account> = fundamentals
        .iter()
        .map(|f| match f.side {
            FundamentalSide::Buyer => Account::new(cfg.fb_cash, cfg.fb_holdings),
            FundamentalSide::Seller => Account::new(cfg.fs_cash, cfg.fs_holdings),
        })
        .collect();
    accounts.extend(technicals.iter().map(|_| Account::new(cfg.technical_cash, 0.0)));
    let mut ledger = Ledger::new(accounts);
    let cash_before = ledger.total_cash();

    let audit_applicable = technicals.is_empty();
    let mut audit_outcomes: Vec<AuditOutcome> = audits
        .iter()
        .map(|_| if audit_applicable { AuditOutcome::empty() } else { AuditOutcome::NotApplicable })
        .collect();

    let mut rows: Vec<StepRow> = Vec::with_capacity(n);
    let mut prev: Option<ClearingStepResult> = None;
    let mut opening_price = f64::NAN;

    for s in 0..n {
        let accrual = (s >= 1).then(|| accrue(&spec, &holders(&ledger), &path, s - 1));

        let mut observe = market.observation_steps(s, n);
        for (l, r) in &audits {
            observe.extend(l.observation_steps(s, n));
            observe.extend(r.observation_steps(s, n));
        }
        observe.sort_unstable();
        observe.dedup();
        let scenarios = scenarios_at(path.z[s], &grid, s, &model, &observe, cfg.scenarios, scenario_seed)?;
        let samples = market.samples(&scenarios);
        let expected = samples.estimate().mean;
        if s == 0 && (expected.is_nan() || expected <= 0.0) {
            return Err(Error::invalid(format!(
                "expected payoff of the traded security at the opening is {expected}; it must be positive"
            )));
        }

        let mut book = OrderBookSnapshot::default();
        let solver = quote_fundamentals(&fundamentals, &ledger, &samples, &mut book);
        let pareto = pareto_set(&book);
        let prev_step = match prev.take() {
            Some(p) => p,
            None => {
                opening_price = pareto.midpoint().unwrap_or(expected);
                ClearingStepResult::opening(opening_price, pareto)
            }
        };

        for (t, r) in technicals.iter_mut().zip(regime_rngs.iter_mut()) {
            if !ledger.is_alive(t.id) {
                continue;
            }
            let regime = t.switch_regime(r);
            let order = |quote| MarketOrder { trader: t.id, quote, epsilon: t.epsilon() };
            match regime {
                Regime::Buyer => book.buys.push(order(t.quote_buy(prev_step.price)?)),
                Regime::Seller => book.sells.push(order(t.quote_sell(prev_step.price)?)),
                Regime::IdleFlat => {}
            }
        }

        let result = match solver {
            Ok(()) => clear_step(&book, &prev_step, &params),
            Err(e) if e.is_numerical() || matches!(e, Error::InvalidParameter(_)) => {
                ClearingStepResult::halted(prev_step.price, HaltReason::Solver, book.census(), pareto)
            }
            Err(e) => return Err(e),
        };
        let bankrupt = settle_and_bankrupt(&mut ledger, &result.trades, accrual.as_ref());

        if audit_applicable && result.condition != MarketCondition::Halted {
            let alive: Vec<FundamentalTrader> =
                fundamentals.iter().filter(|t| ledger.is_alive(t.id)).cloned().collect();
            for ((l, r), outcome) in audits.iter().zip(audit_outcomes.iter_mut()) {
                if let Ok(step) = law_of_one_price_audit(&alive, &l.samples(&scenarios), &r.samples(&scenarios)) {
                    outcome.record(step);
                }
            }
        }

        rows.push(StepRow {
            step: s,
            time: grid.time(s),
            underlying: path.z[s],
            price: result.price,
            condition: result.condition,
            halt: result.halt,
            jump: result.jump,
            census: result.census,
            pareto_lo: result.pareto.lo,
            pareto_hi: result.pareto.hi,
            trades: result.trades.len(),
            bankruptcies: bankrupt.len(),
        });
        prev = Some(result);
    }

    // Cashflow dated at the horizon.
    let last = accrue(&spec, &holders(&ledger), &path, n - 1);
    let bankrupt = settle_and_bankrupt(&mut ledger, &[], Some(&last));
    if let Some(row) = rows.last_mut() {
        row.bankruptcies += bankrupt.len();
    }

    let analysis = Analysis::of_rows(&rows, cfg.returns)?;
    let summary = RunSummary {
        seed,
        config_hash: cfg.hash(),
        n_steps: n,
        opening_price,
        final_price: rows.last().map_or(f64::NAN, |r| r.price),
        halted_steps: rows.iter().filter(|r| r.is_halted()).count(),
        total_trades: rows.iter().map(|r| r.trades).sum(),
        total_bankruptcies: rows.iter().map(|r| r.bankruptcies).sum(),
        cash_drift: (ledger.total_cash() - cash_before).abs(),
        audits: cfg
            .audit_pairs
            .iter()
            .zip(audit_outcomes)
            .map(|((l, r), outcome)| AuditResult { pair: format!("{l} == {r}"), outcome })
            .collect(),
        analysis,
    };
    Ok(RunRecord { rows, summary })
}
