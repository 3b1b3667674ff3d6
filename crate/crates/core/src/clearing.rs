//! Per-step price formation, trade matching, settlement and the
//! law-of-one-price audit.

use std::fmt;
use std::str::FromStr;

use crate::agents::{reservation_price, FundamentalTrader, TraderId};
use crate::error::{Error, Result};
use crate::securities::{Accrual, PayoffSamples};

/// A fundamental trader's limit order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOrder {
    pub trader: TraderId,
    pub limit: f64,
}

/// A technical trader's market order: quote `prev ± epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketOrder {
    pub trader: TraderId,
    pub quote: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrderBookSnapshot {
    /// Limit buys from FB.
    pub bids: Vec<LimitOrder>,
    /// Limit sells from FS.
    pub asks: Vec<LimitOrder>,
    /// Market buys from TB.
    pub buys: Vec<MarketOrder>,
    /// Market sells from TS.
    pub sells: Vec<MarketOrder>,
}

impl OrderBookSnapshot {
    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<TraderId> = self
            .bids
            .iter()
            .chain(&self.asks)
            .map(|o| o.trader)
            .chain(self.buys.iter().chain(&self.sells).map(|o| o.trader))
            .collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("a trader posted more than one order"));
        }
        if self.bids.iter().chain(&self.asks).any(|o| o.limit.is_nan() || o.limit <= 0.0) {
            return Err(Error::invalid("limit prices must be positive"));
        }
        Ok(())
    }

    pub fn census(&self) -> Census {
        Census { n_fb: self.bids.len(), n_fs: self.asks.len(), n_tb: self.buys.len(), n_ts: self.sells.len() }
    }

    /// Mean epsilon over active technical traders.
    pub fn epsilon_bar(&self) -> f64 {
        let n = self.buys.len() + self.sells.len();
        if n == 0 {
            return 0.0;
        }
        self.buys.iter().chain(&self.sells).map(|o| o.epsilon).sum::<f64>() / n as f64
    }
}

/// `E_t = [min ask, max bid]`. A missing side leaves its bound `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoSet {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl ParetoSet {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo: Some(lo), hi: Some(hi) }
    }

    pub fn is_one_sided(&self) -> bool {
        self.lo.is_none() != self.hi.is_none()
    }

    pub fn is_nonempty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(lo), Some(hi)) if hi >= lo)
    }

    pub fn midpoint(&self) -> Option<f64> {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) if hi >= lo => Some(0.5 * (lo + hi)),
            _ => None,
        }
    }

    pub fn contains(&self, price: f64) -> bool {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => lo <= price && price <= hi,
            _ => false,
        }
    }
}

pub fn pareto_set(book: &OrderBookSnapshot) -> ParetoSet {
    let lo = book.asks.iter().map(|o| o.limit).reduce(f64::min);
    let hi = book.bids.iter().map(|o| o.limit).reduce(f64::max);
    ParetoSet { lo, hi }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarketCondition {
    NonSpeculative,
    Normal,
    Bubble,
    Depression,
    Halted,
}

impl MarketCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            MarketCondition::NonSpeculative => "NonSpeculative",
            MarketCondition::Normal => "Normal",
            MarketCondition::Bubble => "Bubble",
            MarketCondition::Depression => "Depression",
            MarketCondition::Halted => "Halted",
        }
    }

    pub fn is_excursion(self) -> bool {
        matches!(self, MarketCondition::Bubble | MarketCondition::Depression)
    }
}

impl fmt::Display for MarketCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MarketCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "NonSpeculative" => MarketCondition::NonSpeculative,
            "Normal" => MarketCondition::Normal,
            "Bubble" => MarketCondition::Bubble,
            "Depression" => MarketCondition::Depression,
            "Halted" => MarketCondition::Halted,
            other => return Err(Error::invalid(format!("unknown market condition {other:?}"))),
        })
    }
}

/// Why a step produced no price. Serialized as the integer code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaltReason {
    None = 0,
    /// `E_t` empty or one-sided.
    NoParetoSet = 1,
    /// A reservation price could not be solved for.
    Solver = 2,
    /// Pressure drove the price to zero or below.
    NonPositivePrice = 3,
}

impl HaltReason {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => HaltReason::None,
            1 => HaltReason::NoParetoSet,
            2 => HaltReason::Solver,
            3 => HaltReason::NonPositivePrice,
            c => return Err(Error::invalid(format!("unknown halt code {c}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Census {
    pub n_fb: usize,
    pub n_fs: usize,
    pub n_tb: usize,
    pub n_ts: usize,
}

impl Census {
    pub fn technicals_active(&self) -> bool {
        self.n_tb + self.n_ts > 0
    }

    pub fn imbalance(&self) -> f64 {
        self.n_tb as f64 - self.n_ts as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trade {
    pub buyer: TraderId,
    pub seller: TraderId,
    pub price: f64,
    pub qty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearingStepResult {
    pub price: f64,
    pub condition: MarketCondition,
    pub halt: HaltReason,
    /// Signed jump size, when the step was a forced re-entry into `E_t`.
    pub jump: Option<f64>,
    pub census: Census,
    pub pareto: ParetoSet,
    pub trades: Vec<Trade>,
}

impl ClearingStepResult {
    /// Synthetic predecessor of the first step.
    pub fn opening(price: f64, pareto: ParetoSet) -> Self {
        Self {
            price,
            condition: MarketCondition::NonSpeculative,
            halt: HaltReason::None,
            jump: None,
            census: Census::default(),
            pareto,
            trades: Vec::new(),
        }
    }

    /// Carries `prev`'s price through a step that could not clear.
    pub fn halted(prev_price: f64, reason: HaltReason, census: Census, pareto: ParetoSet) -> Self {
        Self {
            price: prev_price,
            condition: MarketCondition::Halted,
            halt: reason,
            jump: None,
            census,
            pareto,
            trades: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearingParams {
    /// Weight of the pull toward the midpoint of `E_t` while technicals trade.
    pub kappa: f64,
}

impl Default for ClearingParams {
    fn default() -> Self {
        Self { kappa: 0.05 }
    }
}

/// Fundamental-only price: midpoint of `E_t`. `None` when no trade is
/// possible.
pub fn clear_nonspeculative(pareto: &ParetoSet) -> Option<f64> {
    pareto.midpoint()
}

/// `prev + epsilon_bar (|TB| - |TS|) + kappa (mid - prev)`. Not clamped.
pub fn apply_pressure(prev_price: f64, census: Census, epsilon_bar: f64, kappa: f64, pareto: &ParetoSet) -> f64 {
    let pull = match pareto.midpoint() {
        Some(mid) if kappa != 0.0 => kappa * (mid - prev_price),
        _ => 0.0,
    };
    prev_price + epsilon_bar * census.imbalance() + pull
}

pub fn classify(price: f64, pareto: &ParetoSet, census: Census) -> MarketCondition {
    match (pareto.lo, pareto.hi) {
        (_, Some(hi)) if price > hi => MarketCondition::Bubble,
        (Some(lo), _) if price < lo => MarketCondition::Depression,
        _ if census.technicals_active() => MarketCondition::Normal,
        _ => MarketCondition::NonSpeculative,
    }
}

/// Whether the technical side that sustained `prev`'s excursion has emptied.
fn sustaining_side_gone(prev: MarketCondition, census: Census) -> bool {
    match prev {
        MarketCondition::Bubble => census.n_tb == 0,
        MarketCondition::Depression => census.n_ts == 0,
        _ => false,
    }
}

/// Jump size when `new` is a re-entry into `E_t` forced by the sustaining
/// side of `prev`'s excursion leaving the market.
pub fn detect_jump(prev: &ClearingStepResult, new: &ClearingStepResult) -> Option<f64> {
    if new.condition == MarketCondition::Halted || !sustaining_side_gone(prev.condition, new.census) {
        return None;
    }
    let size = new.price - prev.price;
    (new.pareto.contains(new.price) && size != 0.0).then_some(size)
}

pub fn clear_step(book: &OrderBookSnapshot, prev: &ClearingStepResult, params: &ClearingParams) -> ClearingStepResult {
    let census = book.census();
    let pareto = pareto_set(book);
    let Some(mid) = pareto.midpoint() else {
        return ClearingStepResult::halted(prev.price, HaltReason::NoParetoSet, census, pareto);
    };

    let price = if sustaining_side_gone(prev.condition, census) || !census.technicals_active() {
        mid
    } else {
        apply_pressure(prev.price, census, book.epsilon_bar(), params.kappa, &pareto)
    };
    if price.is_nan() || price <= 0.0 {
        return ClearingStepResult::halted(prev.price, HaltReason::NonPositivePrice, census, pareto);
    }

    let mut result = ClearingStepResult {
        price,
        condition: classify(price, &pareto, census),
        halt: HaltReason::None,
        jump: None,
        census,
        pareto,
        trades: match_orders(book, price),
    };
    result.jump = detect_jump(prev, &result);
    result
}

/// Crosses compatible orders at `price`, one unit per pair. Market orders go
/// first in trader-id order, then limits from the most to the least
/// aggressive, ties broken by trader id.
pub fn match_orders(book: &OrderBookSnapshot, price: f64) -> Vec<Trade> {
    let mut market_buys: Vec<TraderId> = book.buys.iter().map(|o| o.trader).collect();
    market_buys.sort_unstable();
    let mut bids: Vec<&LimitOrder> = book.bids.iter().filter(|o| o.limit >= price).collect();
    bids.sort_by(|a, b| b.limit.total_cmp(&a.limit).then(a.trader.cmp(&b.trader)));

    let mut market_sells: Vec<TraderId> = book.sells.iter().map(|o| o.trader).collect();
    market_sells.sort_unstable();
    let mut asks: Vec<&LimitOrder> = book.asks.iter().filter(|o| o.limit <= price).collect();
    asks.sort_by(|a, b| a.limit.total_cmp(&b.limit).then(a.trader.cmp(&b.trader)));

    let buyers = market_buys.into_iter().chain(bids.into_iter().map(|o| o.trader));
    let sellers = market_sells.into_iter().chain(asks.into_iter().map(|o| o.trader));
    buyers.zip(sellers).map(|(buyer, seller)| Trade { buyer, seller, price, qty: 1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Account {
    pub cash: f64,
    pub position: f64,
    pub alive: bool,
}

impl Account {
    pub fn new(cash: f64, position: f64) -> Self {
        Self { cash, position, alive: true }
    }
}

/// Realized cash and positions of every trader plus the issuer of the
/// traded security, who is short everything outstanding.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    pub accounts: Vec<Account>,
    pub issuer_cash: f64,
}

impl Ledger {
    pub fn new(accounts: Vec<Account>) -> Self {
        Self { accounts, issuer_cash: 0.0 }
    }

    pub fn total_cash(&self) -> f64 {
        self.accounts.iter().map(|a| a.cash).sum::<f64>() + self.issuer_cash
    }

    pub fn is_alive(&self, id: TraderId) -> bool {
        self.accounts[id].alive
    }
}

/// Applies trade payments and accruals, then retires every live trader whose
/// cash went negative. Returns the newly bankrupt ids in order.
pub fn settle_and_bankrupt(ledger: &mut Ledger, trades: &[Trade], accrual: Option<&Accrual>) -> Vec<TraderId> {
    for t in trades {
        let amount = t.price * t.qty;
        let b = &mut ledger.accounts[t.buyer];
        b.cash -= amount;
        b.position += t.qty;
        let s = &mut ledger.accounts[t.seller];
        s.cash += amount;
        s.position -= t.qty;
    }
    if let Some(a) = accrual {
        for &(id, x) in &a.transfers {
            ledger.accounts[id].cash += x;
        }
        ledger.issuer_cash += a.issuer;
    }
    let mut bankrupt = Vec::new();
    for (id, acc) in ledger.accounts.iter_mut().enumerate() {
        if acc.alive && acc.cash < 0.0 {
            acc.alive = false;
            bankrupt.push(id);
        }
    }
    bankrupt
}

/// Gaps between two payoff-identical claims priced from the same scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditStep {
    pub reservation_gap: f64,
    pub price_gap: f64,
}

/// Prices both claims with every fundamental trader and compares the
/// reservation prices trader by trader, and the fundamental-only clearing
/// prices they imply.
pub fn law_of_one_price_audit(
    traders: &[FundamentalTrader],
    left: &PayoffSamples,
    right: &PayoffSamples,
) -> Result<AuditStep> {
    let mut book_l = OrderBookSnapshot::default();
    let mut book_r = OrderBookSnapshot::default();
    let mut reservation_gap = 0.0f64;
    for t in traders {
        let a = reservation_price(t, left)?.price;
        let b = reservation_price(t, right)?.price;
        reservation_gap = reservation_gap.max((a - b).abs());
        let (ol, or) = (LimitOrder { trader: t.id, limit: a }, LimitOrder { trader: t.id, limit: b });
        match t.side {
            crate::agents::FundamentalSide::Buyer => {
                book_l.bids.push(ol);
                book_r.bids.push(or);
            }
            crate::agents::FundamentalSide::Seller => {
                book_l.asks.push(ol);
                book_r.asks.push(or);
            }
        }
    }
    let price_gap = match (clear_nonspeculative(&pareto_set(&book_l)), clear_nonspeculative(&pareto_set(&book_r))) {
        (Some(a), Some(b)) => (a - b).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    Ok(AuditStep { reservation_gap, price_gap })
}

/// Running maximum of audit gaps over a run.
#[derive(Debug, Clone, PartialEq)]
pub enum AuditOutcome {
    /// Technical traders were present; the law of one price is only claimed
    /// for fundamental-only markets.
    NotApplicable,
    Checked {
        steps: usize,
        max_reservation_gap: f64,
        max_price_gap: f64,
    },
}

impl AuditOutcome {
    pub fn empty() -> Self {
        AuditOutcome::Checked { steps: 0, max_reservation_gap: 0.0, max_price_gap: 0.0 }
    }

    pub fn record(&mut self, s: AuditStep) {
        if let AuditOutcome::Checked { steps, max_reservation_gap, max_price_gap } = self {
            *steps += 1;
            *max_reservation_gap = max_reservation_gap.max(s.reservation_gap);
            *max_price_gap = max_price_gap.max(s.price_gap);
        }
    }

    pub fn max_discrepancy(&self) -> Option<f64> {
        match self {
            AuditOutcome::NotApplicable => None,
            AuditOutcome::Checked { max_reservation_gap, max_price_gap, .. } => {
                Some(max_reservation_gap.max(*max_price_gap))
            }
        }
    }
}
