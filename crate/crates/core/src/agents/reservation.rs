use super::utility::{UtilityFn, Valuation, TOL_U};
use super::TraderId;
use crate::error::{Error, Result};
use crate::securities::PayoffSamples;

/// Bisection stops once the bracket is this narrow, if the residual test has
/// not already fired.
pub const TOL_PRICE: f64 = 1e-9;
/// Largest admissible reservation price.
pub const MAX_BRACKET: f64 = 1e6;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FundamentalSide {
    /// FB: only ever buys.
    Buyer,
    /// FS: only ever sells.
    Seller,
}

/// A risk-averse trader quoting reservation prices. `cash` and `holdings`
/// are its endowment at the quoting date: certain consumption and units of
/// the priced bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTrader {
    pub id: TraderId,
    pub side: FundamentalSide,
    pub cash: f64,
    pub holdings: f64,
    pub utility: UtilityFn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reservation {
    pub price: f64,
    /// Certainty-equivalent gap of the indifference equation at `price`.
    pub residual: f64,
    pub iterations: usize,
}

fn require_positive_expectation(samples: &PayoffSamples) -> Result<()> {
    let e = samples.estimate().mean;
    if e > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("expected payoff must be positive, got {e}")))
    }
}

/// Root of an increasing `f` on `(0, MAX_BRACKET]`. `f(0)` must be negative.
fn bisect_increasing(mut f: impl FnMut(f64) -> f64) -> Result<Reservation> {
    let mut lo = 0.0;
    if f(lo) >= 0.0 {
        return Err(Error::NoBracket { upper: 0.0 });
    }
    let mut hi = 1.0;
    loop {
        let fh = f(hi);
        if fh.is_nan() {
            return Err(Error::NonFinite("indifference residual"));
        }
        if fh >= 0.0 {
            break;
        }
        if hi >= MAX_BRACKET {
            return Err(Error::NoBracket { upper: hi });
        }
        lo = hi;
        hi = (2.0 * hi).min(MAX_BRACKET);
    }

    for iterations in 1..=MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::NonFinite("indifference residual"));
        }
        let resolved = mid <= lo || mid >= hi || hi - lo <= TOL_PRICE * 1e-3;
        if fm.abs() <= TOL_U || resolved {
            return Ok(Reservation { price: mid, residual: fm, iterations });
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS })
}

/// Certainty equivalent with undefined utility mapped to minus infinity.
fn ce_or_ruin(v: &Valuation<'_>, cash: f64) -> Result<f64> {
    match v.certainty_equivalent(cash) {
        Ok(x) => Ok(x),
        Err(Error::BelowWealthFloor { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Lowest price at which the seller gives up one unit of the bundle:
/// `U(cash + a, holdings - x) = U(cash, holdings)`.
pub fn reservation_ask(trader: &FundamentalTrader, samples: &PayoffSamples) -> Result<Reservation> {
    if trader.side != FundamentalSide::Seller {
        return Err(Error::invalid(format!("trader {} is not a seller", trader.id)));
    }
    require_positive_expectation(samples)?;
    let before = Valuation::new(trader.utility, samples, trader.holdings).certainty_equivalent(trader.cash)?;
    let after = Valuation::new(trader.utility, samples, trader.holdings - 1.0);
    let mut failure = None;
    let r = bisect_increasing(|a| match ce_or_ruin(&after, trader.cash + a) {
        Ok(ce) => ce - before,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    match failure {
        Some(e) => Err(e),
        None => r,
    }
}

/// Highest price at which the buyer takes one more unit of the bundle:
/// `U(cash - b, holdings + x) = U(cash, holdings)`.
pub fn reservation_bid(trader: &FundamentalTrader, samples: &PayoffSamples) -> Result<Reservation> {
    if trader.side != FundamentalSide::Buyer {
        return Err(Error::invalid(format!("trader {} is not a buyer", trader.id)));
    }
    require_positive_expectation(samples)?;
    let before = Valuation::new(trader.utility, samples, trader.holdings).certainty_equivalent(trader.cash)?;
    let after = Valuation::new(trader.utility, samples, trader.holdings + 1.0);
    let mut failure = None;
    let r = bisect_increasing(|b| match ce_or_ruin(&after, trader.cash - b) {
        Ok(ce) => before - ce,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    match failure {
        Some(e) => Err(e),
        None => r.map(|r| Reservation { residual: -r.residual, ..r }),
    }
}

/// Reservation price on the trader's own side of the market.
pub fn reservation_price(trader: &FundamentalTrader, samples: &PayoffSamples) -> Result<Reservation> {
    match trader.side {
        FundamentalSide::Buyer => reservation_bid(trader, samples),
        FundamentalSide::Seller => reservation_ask(trader, samples),
    }
}
