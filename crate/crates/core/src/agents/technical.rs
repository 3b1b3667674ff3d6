use rand::Rng;

use super::TraderId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    IdleFlat,
    /// Member of `TB_t`.
    Buyer,
    /// Member of `TS_t`.
    Seller,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchProbs {
    pub buy: f64,
    pub sell: f64,
    pub idle: f64,
}

impl SwitchProbs {
    pub fn new(buy: f64, sell: f64, idle: f64) -> Result<Self> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !(ok(buy) && ok(sell) && ok(idle)) || (buy + sell + idle - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "switch probabilities ({buy}, {sell}, {idle}) must lie in [0,1] and sum to 1"
            )));
        }
        Ok(Self { buy, sell, idle })
    }
}

/// Risk-neutral trader who picks buy, sell or idle at random each step and
/// quotes `price ± epsilon` when active.
#[derive(Debug, Clone, PartialEq)]
pub struct TechnicalTrader {
    pub id: TraderId,
    pub regime: Regime,
    epsilon: f64,
    probs: SwitchProbs,
}

impl TechnicalTrader {
    pub fn new(id: TraderId, epsilon: f64, probs: SwitchProbs) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { id, regime: Regime::IdleFlat, epsilon, probs })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn probs(&self) -> SwitchProbs {
        self.probs
    }

    /// Draws this step's regime. One uniform per call.
    pub fn switch_regime(&mut self, rng: &mut impl Rng) -> Regime {
        let u: f64 = rng.random();
        self.regime = if u < self.probs.buy {
            Regime::Buyer
        } else if u < self.probs.buy + self.probs.sell {
            Regime::Seller
        } else {
            Regime::IdleFlat
        };
        self.regime
    }

    pub fn quote_buy(&self, current_price: f64) -> Result<f64> {
        match self.regime {
            Regime::Buyer => Ok(current_price + self.epsilon),
            _ => Err(Error::invalid(format!("trader {} is not buying", self.id))),
        }
    }

    pub fn quote_sell(&self, current_price: f64) -> Result<f64> {
        match self.regime {
            Regime::Seller => Ok(current_price - self.epsilon),
            _ => Err(Error::invalid(format!("trader {} is not selling", self.id))),
        }
    }
}
