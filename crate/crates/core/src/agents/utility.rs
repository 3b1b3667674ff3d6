use crate::error::{Error, Result};
use crate::securities::PayoffSamples;

/// Indifference tolerance used by [`prefer`].
pub const TOL_U: f64 = 1e-10;

/// Von Neumann-Morgenstern utility of terminal wealth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilityFn {
    /// Risk neutral: `u(w) = w`.
    Linear,
    /// `u(w) = -exp(-gamma w)`.
    Cara { gamma: f64 },
    /// `u(w) = ((w + floor)^(1-eta) - 1) / (1 - eta)`, or `ln(w + floor)` at
    /// `eta = 1`. Undefined at or below `w = -floor`.
    Crra { eta: f64, floor: f64 },
}

impl UtilityFn {
    pub fn cara(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("CARA risk aversion must be positive, got {gamma}")));
        }
        Ok(UtilityFn::Cara { gamma })
    }

    pub fn crra(eta: f64, floor: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("CRRA eta must be positive, got {eta}")));
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::invalid(format!("CRRA wealth floor must be positive, got {floor}")));
        }
        Ok(UtilityFn::Crra { eta, floor })
    }

    pub fn is_risk_neutral(&self) -> bool {
        matches!(self, UtilityFn::Linear)
    }

    pub fn eval(&self, w: f64) -> Result<f64> {
        match *self {
            UtilityFn::Linear => Ok(w),
            UtilityFn::Cara { gamma } => Ok(-(-gamma * w).exp()),
            UtilityFn::Crra { eta, floor } => {
                let x = w + floor;
                if x <= 0.0 {
                    return Err(Error::BelowWealthFloor { wealth: w, floor });
                }
                Ok(crra_u(eta, x))
            }
        }
    }

    /// Wealth whose utility is `u`.
    pub fn inverse(&self, u: f64) -> f64 {
        match *self {
            UtilityFn::Linear => u,
            UtilityFn::Cara { gamma } => -(-u).ln() / gamma,
            UtilityFn::Crra { eta, floor } => {
                if (eta - 1.0).abs() < 1e-12 {
                    u.exp() - floor
                } else {
                    (1.0 + (1.0 - eta) * u).powf(1.0 / (1.0 - eta)) - floor
                }
            }
        }
    }
}

fn crra_u(eta: f64, x: f64) -> f64 {
    if (eta - 1.0).abs() < 1e-12 {
        x.ln()
    } else {
        (x.powf(1.0 - eta) - 1.0) / (1.0 - eta)
    }
}

/// `E[u(cash + Y)]` over the weighted scenario totals `Y`.
pub fn expected_utility(u: &UtilityFn, cash: f64, samples: &PayoffSamples) -> Result<f64> {
    let mut acc = 0.0;
    for (&y, &w) in samples.values.iter().zip(&samples.weights) {
        acc += w * u.eval(cash + y)?;
    }
    Ok(acc)
}

/// Certainty equivalent of holding `scale` units of a bundle, as a function
/// of cash. CARA reduces to a cash shift of a precomputed log moment
/// generating function, so repeated evaluation inside the root finder costs
/// O(1); the other families re-average over the scenarios.
#[derive(Debug, Clone)]
pub(crate) struct Valuation<'a> {
    u: UtilityFn,
    samples: &'a PayoffSamples,
    scale: f64,
    cara_log_mgf: f64,
    mean: f64,
}

impl<'a> Valuation<'a> {
    pub(crate) fn new(u: UtilityFn, samples: &'a PayoffSamples, scale: f64) -> Self {
        let mean: f64 = samples.values.iter().zip(&samples.weights).map(|(y, w)| w * y).sum();
        let cara_log_mgf = match u {
            UtilityFn::Cara { gamma } => {
                log_sum_exp(samples.values.iter().zip(&samples.weights).map(|(&y, &w)| w.ln() - gamma * scale * y))
            }
            _ => 0.0,
        };
        Self { u, samples, scale, cara_log_mgf, mean }
    }

    pub(crate) fn certainty_equivalent(&self, cash: f64) -> Result<f64> {
        match self.u {
            UtilityFn::Linear => Ok(cash + self.scale * self.mean),
            UtilityFn::Cara { gamma } => Ok(cash - self.cara_log_mgf / gamma),
            UtilityFn::Crra { .. } => {
                let mut acc = 0.0;
                for (&y, &w) in self.samples.values.iter().zip(&self.samples.weights) {
                    acc += w * self.u.eval(cash + self.scale * y)?;
                }
                Ok(self.u.inverse(acc))
            }
        }
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Certainty equivalent of `(cash, samples)`: the sure wealth with the same
/// expected utility.
pub fn certainty_equivalent(u: &UtilityFn, cash: f64, samples: &PayoffSamples) -> Result<f64> {
    Valuation::new(*u, samples, 1.0).certainty_equivalent(cash)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    First,
    Second,
    Indifferent,
}

/// Compares two bundles `(cash, samples)`. Ordering is decided on certainty
/// equivalents, a strictly increasing transform of expected utility, so CARA
/// utilities that underflow at large wealth still rank correctly.
pub fn prefer(u: &UtilityFn, a: (f64, &PayoffSamples), b: (f64, &PayoffSamples)) -> Result<Preference> {
    let ca = certainty_equivalent(u, a.0, a.1)?;
    let cb = certainty_equivalent(u, b.0, b.1)?;
    Ok(if (ca - cb).abs() <= TOL_U {
        Preference::Indifferent
    } else if ca > cb {
        Preference::First
    } else {
        Preference::Second
    })
}
