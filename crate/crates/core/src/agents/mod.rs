//! Market participants: risk-averse fundamental traders who quote
//! reservation prices, and risk-neutral technical traders who switch between
//! buying, selling and staying out at random.

mod reservation;
mod technical;
mod utility;

pub use reservation::{
    reservation_ask, reservation_bid, reservation_price, FundamentalSide, FundamentalTrader, Reservation, MAX_BRACKET,
    MAX_ITERATIONS, TOL_PRICE,
};
pub use technical::{Regime, SwitchProbs, TechnicalTrader};
pub use utility::{certainty_equivalent, expected_utility, prefer, Preference, UtilityFn, TOL_U};

pub type TraderId = usize;
