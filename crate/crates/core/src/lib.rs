pub mod agents;
pub mod clearing;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod record;
pub mod rng;
pub mod securities;
pub mod sim;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};
