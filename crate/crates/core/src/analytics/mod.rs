//! Closed-form wealth-process analytics in the frozen phase.
//!
//! Prices are carried as logarithms; `P* = 1` throughout.

mod drift;
mod frontier;
mod price;
mod regions;
mod stationary;

pub use drift::{
    aggregate_drift, aggregate_drift_bracket, aggregate_variance, bracket_from_probs, exact_local_drift, local_drift,
    price_growth, variance_from_probs,
};
pub use frontier::{risk_frontier, Branch, RiskPoint};
pub use price::{conditional_volatility, exact_log_return_sd, log_price, price, volume};
pub use regions::{martingale_regions, MartingaleRegions, RegionKind, RegionSolver};
pub use stationary::{stationary_distribution, StationaryDistribution};
