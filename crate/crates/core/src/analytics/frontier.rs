use serde::{Deserialize, Serialize};

use crate::analytics::drift::{bracket_from_probs, price_growth, variance_from_probs};
use crate::analytics::price::price;
use crate::analytics::regions::martingale_regions;
use crate::error::Result;
use crate::kernel::KernelTable;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    LossAboveG4,
    LossBelowG1,
    GainLower,
    GainUpper,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::LossAboveG4 => "LossAboveG4",
            Branch::LossBelowG1 => "LossBelowG1",
            Branch::GainLower => "GainLower",
            Branch::GainUpper => "GainUpper",
        }
    }
}

/// Expected one-step aggregate wealth increment against its standard
/// deviation, both at the state's own price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub i: usize,
    pub mean: f64,
    pub sd: f64,
    pub branch: Branch,
}

/// Risk points for the given states. Branches split at the lowest
/// submartingale state (`g1`, or `g3` when the lower interval is absent),
/// at `N/2` and at `g4`.
pub fn risk_frontier(params: &Params, states: &[usize]) -> Result<Vec<RiskPoint>> {
    let regions = martingale_regions(params)?;
    let table = KernelTable::new(params)?;
    let (low, high) = (regions.lower_boundary(), regions.upper_boundary());
    let n = params.n;
    let g = price_growth(params);
    states
        .iter()
        .map(|&i| {
            params.check_state(i)?;
            let t = table.get(i);
            let pr = price(params, i);
            let mean = pr * g * bracket_from_probs(params, t);
            let sd = variance_from_probs(params, t, pr).sqrt();
            let branch = if i < low {
                Branch::LossBelowG1
            } else if i > high {
                Branch::LossAboveG4
            } else if 2 * i < n {
                Branch::GainLower
            } else {
                Branch::GainUpper
            };
            Ok(RiskPoint { i, mean, sd, branch })
        })
        .collect()
}
