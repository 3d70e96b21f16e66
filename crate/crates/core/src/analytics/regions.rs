//! Submartingale regions of the aggregate wealth.
//!
//! The aggregate wealth is a submartingale exactly on the states where the
//! drift bracket is nonnegative. In the supercritical frozen regime that set
//! is one or two runs of consecutive states: `[g1, g2] U [g3, g4]`, merged
//! into `[g1, g4]` for small `lambda`, or reduced to `[g3, g4]` once the
//! lower interval disappears at large `lambda`.

use serde::{Deserialize, Serialize};

use crate::analytics::drift::bracket_from_probs;
use crate::analytics::stationary::StationaryDistribution;
use crate::error::{Error, Result};
use crate::kernel::KernelTable;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    TwoIntervals,
    Merged,
    UpperOnly,
}

impl RegionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionKind::TwoIntervals => "TwoIntervals",
            RegionKind::Merged => "Merged",
            RegionKind::UpperOnly => "UpperOnly",
        }
    }
}

impl std::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleRegions {
    pub kind: RegionKind,
    pub g1: Option<usize>,
    pub g2: Option<usize>,
    pub g3: Option<usize>,
    pub g4: Option<usize>,
    /// Sign of the drift bracket at each state `0..=N`.
    pub drift_sign: Vec<i8>,
}

impl MartingaleRegions {
    /// Reported intervals in increasing order.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        match self.kind {
            RegionKind::TwoIntervals => {
                vec![(self.g1.unwrap(), self.g2.unwrap()), (self.g3.unwrap(), self.g4.unwrap())]
            }
            RegionKind::Merged => vec![(self.g1.unwrap(), self.g4.unwrap())],
            RegionKind::UpperOnly => vec![(self.g3.unwrap(), self.g4.unwrap())],
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.intervals().iter().any(|&(a, b)| a <= i && i <= b)
    }

    /// Lowest submartingale state: `g1`, or `g3` when the lower interval is gone.
    pub fn lower_boundary(&self) -> usize {
        self.g1.or(self.g3).expect("every kind has a lower endpoint")
    }

    pub fn upper_boundary(&self) -> usize {
        self.g4.expect("every kind has g4")
    }

    /// `[g1, g2, g3, g4]`, with `None` for absent boundaries.
    pub fn boundaries(&self) -> [Option<usize>; 4] {
        [self.g1, self.g2, self.g3, self.g4]
    }
}

/// Region solver for fixed `(N, d, alpha)`; the kernel and the stationary
/// lower mode do not depend on `lambda`, so one solver serves every `lambda`.
#[derive(Debug, Clone)]
pub struct RegionSolver {
    table: KernelTable,
    lower_mode: usize,
}

impl RegionSolver {
    pub fn new(params: &Params) -> Result<Self> {
        params.require_frozen()?;
        params.require_supercritical()?;
        let table = KernelTable::new(params)?;
        let lower_mode = StationaryDistribution::from_table(&table)?.lower_mode();
        Ok(RegionSolver { table, lower_mode })
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn solve(&self, lambda: f64) -> Result<MartingaleRegions> {
        let params = self.table.params().with_lambda(lambda);
        params.validate()?;
        let drift_sign: Vec<i8> = self
            .table
            .rows()
            .iter()
            .map(|t| {
                let b = bracket_from_probs(&params, t);
                if b > 0.0 {
                    1
                } else if b < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect();
        let runs = nonnegative_runs(&drift_sign);
        let (kind, g) = match runs.as_slice() {
            [] => return Err(Error::EmptySubmartingaleSet),
            // a single run keeps the lower equilibrium only if it reaches down
            // to the lower stationary mode
            &[(a, b)] if a <= self.lower_mode => (RegionKind::Merged, [Some(a), None, None, Some(b)]),
            &[(a, b)] => (RegionKind::UpperOnly, [None, None, Some(a), Some(b)]),
            &[(a, b), (c, e)] => (RegionKind::TwoIntervals, [Some(a), Some(b), Some(c), Some(e)]),
            _ => return Err(Error::MoreThanTwoIntervals { runs }),
        };
        Ok(MartingaleRegions { kind, g1: g[0], g2: g[1], g3: g[2], g4: g[3], drift_sign })
    }
}

/// Classifies every state by the sign of the aggregate drift and extracts the
/// submartingale intervals `g1..g4`.
pub fn martingale_regions(params: &Params) -> Result<MartingaleRegions> {
    RegionSolver::new(params)?.solve(params.lambda)
}

fn nonnegative_runs(signs: &[i8]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &s) in signs.iter().enumerate() {
        match (s >= 0, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                runs.push((a, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        runs.push((a, signs.len() - 1));
    }
    runs
}
