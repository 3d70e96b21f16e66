use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temperature regime. All closed-form analytics use `Frozen`; the lattice
/// simulator also accepts a finite inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Phase {
    Frozen,
    FiniteTemperature { beta: f64 },
}

/// Model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Number of agents.
    pub n: usize,
    /// Half the neighborhood size: each update samples `2d` neighbors.
    pub d: usize,
    /// Coupling between the local majority and the global imbalance.
    pub alpha: f64,
    /// Price impact.
    pub lambda: f64,
    pub phase: Phase,
}

impl Params {
    /// Frozen-phase parameters, validated.
    pub fn new(n: usize, d: usize, alpha: f64, lambda: f64) -> Result<Self> {
        Self::with_phase(n, d, alpha, lambda, Phase::Frozen)
    }

    pub fn with_phase(n: usize, d: usize, alpha: f64, lambda: f64, phase: Phase) -> Result<Self> {
        let params = Params { n, d, alpha, lambda, phase };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParams("d must be at least 1".into()));
        }
        if self.n < 2 * self.d + 2 {
            return Err(Error::InvalidParams(format!(
                "N = {} is too small for d = {} (need N >= 2d + 2)",
                self.n, self.d
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParams(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if let Phase::FiniteTemperature { beta } = self.phase {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
            }
        }
        Ok(())
    }

    /// Neighborhood size `2d`.
    pub fn degree(&self) -> usize {
        2 * self.d
    }

    /// `alpha > 2d`: the global term can overpower a unanimous neighborhood.
    pub fn is_supercritical(&self) -> bool {
        self.alpha > self.degree() as f64
    }

    pub fn is_frozen(&self) -> bool {
        matches!(self.phase, Phase::Frozen)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Params { lambda, ..*self }
    }

    pub(crate) fn require_frozen(&self) -> Result<()> {
        if self.is_frozen() {
            Ok(())
        } else {
            Err(Error::NotFrozen)
        }
    }

    pub(crate) fn require_supercritical(&self) -> Result<()> {
        if self.is_supercritical() {
            Ok(())
        } else {
            Err(Error::NotSupercritical { alpha: self.alpha, two_d: self.degree() })
        }
    }

    pub(crate) fn check_state(&self, i: usize) -> Result<()> {
        if i <= self.n {
            Ok(())
        } else {
            Err(Error::StateOutOfRange { i, n: self.n })
        }
    }
}


/// An agent's position: `+1` buyer, `-1` seller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn value(self) -> i64 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn from_sign(x: f64) -> Option<Spin> {
        if x > 0.0 {
            Some(Spin::Up)
        } else if x < 0.0 {
            Some(Spin::Down)
        } else {
            None
        }
    }
}
