//! Directed crossings of a reference state and the durations between them.
//!
//! Epoch `k` is a crossing of `i` when `N+(k) = i` and the increments into
//! and out of `i` share a sign, `xbar(k) * xbar(k+1) > 0`. Reflections and
//! holds do not count, and the last epoch of a path can never qualify.
//! Sojourn times are differences of consecutive crossing epochs, and their
//! tail is modeled as `S(t) ~ exp(C3 t^3 + C2 t^2 + C1 t + C0)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub epoch: u64,
    pub time: f64,
    /// Sign of the increments through the reference state.
    pub direction: i8,
}

/// Crossings of `reference`, in increasing epoch order.
pub fn detect_crossings(path: &Trajectory, reference: usize) -> Vec<CrossingEvent> {
    let target = reference as u32;
    (0..path.len().saturating_sub(1))
        .filter(|&k| path.states[k] == target && path.xbar[k] * path.xbar[k + 1] > 0)
        .map(|k| CrossingEvent { epoch: k as u64 + 1, time: path.times[k], direction: path.xbar[k] })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SojournSample {
    pub reference: usize,
    /// 1-based index of the sample along the path.
    pub index: usize,
    pub epochs: u64,
    pub time: f64,
    /// Direction of the crossing that closes the sample.
    pub direction: i8,
}

/// Durations between consecutive crossings of `reference`.
pub fn sojourn_samples(path: &Trajectory, reference: usize) -> Result<Vec<SojournSample>> {
    let crossings = detect_crossings(path, reference);
    if crossings.len() < 2 {
        return Err(Error::InsufficientCrossings { found: crossings.len() });
    }
    Ok(crossings
        .windows(2)
        .enumerate()
        .map(|(k, w)| SojournSample {
            reference,
            index: k + 1,
            epochs: w[1].epoch - w[0].epoch,
            time: w[1].time - w[0].time,
            direction: w[1].direction,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DurationUnit {
    Epochs,
    Time,
}

/// Durations in the requested unit, after dropping the first `discard`
/// samples as transient.
pub fn pooled_durations(samples: &[SojournSample], unit: DurationUnit, discard: usize) -> Vec<f64> {
    samples
        .iter()
        .skip(discard)
        .map(|s| match unit {
            DurationUnit::Epochs => s.epochs as f64,
            DurationUnit::Time => s.time,
        })
        .collect()
}

/// Right-continuous empirical survival function `S(t) = #{x > t} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSurvival {
    sorted: Vec<f64>,
}

impl EmpiricalSurvival {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        EmpiricalSurvival { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let at_or_below = self.sorted.partition_point(|&x| x <= t);
        (self.sorted.len() - at_or_below) as f64 / self.sorted.len() as f64
    }

    /// Linear-interpolation quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        self.sorted[lo] + (pos - lo as f64) * (self.sorted[hi] - self.sorted[lo])
    }
}

/// Evaluation grid for the tail fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub lower_quantile: f64,
    pub upper_quantile: f64,
    /// Smallest survival value kept; `None` means `5 / n`.
    pub survival_floor: Option<f64>,
    pub min_samples: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 50, lower_quantile: 0.05, upper_quantile: 0.99, survival_floor: None, min_samples: 200 }
    }
}

impl GridSpec {
    /// Log-spaced grid between the configured quantiles.
    pub fn grid(&self, survival: &EmpiricalSurvival) -> Vec<f64> {
        let positive_min = survival.sorted.iter().copied().find(|&x| x > 0.0).unwrap_or(f64::MIN_POSITIVE);
        let lo = survival.quantile(self.lower_quantile).max(positive_min);
        let hi = survival.quantile(self.upper_quantile);
        if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) || self.points < 2 {
            return vec![lo];
        }
        let (a, b) = (lo.ln(), hi.ln());
        let steps = (self.points - 1) as f64;
        (0..self.points).map(|k| (a + (b - a) * k as f64 / steps).exp()).collect()
    }
}

/// `log S(t) ~ C0 + C1 t + C2 t^2 + C3 t^3` on `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// `[C0, C1, C2, C3]`.
    pub coefficients: [f64; 4],
    pub t_min: f64,
    pub t_max: f64,
    pub rss: f64,
    pub samples: usize,
    pub grid_points: usize,
}

impl TailFit {
    pub fn log_survival(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coefficients;
        c0 + t * (c1 + t * (c2 + t * c3))
    }
}

/// Least-squares cubic fit of the log empirical survival of `durations`.
pub fn fit_log_tail(durations: &[f64], spec: &GridSpec) -> Result<TailFit> {
    if durations.len() < spec.min_samples.max(1) {
        return Err(Error::InsufficientSamples { found: durations.len(), required: spec.min_samples });
    }
    let survival = EmpiricalSurvival::new(durations);
    let floor = spec.survival_floor.unwrap_or(5.0 / durations.len() as f64);
    let points: Vec<(f64, f64)> = spec
        .grid(&survival)
        .into_iter()
        .map(|t| (t, survival.eval(t)))
        .filter(|&(_, s)| s >= floor && s > 0.0)
        .collect();
    if points.len() < 4 {
        return Err(Error::DegenerateGrid { points: points.len() });
    }
    let t_min = points[0].0;
    let t_max = points[points.len() - 1].0;
    // fit in s = t / t_max to keep the design matrix well conditioned
    let design = DMatrix::from_fn(points.len(), 4, |r, c| (points[r].0 / t_max).powi(c as i32));
    let target = DVector::from_iterator(points.len(), points.iter().map(|&(_, s)| s.ln()));
    let scaled = design.svd(true, true).solve(&target, 1e-12).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut coefficients = [0.0; 4];
    for (k, c) in coefficients.iter_mut().enumerate() {
        *c = scaled[k] / t_max.powi(k as i32);
    }
    let mut fit = TailFit { coefficients, t_min, t_max, rss: 0.0, samples: durations.len(), grid_points: points.len() };
    fit.rss = points.iter().map(|&(t, s)| (s.ln() - fit.log_survival(t)).powi(2)).sum();
    Ok(fit)
}
