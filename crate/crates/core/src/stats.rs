//! Small statistics helpers used by the Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Streaming central moments up to fourth order, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + delta * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Moments { n: self.n + other.n, mean, m2, m3, m4 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance `m2 / n`.
    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    pub fn standard_error_of_mean(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the variance estimate,
    /// `sqrt((mu4 - sigma^4) / n)`.
    pub fn standard_error_of_variance(&self) -> f64 {
        let n = self.n as f64;
        let mu4 = self.m4 / n;
        let s2 = self.variance();
        ((mu4 - s2 * s2).max(0.0) / n).sqrt()
    }
}

/// Pearson chi-square goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of `observed` counts against category probabilities.
///
/// Categories with zero expected probability are dropped; any observation in
/// such a category makes the p-value 0.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let nf = total as f64;
    let mut statistic = 0.0;
    let mut used = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return ChiSquareTest { statistic: f64::INFINITY, dof: 0, p_value: 0.0 };
            }
            continue;
        }
        let e = nf * p;
        statistic += (o as f64 - e).powi(2) / e;
        used += 1;
    }
    let dof = used.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive dof");
        1.0 - dist.cdf(statistic)
    };
    ChiSquareTest { statistic, dof, p_value }
}

/// Normalized histogram of `values` over `0..=max`.
pub fn occupancy(values: impl IntoIterator<Item = usize>, max: usize) -> Vec<f64> {
    let mut counts = vec![0u64; max + 1];
    let mut total = 0u64;
    for v in values {
        counts[v] += 1;
        total += 1;
    }
    counts.into_iter().map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect()
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
