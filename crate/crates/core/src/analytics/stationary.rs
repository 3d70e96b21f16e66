use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelTable;
use crate::numeric::CompensatedSum;
use crate::params::Params;

/// Stationary law of the buyer count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

/// Detailed-balance solution of the birth-death chain,
/// `pi(i+1) / pi(i) = p_mp(i) / p_pm(i+1)`, accumulated in log space.
pub fn stationary_distribution(params: &Params) -> Result<StationaryDistribution> {
    StationaryDistribution::from_table(&KernelTable::new(params)?)
}

impl StationaryDistribution {
    pub fn from_table(table: &KernelTable) -> Result<Self> {
        let n = table.n();
        let mut log_weights = Vec::with_capacity(n + 1);
        log_weights.push(0.0);
        for i in 0..n {
            let up = table.get(i).p_mp;
            let down = table.get(i + 1).p_pm;
            if up <= 0.0 {
                return Err(Error::ZeroTransition { i });
            }
            if down <= 0.0 {
                return Err(Error::ZeroTransition { i: i + 1 });
            }
            log_weights.push(log_weights[i] + up.ln() - down.ln());
        }
        let peak = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = log_weights.iter().map(|w| (w - peak).exp()).collect();
        let total = weights.iter().copied().collect::<CompensatedSum>().value();
        Ok(StationaryDistribution { pi: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn n(&self) -> usize {
        self.pi.len() - 1
    }

    /// `argmax_{i < N/2} pi(i)`.
    pub fn lower_mode(&self) -> usize {
        let n = self.n();
        argmax(&self.pi, (0..=n).filter(|&i| 2 * i < n))
    }

    /// `argmax_{i > N/2} pi(i)`.
    pub fn upper_mode(&self) -> usize {
        let n = self.n();
        argmax(&self.pi, (0..=n).filter(|&i| 2 * i > n))
    }

    /// Strict interior local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        local_maxima(&self.pi)
    }

    /// `max_k |(pi P)(k) - pi(k)|`.
    pub fn residual(&self, table: &KernelTable) -> f64 {
        table.push_forward(&self.pi).iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max_i |pi(i) - pi(N - i)|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n();
        (0..=n).map(|i| (self.pi[i] - self.pi[n - i]).abs()).fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &[f64]) -> f64 {
        assert_eq!(other.len(), self.pi.len());
        0.5 * self.pi.iter().zip(other).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

fn argmax(values: &[f64], indices: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for i in indices {
        if best.is_none_or(|b| values[i] > values[b]) {
            best = Some(i);
        }
    }
    best.expect("nonempty index range")
}

pub(crate) fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1)).filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_properties_on_grid() {
        for alpha in [4.1, 5.0, 6.0] {
            let params = Params::new(128, 2, alpha, 1.0).unwrap();
            let table = KernelTable::new(&params).unwrap();
            let st = StationaryDistribution::from_table(&table).unwrap();
            let total: f64 = st.pi.iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(st.asymmetry() < 1e-10);
            assert!(st.residual(&table) < 1e-10);
            assert!(st.pi.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn trimodal_with_modes_at_43_and_85() {
        let st = stationary_distribution(&Params::new(128, 2, 6.0, 1.0).unwrap()).unwrap();
        assert_eq!(st.local_maxima(), vec![43, 64, 85]);
        assert_eq!(st.lower_mode(), 43);
        assert_eq!(st.upper_mode(), 85);
    }

    #[test]
    fn subcritical_zero_transition_is_reported() {
        // alpha < 2d: the unanimous state is absorbing
        let params = Params::new(20, 2, 1.0, 1.0).unwrap();
        assert!(matches!(stationary_distribution(&params), Err(Error::ZeroTransition { .. })));
    }
}
