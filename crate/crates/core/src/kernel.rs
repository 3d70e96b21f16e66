//! One-step transition probabilities of the buyer-count chain in the frozen
//! phase.
//!
//! A `+` site with `j` positive neighbors out of `2d` has field
//! `h = 2j - 2d - 2a` where `a = alpha |i/N - 1/2|`; it keeps its spin when
//! `h >= 0`, i.e. `j >= d + ceil(a)`. A `-` site keeps its spin when `h <= 0`,
//! i.e. `j <= d - ceil(a)`. Zero fields therefore never flip a spin, and the
//! lattice simulator applies the same rule.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numeric::{ceil_snapped, hypergeometric, CompensatedSum, INTEGER_TOLERANCE};
use crate::par::{map_indexed, Exec};
use crate::params::Params;

/// One-step probabilities at state `i`.
///
/// `p_pp + p_pm = i/N` and `p_mm + p_mp = 1 - i/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionProbs {
    pub i: usize,
    /// Chosen site is `+` and stays `+`.
    pub p_pp: f64,
    /// Chosen site is `-` and stays `-`.
    pub p_mm: f64,
    /// Chosen `+` flips to `-` (`i -> i - 1`).
    pub p_pm: f64,
    /// Chosen `-` flips to `+` (`i -> i + 1`).
    pub p_mp: f64,
}

impl TransitionProbs {
    pub fn down(&self) -> f64 {
        self.p_pm
    }

    pub fn up(&self) -> f64 {
        self.p_mp
    }

    pub fn hold(&self) -> f64 {
        self.p_pp + self.p_mm
    }

    /// Probability that the state moves, `P(|X| = 1)`.
    pub fn moves(&self) -> f64 {
        self.p_pm + self.p_mp
    }
}

/// `alpha |i/N - 1/2|` as a real number.
fn global_pressure(params: &Params, i: usize) -> f64 {
    let n = params.n as f64;
    params.alpha * (2.0 * i as f64 - n).abs() / (2.0 * n)
}

/// `c = ceil(alpha |i/N - 1/2|)`, with near-integer values snapped.
pub fn threshold_c(params: &Params, i: usize) -> usize {
    ceil_snapped(global_pressure(params, i)) as usize
}

/// Whether `i` lies in the closed band `[N(1/2 - d/alpha), N(1/2 + d/alpha)]`
/// where the global term cannot force every update to flip.
pub fn in_band(params: &Params, i: usize) -> bool {
    global_pressure(params, i) <= params.d as f64 + INTEGER_TOLERANCE
}

/// Probability that a `+` site sees exactly `j` positive spins among its `2d`
/// sampled neighbors when the chain is at state `i`.
pub fn neighbor_count_pmf_plus(params: &Params, i: usize, j: i64) -> f64 {
    hypergeometric(params.n as i64 - 1, i as i64 - 1, params.degree() as i64, j)
}

/// Probability that a `-` site sees exactly `j` positive spins among its `2d`
/// sampled neighbors when the chain is at state `i`.
pub fn neighbor_count_pmf_minus(params: &Params, i: usize, j: i64) -> f64 {
    hypergeometric(params.n as i64 - 1, i as i64, params.degree() as i64, j)
}

fn sum_pmf(lo: i64, hi: i64, pmf: impl Fn(i64) -> f64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    (lo..=hi).map(pmf).collect::<CompensatedSum>().value()
}

/// Exact frozen-phase transition probabilities at state `i`.
pub fn transition_probs(params: &Params, i: usize) -> Result<TransitionProbs> {
    params.require_frozen()?;
    params.check_state(i)?;
    Ok(transition_probs_unchecked(params, i))
}

fn transition_probs_unchecked(params: &Params, i: usize) -> TransitionProbs {
    let n = params.n as i64;
    let d = params.d as i64;
    let ii = i as i64;
    let frac_plus = i as f64 / params.n as f64;
    let frac_minus = (params.n - i) as f64 / params.n as f64;

    let (p_pp, p_mm) = if in_band(params, i) {
        let c = threshold_c(params, i) as i64;
        let stay_plus =
            sum_pmf((d + c).max(ii + 2 * d - n), (2 * d).min(ii), |j| neighbor_count_pmf_plus(params, i, j));
        let stay_minus = sum_pmf(0.max(ii + 2 * d - n), (d - c).min(ii), |j| neighbor_count_pmf_minus(params, i, j));
        (frac_plus * stay_plus, frac_minus * stay_minus)
    } else {
        (0.0, 0.0)
    };

    TransitionProbs { i, p_pp, p_mm, p_pm: (frac_plus - p_pp).max(0.0), p_mp: (frac_minus - p_mm).max(0.0) }
}

/// Transition probabilities for every state `0..=N`, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    params: Params,
    rows: Vec<TransitionProbs>,
}

impl KernelTable {
    pub fn new(params: &Params) -> Result<Self> {
        Self::build(params, Exec::default())
    }

    pub fn build(params: &Params, exec: Exec) -> Result<Self> {
        params.require_frozen()?;
        let rows = map_indexed(exec, params.n + 1, |i| transition_probs_unchecked(params, i));
        Ok(KernelTable { params: *params, rows })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn get(&self, i: usize) -> &TransitionProbs {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[TransitionProbs] {
        &self.rows
    }

    /// `p_mp(i) > 0` for all `i < N` and `p_pm(i) > 0` for all `i > 0`.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        self.rows.iter().all(|t| (t.i == n || t.p_mp > 0.0) && (t.i == 0 || t.p_pm > 0.0))
    }

    /// Row vector times the one-step matrix: `(mu P)(k)`.
    pub fn push_forward(&self, mu: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(mu.len(), n + 1);
        let mut out = vec![0.0; n + 1];
        for (i, t) in self.rows.iter().enumerate() {
            out[i] += mu[i] * t.hold();
            if i > 0 {
                out[i - 1] += mu[i] * t.p_pm;
            }
            if i < n {
                out[i + 1] += mu[i] * t.p_mp;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, d: usize, alpha: f64) -> Params {
        Params::new(n, d, alpha, 1.0).unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_c(&params(128, 2, 4.1), 64), 0);
        assert_eq!(threshold_c(&params(128, 2, 4.1), 33), 1);
        assert_eq!(threshold_c(&params(128, 2, 5.0), 128), 3);
    }

    #[test]
    fn threshold_exact_integer_not_perturbed() {
        // 6 * |32/128 - 1/2| = 1.5, 4 * |32/128 - 1/2| = 1 exactly
        assert_eq!(threshold_c(&params(128, 2, 4.0 + 1e-15), 32), 1);
        assert_eq!(threshold_c(&params(10, 1, 3.0), 0), 2);
        // 0.1 * 3 style rounding: 2.4 * |2/12 - 1/2| = 0.8; 3 * |2/12 - 1/2| = 1
        assert_eq!(threshold_c(&params(12, 1, 3.0), 2), 1);
    }

    #[test]
    fn pmf_examples() {
        let p = params(128, 2, 5.0);
        assert_eq!(neighbor_count_pmf_plus(&p, 1, 0), 1.0);
        assert_eq!(neighbor_count_pmf_plus(&p, 64, 5), 0.0);
        let small = params(6, 1, 3.0);
        assert!((neighbor_count_pmf_plus(&small, 3, 1) - 0.6).abs() < 1e-15);
        assert_eq!(neighbor_count_pmf_minus(&p, 128, 0), 0.0);
    }

    #[test]
    fn out_of_band_state() {
        let p = params(128, 2, 5.0);
        let t = transition_probs(&p, 120).unwrap();
        assert_eq!(t.p_pp, 0.0);
        assert_eq!(t.p_mm, 0.0);
        assert_eq!(t.p_pm, 120.0 / 128.0);
        assert_eq!(t.p_mp, 8.0 / 128.0);
        assert!(!in_band(&p, 120));
        assert!(in_band(&p, 115));
        assert!(!in_band(&p, 116));
        assert!(!in_band(&p, 12));
        assert!(in_band(&p, 13));
    }

    #[test]
    fn band_endpoints_are_closed() {
        // N(1/2 +- d/alpha) = 12 * (1/2 +- 1/3) = 2 and 10, both integers
        let p = params(12, 1, 3.0);
        assert!(in_band(&p, 2));
        assert!(in_band(&p, 10));
        assert!(!in_band(&p, 1));
        assert!(!in_band(&p, 11));
        // at the endpoint c = d, so a + site stays only with a unanimous neighborhood
        let t = transition_probs(&p, 10).unwrap();
        let unanimous = neighbor_count_pmf_plus(&p, 10, 2);
        assert!((t.p_pp - 10.0 / 12.0 * unanimous).abs() < 1e-15);
    }

    #[test]
    fn balanced_state_is_symmetric() {
        let t = transition_probs(&params(128, 2, 5.0), 64).unwrap();
        assert!((t.p_pm - t.p_mp).abs() < 1e-15);
    }

    #[test]
    fn boundary_states_escape() {
        let p = params(128, 2, 5.0);
        let top = transition_probs(&p, 128).unwrap();
        assert_eq!(top.p_mp, 0.0);
        assert_eq!(top.p_pm, 1.0);
        let bottom = transition_probs(&p, 0).unwrap();
        assert_eq!(bottom.p_pm, 0.0);
        assert_eq!(bottom.p_mp, 1.0);
    }

    #[test]
    fn rejects_finite_temperature_and_bad_state() {
        let p = Params::with_phase(128, 2, 5.0, 1.0, crate::Phase::FiniteTemperature { beta: 1.0 }).unwrap();
        assert!(transition_probs(&p, 3).is_err());
        assert!(transition_probs(&params(128, 2, 5.0), 129).is_err());
    }

    #[test]
    fn irreducible_on_test_grid() {
        for alpha in [4.1, 5.0, 6.0] {
            let table = KernelTable::new(&params(128, 2, alpha)).unwrap();
            assert!(table.is_irreducible(), "alpha = {alpha}");
        }
    }

    #[test]
    fn lambda_does_not_enter_kernel() {
        let a = KernelTable::new(&Params::new(128, 2, 4.1, 1.0).unwrap()).unwrap();
        let b = KernelTable::new(&Params::new(128, 2, 4.1, 64.0).unwrap()).unwrap();
        assert_eq!(a.rows(), b.rows());
    }

    #[test]
    fn sequential_and_parallel_tables_match() {
        let p = params(300, 2, 4.5);
        assert_eq!(KernelTable::build(&p, Exec::Sequential).unwrap(), KernelTable::build(&p, Exec::Parallel).unwrap());
    }
}
