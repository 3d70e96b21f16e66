//! Binomial coefficients, hypergeometric weights and compensated sums.

use statrs::function::factorial::ln_binomial;

/// Tolerance used when a real quantity is compared against an integer.
pub const INTEGER_TOLERANCE: f64 = 1e-9;

/// Exact `C(n, k)` for nonnegative arguments, or `None` on `u128` overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for step in 0..k {
        // acc * (n - step) / (step + 1) stays integral at every step
        acc = acc.checked_mul(u128::from(n - step))? / u128::from(step + 1);
    }
    Some(acc)
}

/// `C(n, k)` with the convention that it vanishes for `k < 0`, `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return 0.0;
    }
    match binomial_exact(n as u64, k as u64) {
        Some(c) => c as f64,
        None => ln_binomial_approx(n as u64, k as u64).exp(),
    }
}

/// Largest lower argument for which [`ln_binomial_approx`] sums logs of
/// ratios directly instead of going through log-gamma.
const DIRECT_PRODUCT_LIMIT: u64 = 64;

/// `ln C(n, k)` for arguments too large for exact integers. Small `k` (the
/// neighborhood draws) sums `ln((n - k + m) / m)`, which stays within a few
/// ulps; otherwise falls back to log-gamma.
fn ln_binomial_approx(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    if k <= DIRECT_PRODUCT_LIMIT {
        (1..=k).map(|m| ((n - k + m) as f64 / m as f64).ln()).collect::<CompensatedSum>().value()
    } else {
        ln_binomial(n, k)
    }
}

/// Probability of exactly `k` marked items in `draws` draws without
/// replacement from a population of `population` containing `marked` marked
/// items. Out-of-range arguments give 0.
pub fn hypergeometric(population: i64, marked: i64, draws: i64, k: i64) -> f64 {
    if population < 0 || marked < 0 || marked > population || draws < 0 || draws > population {
        return 0.0;
    }
    let unmarked = population - marked;
    if k < 0 || k > marked || draws - k < 0 || draws - k > unmarked {
        return 0.0;
    }
    let exact = (
        binomial_exact(marked as u64, k as u64),
        binomial_exact(unmarked as u64, (draws - k) as u64),
        binomial_exact(population as u64, draws as u64),
    );
    match exact {
        (Some(a), Some(b), Some(total)) => (a as f64) * (b as f64) / (total as f64),
        _ => {
            let log = ln_binomial_approx(marked as u64, k as u64)
                + ln_binomial_approx(unmarked as u64, (draws - k) as u64)
                - ln_binomial_approx(population as u64, draws as u64);
            log.exp()
        }
    }
}

/// Ceiling that snaps values within [`INTEGER_TOLERANCE`] of an integer onto
/// that integer, so `ceil(2.0000000000001)` is 2 rather than 3.
pub fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < INTEGER_TOLERANCE {
        r
    } else {
        x.ceil()
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new(initial: f64) -> Self {
        CompensatedSum { sum: initial, compensation: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
