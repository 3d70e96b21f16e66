//! Conditional drift and variance of one-step wealth increments.
//!
//! With `g = e^{2 lambda/N} - 1` and `q = e^{-2 lambda/N}`, an up move pays
//! `P g (2i - N + 1)` to the aggregate wealth and a down move pays
//! `-P g q (2i - N - 1)`.

use crate::error::{Error, Result};
use crate::kernel::{transition_probs, TransitionProbs};
use crate::params::{Params, Spin};

/// `e^{2 lambda / N} - 1`, the relative price change of an up move.
pub fn price_growth(params: &Params) -> f64 {
    (2.0 * params.lambda / params.n as f64).exp_m1()
}

fn discount(params: &Params) -> f64 {
    (-2.0 * params.lambda / params.n as f64).exp()
}

/// `[2i - N + 1] p_mp - e^{-2 lambda/N} [2i - N - 1] p_pm`.
pub fn bracket_from_probs(params: &Params, t: &TransitionProbs) -> f64 {
    let m = 2.0 * t.i as f64 - params.n as f64;
    (m + 1.0) * t.p_mp - discount(params) * (m - 1.0) * t.p_pm
}

/// Sign-determining factor of the aggregate drift; the full drift is this
/// times the positive `P (e^{2 lambda/N} - 1)`.
pub fn aggregate_drift_bracket(params: &Params, i: usize) -> Result<f64> {
    let t = transition_probs(params, i)?;
    Ok(bracket_from_probs(params, &t))
}

/// `E[W(k) - W(k-1) | state i, price]`.
pub fn aggregate_drift(params: &Params, i: usize, price: f64) -> Result<f64> {
    check_price(price)?;
    Ok(price * price_growth(params) * aggregate_drift_bracket(params, i)?)
}

/// Per-agent drift in the closed form
/// `spin P (1 - 1/N) g {p_mp - q p_pm}`.
///
/// This factorizes "holder not chosen" and "state moves" as independent
/// events; [`exact_local_drift`] conditions properly.
pub fn local_drift(params: &Params, i: usize, spin: Spin, price: f64) -> Result<f64> {
    check_price(price)?;
    let t = transition_probs(params, i)?;
    let n = params.n as f64;
    let brace = t.p_mp - discount(params) * t.p_pm;
    Ok(spin.as_f64() * price * (1.0 - 1.0 / n) * price_growth(params) * brace)
}

/// Exact per-agent drift: the holder earns nothing on epochs where it is the
/// chosen site, so the flip probability of its own spin class is reduced by
/// the share it would have contributed.
pub fn exact_local_drift(params: &Params, i: usize, spin: Spin, price: f64) -> Result<f64> {
    check_price(price)?;
    let t = transition_probs(params, i)?;
    let (up, down) = match spin {
        // holder is one of the i plus sites; it is the flipper with share 1/i
        Spin::Up => {
            if i == 0 {
                return Err(Error::InvalidParams("no + agent exists at state 0".into()));
            }
            (t.p_mp, t.p_pm * (1.0 - 1.0 / i as f64))
        }
        Spin::Down => {
            if i == params.n {
                return Err(Error::InvalidParams("no - agent exists at state N".into()));
            }
            (t.p_mp * (1.0 - 1.0 / (params.n - i) as f64), t.p_pm)
        }
    };
    Ok(spin.as_f64() * price * price_growth(params) * (up - discount(params) * down))
}

/// Variance of the aggregate wealth increment, in the three-term form
/// `P^2 g^2 {[2i-N+1]^2 p_mp(1-p_mp) + q^2 [2i-N-1]^2 p_pm(1-p_pm)
///  + 2 q p_mp p_pm ([2i-N]^2 - 1)}`.
pub fn variance_from_probs(params: &Params, t: &TransitionProbs, price: f64) -> f64 {
    let m = 2.0 * t.i as f64 - params.n as f64;
    let q = discount(params);
    let g = price_growth(params);
    let brace = (m + 1.0).powi(2) * t.p_mp * (1.0 - t.p_mp)
        + q * q * (m - 1.0).powi(2) * t.p_pm * (1.0 - t.p_pm)
        + 2.0 * q * t.p_mp * t.p_pm * (m * m - 1.0);
    (price * g).powi(2) * brace.max(0.0)
}

pub fn aggregate_variance(params: &Params, i: usize, price: f64) -> Result<f64> {
    check_price(price)?;
    let t = transition_probs(params, i)?;
    Ok(variance_from_probs(params, &t, price))
}

fn check_price(price: f64) -> Result<()> {
    if price.is_finite() && price > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("price must be positive and finite, got {price}")))
    }
}
