use crate::error::Result;
use crate::kernel::transition_probs;
use crate::params::Params;

/// `log P = lambda (2i - N) / N`.
pub fn log_price(params: &Params, i: usize) -> f64 {
    params.lambda * (2.0 * i as f64 - params.n as f64) / params.n as f64
}

pub fn price(params: &Params, i: usize) -> f64 {
    log_price(params, i).exp()
}

/// Traded volume `max(N+, N-)`.
pub fn volume(params: &Params, i: usize) -> usize {
    let n = params.n;
    let v = i.max(n - i);
    debug_assert_eq!(2 * v, (2 * i).abs_diff(n) + n);
    v
}

/// Conditional volatility of the one-step log return in the printed form
/// `(2 lambda / N) sqrt(P(X = 0) P(X = 1))` with `X = |N+(k) - N+(k-1)|`.
pub fn conditional_volatility(params: &Params, i: usize) -> Result<f64> {
    let t = transition_probs(params, i)?;
    let moves = t.moves().min(1.0);
    let holds = 1.0 - moves;
    Ok(2.0 * params.lambda / params.n as f64 * (holds * moves).sqrt())
}

/// Exact conditional standard deviation of the one-step log return
/// `(2 lambda / N) Xbar`, for comparison with [`conditional_volatility`].
pub fn exact_log_return_sd(params: &Params, i: usize) -> Result<f64> {
    let t = transition_probs(params, i)?;
    let mean = t.p_mp - t.p_pm;
    let var = (t.moves() - mean * mean).max(0.0);
    Ok(2.0 * params.lambda / params.n as f64 * var.sqrt())
}
