use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::numeric::{CompensatedSum, INTEGER_TOLERANCE};
use crate::params::{Params, Phase, Spin};

/// Full agent configuration plus price and wealth bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    /// One spin per site; empty when driven by the reduced chain.
    pub spins: Vec<Spin>,
    pub n_plus: usize,
    pub log_price: f64,
    wealth: CompensatedSum,
    pub agent_wealth: Option<Vec<f64>>,
    /// Agents whose spin never changes (diagnostic only, breaks the dynamics).
    pinned: Vec<bool>,
    pub epoch: u64,
    pub time: f64,
    scratch: Vec<usize>,
}

impl MarketState {
    pub fn from_spins(params: &Params, spins: Vec<Spin>) -> Self {
        assert_eq!(spins.len(), params.n, "one spin per site");
        let n_plus = spins.iter().filter(|&&s| s == Spin::Up).count();
        MarketState {
            log_price: crate::analytics::log_price(params, n_plus),
            spins,
            n_plus,
            wealth: CompensatedSum::new(0.0),
            agent_wealth: None,
            pinned: Vec::new(),
            epoch: 0,
            time: 0.0,
            scratch: Vec::with_capacity(params.degree()),
        }
    }

    /// Uniformly random arrangement of `n_plus` buyers.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, params: &Params, n_plus: usize) -> Self {
        assert!(n_plus <= params.n);
        let mut spins: Vec<Spin> = (0..params.n).map(|k| if k < n_plus { Spin::Up } else { Spin::Down }).collect();
        spins.shuffle(rng);
        Self::from_spins(params, spins)
    }

    /// State carrying only the buyer count, for the reduced chain.
    pub fn reduced(params: &Params, n_plus: usize) -> Self {
        assert!(n_plus <= params.n);
        MarketState {
            spins: Vec::new(),
            n_plus,
            log_price: crate::analytics::log_price(params, n_plus),
            wealth: CompensatedSum::new(0.0),
            agent_wealth: None,
            pinned: Vec::new(),
            epoch: 0,
            time: 0.0,
            scratch: Vec::new(),
        }
    }

    pub fn with_wealth(mut self, initial: f64) -> Self {
        self.wealth = CompensatedSum::new(initial);
        self
    }

    /// Starts per-agent wealth tracking from the given initial capital.
    pub fn with_agent_capital(mut self, capital: Vec<f64>) -> Self {
        assert_eq!(capital.len(), self.spins.len());
        self.agent_wealth = Some(capital);
        self
    }

    pub fn pin(&mut self, agent: usize) {
        if self.pinned.is_empty() {
            self.pinned = vec![false; self.spins.len()];
        }
        self.pinned[agent] = true;
    }

    pub fn wealth(&self) -> f64 {
        self.wealth.value()
    }

    pub(crate) fn add_wealth(&mut self, dw: f64) {
        self.wealth.add(dw);
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }
}

/// Fills `out` with `size` distinct sites drawn uniformly from
/// `{0..n_sites} \ {x}`, in draw order.
pub fn sample_neighborhood_into<R: Rng + ?Sized>(
    rng: &mut R,
    n_sites: usize,
    size: usize,
    x: usize,
    out: &mut Vec<usize>,
) {
    assert!(size < n_sites, "need at least {} other sites", size);
    out.clear();
    while out.len() < size {
        let r = rng.random_range(0..n_sites - 1);
        let y = if r >= x { r + 1 } else { r };
        if !out.contains(&y) {
            out.push(y);
        }
    }
}

/// Fresh neighborhood of `2d` distinct sites other than `x`.
pub fn sample_neighborhood<R: Rng + ?Sized>(rng: &mut R, params: &Params, x: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(params.degree());
    sample_neighborhood_into(rng, params.n, params.degree(), x, &mut out);
    out
}

/// Interaction potential of site `x`:
/// sum of neighbor spins minus `alpha * spin(x) * |M| / N`.
pub fn local_field(params: &Params, state: &MarketState, x: usize, neighborhood: &[usize]) -> f64 {
    let local: i64 = neighborhood.iter().map(|&y| state.spins[y].value()).sum();
    let magnetization = (2 * state.n_plus as i64 - params.n as i64).abs() as f64;
    local as f64 - params.alpha * state.spins[x].as_f64() * magnetization / params.n as f64
}

/// Result of one lattice update before it is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub agent: usize,
    pub old_spin: Spin,
    pub new_spin: Spin,
    pub field: f64,
}

impl StepOutcome {
    /// Change in the buyer count.
    pub fn xbar(&self) -> i8 {
        match (self.old_spin, self.new_spin) {
            (Spin::Down, Spin::Up) => 1,
            (Spin::Up, Spin::Down) => -1,
            _ => 0,
        }
    }
}

/// Draws the chosen agent, its neighborhood and its new spin without
/// mutating the configuration.
pub(crate) fn propose<R: Rng + ?Sized>(
    rng: &mut R,
    params: &Params,
    state: &MarketState,
    scratch: &mut Vec<usize>,
) -> StepOutcome {
    let agent = rng.random_range(0..params.n);
    sample_neighborhood_into(rng, params.n, params.degree(), agent, scratch);
    let field = local_field(params, state, agent, scratch);
    let old_spin = state.spins[agent];
    let new_spin = if state.pinned.get(agent).copied().unwrap_or(false) {
        old_spin
    } else {
        match params.phase {
            // zero field keeps the current spin, matching the kernel
            Phase::Frozen if field.abs() <= INTEGER_TOLERANCE => old_spin,
            Phase::Frozen => Spin::from_sign(field).expect("nonzero field"),
            Phase::FiniteTemperature { beta } => {
                let p_up = 1.0 / (1.0 + (-2.0 * beta * field).exp());
                if rng.random::<f64>() < p_up {
                    Spin::Up
                } else {
                    Spin::Down
                }
            }
        }
    };
    StepOutcome { agent, old_spin, new_spin, field }
}

/// Price change `P(k-1) (e^{2 lambda xbar / N} - 1)`.
pub(crate) fn price_change(params: &Params, log_price: f64, xbar: i8) -> f64 {
    if xbar == 0 {
        return 0.0;
    }
    log_price.exp() * (2.0 * params.lambda * xbar as f64 / params.n as f64).exp_m1()
}

/// Aggregate wealth change `dP (2 N+(k-1) - N + xbar)`.
pub(crate) fn wealth_change(params: &Params, n_plus_before: usize, xbar: i8, dp: f64) -> f64 {
    dp * (2.0 * n_plus_before as f64 - params.n as f64 + xbar as f64)
}

/// Applied lattice update, as seen by the path recorder.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Applied {
    pub agent: usize,
    pub before: usize,
    pub xbar: i8,
    pub dp: f64,
    pub dw: f64,
}

pub(crate) fn apply<R: Rng + ?Sized>(
    rng: &mut R,
    params: &Params,
    state: &mut MarketState,
    outcome: &StepOutcome,
) -> Applied {
    let before = state.n_plus;
    let xbar = outcome.xbar();
    let dp = price_change(params, state.log_price, xbar);
    let dw = wealth_change(params, before, xbar, dp);
    if let Some(wealth) = state.agent_wealth.as_mut() {
        if dp != 0.0 {
            // every agent except the chosen one earns spin(k-1) * dP
            for (y, (w, s)) in wealth.iter_mut().zip(&state.spins).enumerate() {
                if y != outcome.agent {
                    *w += s.as_f64() * dp;
                }
            }
        }
    }
    state.spins[outcome.agent] = outcome.new_spin;
    state.n_plus = (before as i64 + xbar as i64) as usize;
    state.log_price = crate::analytics::log_price(params, state.n_plus);
    state.add_wealth(dw);
    advance_clock(rng, state);
    Applied { agent: outcome.agent, before, xbar, dp, dw }
}

pub(crate) fn advance_clock<R: Rng + ?Sized>(rng: &mut R, state: &mut MarketState) {
    let gap: f64 = rng.sample(Exp1);
    state.epoch += 1;
    state.time += gap;
}

/// One full lattice epoch; returns `(chosen agent, xbar, aggregate dW)`.
pub fn step_lattice<R: Rng + ?Sized>(rng: &mut R, params: &Params, state: &mut MarketState) -> (usize, i8, f64) {
    let mut scratch = std::mem::take(&mut state.scratch);
    let outcome = propose(rng, params, state, &mut scratch);
    state.scratch = scratch;
    let applied = apply(rng, params, state, &outcome);
    (applied.agent, applied.xbar, applied.dw)
}
