//! One-step Monte Carlo estimates from a fixed buyer count.
//!
//! Trials are split into fixed-size chunks; chunk `c` draws from stream `c`
//! of the master seed and builds its own random arrangement of the given
//! count. Chunk results are merged in index order, so sequential and
//! parallel execution agree bit for bit.

use crate::error::Result;
use crate::kernel::{transition_probs, TransitionProbs};
use crate::par::{map_indexed, Exec};
use crate::params::{Params, Spin};
use crate::sim::lattice::{price_change, propose, wealth_change, MarketState};
use crate::sim::reduced::step_reduced;
use crate::sim::rng::stream_rng;
use crate::stats::{chi_square_test, ChiSquareTest, Moments};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub exec: Exec,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { trials: 1_000_000, seed: 0, chunk_size: 1 << 16, exec: Exec::default() }
    }
}

impl McConfig {
    fn chunks(&self) -> Vec<u64> {
        let size = self.chunk_size.max(1);
        let full = self.trials / size;
        let mut out = vec![size; full as usize];
        if !self.trials.is_multiple_of(size) {
            out.push(self.trials % size);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OneStepStats {
    /// Counts of `xbar = -1, 0, +1`.
    pub counts: [u64; 3],
    /// Aggregate wealth increment.
    pub dw: Moments,
    /// Wealth increment of a fixed holder, when one was requested.
    pub holder_dw: Option<Moments>,
}

impl OneStepStats {
    fn record(&mut self, xbar: i8, dw: f64, holder: Option<f64>) {
        self.counts[(xbar + 1) as usize] += 1;
        self.dw.push(dw);
        if let (Some(m), Some(h)) = (self.holder_dw.as_mut(), holder) {
            m.push(h);
        }
    }

    fn merge(&self, other: &OneStepStats) -> OneStepStats {
        OneStepStats {
            counts: [
                self.counts[0] + other.counts[0],
                self.counts[1] + other.counts[1],
                self.counts[2] + other.counts[2],
            ],
            dw: self.dw.merge(&other.dw),
            holder_dw: match (self.holder_dw, other.holder_dw) {
                (Some(a), Some(b)) => Some(a.merge(&b)),
                (a, b) => a.or(b),
            },
        }
    }

    pub fn trials(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Pearson test of the increment counts against a kernel row.
    pub fn chi_square(&self, t: &TransitionProbs) -> ChiSquareTest {
        chi_square_test(&self.counts, &[t.p_pm, t.hold(), t.p_mp])
    }
}

fn run_chunks(cfg: &McConfig, body: impl Fn(u64, u64) -> OneStepStats + Sync + Send) -> OneStepStats {
    let chunks = cfg.chunks();
    map_indexed(cfg.exec, chunks.len(), |c| body(c as u64, chunks[c]))
        .iter()
        .fold(OneStepStats::default(), |acc, s| acc.merge(s))
}

/// One lattice epoch from `i` buyers, repeated `cfg.trials` times without
/// applying the update. With `holder`, a fixed agent of that spin is
/// followed as well.
pub fn lattice_one_step(params: &Params, i: usize, holder: Option<Spin>, cfg: &McConfig) -> Result<OneStepStats> {
    params.validate()?;
    params.check_state(i)?;
    let n = params.n;
    if holder == Some(Spin::Up) && i == 0 || holder == Some(Spin::Down) && i == n {
        return Err(crate::Error::InvalidParams(format!("no holder of spin {holder:?} at state {i}")));
    }
    Ok(run_chunks(cfg, |c, trials| {
        let mut rng = stream_rng(cfg.seed, c);
        let state = MarketState::random(&mut rng, params, i);
        let holder_idx = holder.map(|s| state.spins.iter().position(|&x| x == s).expect("holder exists"));
        let mut stats = OneStepStats { holder_dw: holder.map(|_| Moments::default()), ..Default::default() };
        let mut scratch = Vec::with_capacity(params.degree());
        for _ in 0..trials {
            let outcome = propose(&mut rng, params, &state, &mut scratch);
            let xbar = outcome.xbar();
            let dp = price_change(params, state.log_price, xbar);
            let dw = wealth_change(params, i, xbar, dp);
            let h = holder_idx.map(|y| if y == outcome.agent { 0.0 } else { state.spins[y].as_f64() * dp });
            stats.record(xbar, dw, h);
        }
        stats
    }))
}

/// One reduced-chain epoch from `i`, repeated `cfg.trials` times.
pub fn reduced_one_step(params: &Params, i: usize, cfg: &McConfig) -> Result<OneStepStats> {
    let t = transition_probs(params, i)?;
    let log_price = crate::analytics::log_price(params, i);
    Ok(run_chunks(cfg, |c, trials| {
        let mut rng = stream_rng(cfg.seed, c);
        let mut stats = OneStepStats::default();
        for _ in 0..trials {
            let xbar = step_reduced(&mut rng, &t);
            let dw = wealth_change(params, i, xbar, price_change(params, log_price, xbar));
            stats.record(xbar, dw, None);
        }
        stats
    }))
}
