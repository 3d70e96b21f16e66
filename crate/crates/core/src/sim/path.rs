use serde::{Deserialize, Serialize};

use crate::analytics::{martingale_regions, volume};
use crate::error::{Error, Result};
use crate::kernel::KernelTable;
use crate::params::Params;
use crate::sim::lattice::{self, MarketState};
use crate::sim::reduced::step_reduced;
use crate::sim::rng::{stream_rng, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fidelity {
    /// Individual spins with per-update random neighborhoods.
    Lattice,
    /// Buyer count sampled from the exact kernel.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    /// `N / 2` buyers (rounded down), uniformly arranged.
    Half,
    Count(usize),
}

impl InitialState {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            InitialState::Half => n / 2,
            InitialState::Count(i) => i,
        }
    }
}

/// Crossing of a submartingale boundary: between `g1 - 1` and `g1`, or
/// between `g4` and `g4 + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    G1,
    G4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub fidelity: Fidelity,
    pub initial: InitialState,
    /// Agents whose individual wealth increments are recorded.
    pub watch: Vec<usize>,
    /// Agents held at their initial spin. Diagnostic only: it changes the
    /// dynamics.
    pub pinned: Vec<usize>,
    /// Record every k-th epoch in addition to every epoch that moves.
    pub record_every: u64,
    /// Initial capital of every agent, when per-agent wealth is tracked.
    pub agent_capital: Option<f64>,
    pub initial_wealth: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            fidelity: Fidelity::Lattice,
            initial: InitialState::Half,
            watch: Vec::new(),
            pinned: Vec::new(),
            record_every: 1,
            agent_capital: None,
            initial_wealth: 0.0,
        }
    }
}

/// One simulated epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub epoch: u64,
    pub time: f64,
    /// Chosen agent; `None` on the reduced chain.
    pub agent: Option<usize>,
    pub state_before: usize,
    pub state_after: usize,
    pub xbar: i8,
    /// `|xbar|`.
    pub x_abs: u8,
    /// `|2 N+ - N|` after the step.
    pub y_abs: usize,
    pub volume: usize,
    pub log_price: f64,
    pub delta_w: f64,
    pub wealth: f64,
    /// Wealth increments of the watched agents, in watch order.
    pub agent_delta_w: Vec<f64>,
    pub crossing: Option<Crossing>,
}

/// Dense record of a path: one entry per epoch `1..=len`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub initial_state: usize,
    pub states: Vec<u32>,
    pub xbar: Vec<i8>,
    pub times: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Builds a trajectory from a dense record sequence (`record_every = 1`).
    pub fn from_records(records: &[PathRecord]) -> Result<Self> {
        let mut traj =
            Trajectory { initial_state: records.first().map_or(0, |r| r.state_before), ..Default::default() };
        for pair in records.windows(2) {
            if pair[1].epoch != pair[0].epoch + 1 {
                return Err(Error::NonContiguousPath { previous: pair[0].epoch, found: pair[1].epoch });
            }
        }
        for r in records {
            traj.states.push(r.state_after as u32);
            traj.xbar.push(r.xbar);
            traj.times.push(r.time);
        }
        Ok(traj)
    }

    /// Builds a trajectory from a state sequence `s0, s1, ...` with unit
    /// time gaps.
    pub fn from_states(states: &[usize]) -> Self {
        let mut traj = Trajectory { initial_state: states.first().copied().unwrap_or(0), ..Default::default() };
        for (k, w) in states.windows(2).enumerate() {
            traj.states.push(w[1] as u32);
            traj.xbar.push((w[1] as i64 - w[0] as i64) as i8);
            traj.times.push((k + 1) as f64);
        }
        traj
    }
}

/// A running path at either fidelity.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: Params,
    fidelity: Fidelity,
    table: Option<KernelTable>,
    state: MarketState,
    rng: SimRng,
    watch: Vec<usize>,
    markers: (Option<usize>, Option<usize>),
    scratch: Vec<usize>,
}

impl Simulation {
    /// Starts a path on stream 0 of `seed`.
    pub fn new(params: &Params, config: &PathConfig, seed: u64) -> Result<Self> {
        Self::with_rng(params, config, stream_rng(seed, 0))
    }

    pub fn with_rng(params: &Params, config: &PathConfig, mut rng: SimRng) -> Result<Self> {
        params.validate()?;
        let i0 = config.initial.resolve(params.n);
        params.check_state(i0)?;
        if config.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be at least 1".into()));
        }
        if let Some(&bad) = config.watch.iter().chain(&config.pinned).find(|&&y| y >= params.n) {
            return Err(Error::InvalidParams(format!("agent {bad} does not exist")));
        }
        let (table, state) = match config.fidelity {
            Fidelity::Lattice => {
                let mut state = MarketState::random(&mut rng, params, i0).with_wealth(config.initial_wealth);
                if let Some(k) = config.agent_capital {
                    state = state.with_agent_capital(vec![k; params.n]);
                }
                for &y in &config.pinned {
                    state.pin(y);
                }
                (None, state)
            }
            Fidelity::Reduced => {
                if !config.watch.is_empty() || !config.pinned.is_empty() || config.agent_capital.is_some() {
                    return Err(Error::InvalidParams("per-agent tracking needs the lattice fidelity".into()));
                }
                let table = KernelTable::new(params)?;
                (Some(table), MarketState::reduced(params, i0).with_wealth(config.initial_wealth))
            }
        };
        let markers = if params.is_frozen() && params.is_supercritical() {
            match martingale_regions(params) {
                Ok(r) => (r.g1, r.g4),
                Err(_) => (None, None),
            }
        } else {
            (None, None)
        };
        Ok(Simulation {
            params: *params,
            fidelity: config.fidelity,
            table,
            state,
            rng,
            watch: config.watch.clone(),
            markers,
            scratch: Vec::with_capacity(params.degree()),
        })
    }

    pub fn state(&self) -> &MarketState {
        &self.state
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `(g1, g4)` used for crossing annotations.
    pub fn markers(&self) -> (Option<usize>, Option<usize>) {
        self.markers
    }

    pub fn step(&mut self) -> PathRecord {
        let params = self.params;
        let before = self.state.n_plus;
        let (agent, xbar, dw, agent_delta_w) = match self.fidelity {
            Fidelity::Lattice => {
                let outcome = lattice::propose(&mut self.rng, &params, &self.state, &mut self.scratch);
                let applied = lattice::apply(&mut self.rng, &params, &mut self.state, &outcome);
                let deltas = self
                    .watch
                    .iter()
                    .map(|&y| if y == applied.agent { 0.0 } else { self.state.spins[y].as_f64() * applied.dp })
                    .collect();
                (Some(applied.agent), applied.xbar, applied.dw, deltas)
            }
            Fidelity::Reduced => {
                let t = self.table.as_ref().expect("reduced fidelity has a table").get(before);
                let xbar = step_reduced(&mut self.rng, t);
                let dp = lattice::price_change(&params, self.state.log_price, xbar);
                let dw = lattice::wealth_change(&params, before, xbar, dp);
                self.state.n_plus = (before as i64 + xbar as i64) as usize;
                self.state.log_price = crate::analytics::log_price(&params, self.state.n_plus);
                self.state.add_wealth(dw);
                lattice::advance_clock(&mut self.rng, &mut self.state);
                (None, xbar, dw, Vec::new())
            }
        };
        let after = self.state.n_plus;
        PathRecord {
            epoch: self.state.epoch,
            time: self.state.time,
            agent,
            state_before: before,
            state_after: after,
            xbar,
            x_abs: xbar.unsigned_abs(),
            y_abs: (2 * after).abs_diff(params.n),
            volume: volume(&params, after),
            log_price: self.state.log_price,
            delta_w: dw,
            wealth: self.state.wealth(),
            agent_delta_w,
            crossing: self.crossing(before, after),
        }
    }

    fn crossing(&self, before: usize, after: usize) -> Option<Crossing> {
        let (lo, hi) = (before.min(after), before.max(after));
        if lo == hi {
            return None;
        }
        match self.markers {
            (Some(g1), _) if hi == g1 && g1 > 0 => Some(Crossing::G1),
            (_, Some(g4)) if lo == g4 => Some(Crossing::G4),
            _ => None,
        }
    }

    /// Runs `n_steps` epochs, handing every recorded epoch to `sink`: every
    /// `record_every`-th epoch and every epoch with a nonzero increment.
    pub fn run_each(&mut self, n_steps: u64, record_every: u64, mut sink: impl FnMut(PathRecord)) {
        let every = record_every.max(1);
        for _ in 0..n_steps {
            let rec = self.step();
            if rec.xbar != 0 || rec.epoch.is_multiple_of(every) {
                sink(rec);
            }
        }
    }

    pub fn run(&mut self, n_steps: u64, record_every: u64) -> Vec<PathRecord> {
        let mut out = Vec::new();
        self.run_each(n_steps, record_every, |r| out.push(r));
        out
    }

    /// Dense compact record of the next `n_steps` epochs.
    pub fn run_trajectory(&mut self, n_steps: u64) -> Trajectory {
        let mut traj = Trajectory { initial_state: self.state.n_plus, ..Default::default() };
        traj.states.reserve(n_steps as usize);
        traj.xbar.reserve(n_steps as usize);
        traj.times.reserve(n_steps as usize);
        for _ in 0..n_steps {
            let rec = self.step();
            traj.states.push(rec.state_after as u32);
            traj.xbar.push(rec.xbar);
            traj.times.push(rec.time);
        }
        traj
    }
}

/// Simulates `n_steps` epochs from a fresh state and returns the recorded
/// epochs.
pub fn run_path(params: &Params, config: &PathConfig, seed: u64, n_steps: u64) -> Result<Vec<PathRecord>> {
    let mut sim = Simulation::new(params, config, seed)?;
    Ok(sim.run(n_steps, config.record_every))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::CompensatedSum;

    fn params() -> Params {
        Params::new(128, 2, 4.1, 1.0).unwrap()
    }

    #[test]
    fn zero_steps_is_empty() {
        let mut sim = Simulation::new(&params(), &PathConfig::default(), 1).unwrap();
        let before = sim.state().clone();
        assert!(sim.run(0, 1).is_empty());
        assert_eq!(sim.state(), &before);
    }

    #[test]
    fn same_seed_same_path() {
        for fidelity in [Fidelity::Lattice, Fidelity::Reduced] {
            let cfg = PathConfig { fidelity, record_every: 10, ..Default::default() };
            let a = run_path(&params(), &cfg, 99, 5000).unwrap();
            let b = run_path(&params(), &cfg, 99, 5000).unwrap();
            assert_eq!(a, b);
            let c = run_path(&params(), &cfg, 100, 5000).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn records_every_move_and_every_kth_epoch() {
        let cfg = PathConfig { record_every: 50, ..Default::default() };
        let recs = run_path(&params(), &cfg, 3, 3000).unwrap();
        assert!(recs.iter().all(|r| r.xbar != 0 || r.epoch % 50 == 0));
        assert_eq!(recs.iter().filter(|r| r.epoch % 50 == 0).count(), 60);
        // all moves are present, so the state sequence chains
        for w in recs.windows(2) {
            assert_eq!(w[0].state_after, w[1].state_before);
        }
    }

    #[test]
    fn record_invariants_hold() {
        for fidelity in [Fidelity::Lattice, Fidelity::Reduced] {
            let cfg = PathConfig { fidelity, ..Default::default() };
            let p = params();
            let recs = run_path(&p, &cfg, 4, 20_000).unwrap();
            let mut sum = CompensatedSum::default();
            for r in &recs {
                assert_eq!(r.state_after as i64 - r.state_before as i64, r.xbar as i64);
                assert_eq!(2 * r.volume, r.y_abs + p.n);
                assert!((r.log_price - crate::analytics::log_price(&p, r.state_after)).abs() < 1e-12);
                sum.add(r.delta_w);
            }
            let last = recs.last().unwrap();
            assert!((sum.value() - last.wealth).abs() <= 1e-9 * last.wealth.abs().max(1.0));
        }
    }

    #[test]
    fn crossings_mark_region_boundaries() {
        let p = Params::new(128, 2, 6.0, 1.0).unwrap();
        let cfg = PathConfig { fidelity: Fidelity::Reduced, ..Default::default() };
        let recs = run_path(&p, &cfg, 11, 100_000).unwrap();
        let mut seen = (false, false);
        for r in &recs {
            let pair = (r.state_before.min(r.state_after), r.state_before.max(r.state_after));
            match r.crossing {
                Some(Crossing::G1) => {
                    assert_eq!(pair, (42, 43));
                    seen.0 = true;
                }
                Some(Crossing::G4) => {
                    assert_eq!(pair, (85, 86));
                    seen.1 = true;
                }
                None => assert!(pair != (42, 43) && pair != (85, 86)),
            }
        }
        assert!(seen.0 && seen.1);
    }

    #[test]
    fn watched_agents_and_chosen_rule() {
        let p = Params::new(64, 2, 5.0, 2.0).unwrap();
        let cfg = PathConfig { watch: vec![0, 1, 2, 3], agent_capital: Some(0.0), ..Default::default() };
        let mut sim = Simulation::new(&p, &cfg, 5).unwrap();
        for _ in 0..5000 {
            let r = sim.step();
            if let Some(j) = r.agent {
                if j < 4 {
                    assert_eq!(r.agent_delta_w[j], 0.0);
                }
            }
        }
    }

    #[test]
    fn opposite_watched_agents_accrue_opposite_increments() {
        let p = Params::new(64, 2, 5.0, 2.0).unwrap();
        let sim = Simulation::new(&p, &PathConfig::default(), 6).unwrap();
        let up = sim.state().spins.iter().position(|&s| s == crate::Spin::Up).unwrap();
        let down = sim.state().spins.iter().position(|&s| s == crate::Spin::Down).unwrap();
        let cfg = PathConfig { watch: vec![up, down], ..Default::default() };
        let mut sim = Simulation::new(&p, &cfg, 6).unwrap();
        let (mut wu, mut wd) = (0.0, 0.0);
        let mut window = 0;
        for _ in 0..20_000 {
            let r = sim.step();
            if r.agent == Some(up) || r.agent == Some(down) {
                break;
            }
            wu += r.agent_delta_w[0];
            wd += r.agent_delta_w[1];
            window += 1;
        }
        assert!(window > 0);
        assert_eq!(wu, -wd);
    }

    #[test]
    fn reduced_rejects_agent_tracking() {
        let cfg = PathConfig { fidelity: Fidelity::Reduced, watch: vec![1], ..Default::default() };
        assert!(Simulation::new(&params(), &cfg, 1).is_err());
    }

    #[test]
    fn trajectory_from_records_requires_density() {
        let cfg = PathConfig { record_every: 1, ..Default::default() };
        let recs = run_path(&params(), &cfg, 8, 500).unwrap();
        assert_eq!(Trajectory::from_records(&recs).unwrap().len(), 500);
        let sparse: Vec<_> = recs.iter().filter(|r| r.epoch % 2 == 0).cloned().collect();
        assert!(Trajectory::from_records(&sparse).is_err());
    }
}
