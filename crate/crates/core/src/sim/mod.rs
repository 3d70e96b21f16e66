//! Monte Carlo simulation at two fidelities.
//!
//! The lattice engine updates individual spins with freshly sampled
//! neighborhoods; the reduced engine samples the buyer count directly from
//! the exact kernel. A single path is sequential; independent trials and
//! paths draw from RNG streams keyed by their index.

mod lattice;
mod montecarlo;
mod path;
mod reduced;
mod rng;

pub use lattice::{local_field, sample_neighborhood, sample_neighborhood_into, step_lattice, MarketState, StepOutcome};
pub use montecarlo::{lattice_one_step, reduced_one_step, McConfig, OneStepStats};
pub use path::{run_path, Crossing, Fidelity, InitialState, PathConfig, PathRecord, Simulation, Trajectory};
pub use reduced::step_reduced;
pub use rng::{stream_rng, SimRng, GENERATOR};
