//! Randomized-neighborhood spin market model.
//!
//! Agents on `N` sites hold a spin `+1` (buy) or `-1` (sell). At each epoch a
//! random site resamples `2d` neighbors uniformly and aligns with the sign of
//!
//! ```text
//! h(x) = sum of neighbor spins - alpha * spin(x) * |M| / N,   M = 2 N+ - N
//! ```
//!
//! Because neighborhoods are redrawn on every update, the buyer count `N+`
//! is itself a birth-death Markov chain. This crate provides:
//!
//! - [`kernel`]: exact one-step transition probabilities of that chain in the
//!   frozen (zero temperature) phase.
//! - [`analytics`]: price, volatility, drift and variance of the wealth
//!   process, the submartingale regions `g1..g4`, the stationary law and the
//!   risk frontier.
//! - [`sim`]: Monte Carlo at two fidelities (full lattice and reduced chain).
//! - [`sojourn`]: directed crossings, inter-crossing durations and cubic
//!   log-tail fits.
//!
//! Batch work (kernel tables, Monte Carlo trials, parameter sweeps) runs on
//! rayon when the `parallel` feature is enabled and falls back to plain
//! iterators otherwise; both paths give identical results.

pub mod analytics;
pub mod error;
pub mod kernel;
pub mod numeric;
pub mod par;
pub mod params;
pub mod sim;
pub mod sojourn;
pub mod stats;

pub use error::{Error, Result};
pub use kernel::{KernelTable, TransitionProbs};
pub use par::Exec;
pub use params::{Params, Phase, Spin};
