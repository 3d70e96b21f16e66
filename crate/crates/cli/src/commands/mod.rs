pub mod frontier;
pub mod invariant;
pub mod regions;
pub mod simulate;
pub mod sojourn;
pub mod sweep;
