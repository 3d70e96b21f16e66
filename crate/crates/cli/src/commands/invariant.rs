use serde_json::json;
use spinmarket::analytics::stationary_distribution;
use spinmarket::sim::Simulation;
use spinmarket::stats::{occupancy, total_variation};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{header, num, Metadata, Sink};

#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    pub burn_in: u64,
    pub occupancy: Vec<f64>,
    pub tv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub pi: Vec<f64>,
    pub local_maxima: Vec<usize>,
    pub empirical: Option<Empirical>,
}

/// Largest entry of `v` over `range`, first index on ties.
pub fn argmax(v: &[f64], range: std::ops::Range<usize>) -> usize {
    range.fold(usize::MAX, |best, i| if best == usize::MAX || v[i] > v[best] { i } else { best })
}

/// Exact stationary law, plus the occupancy of a simulated path after
/// discarding the first `burn_in_fraction` of its epochs when `steps > 0`.
pub fn compute(config: &RunConfig, burn_in_fraction: f64) -> CliResult<InvariantResult> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(CliError::Usage(format!("burn-in fraction {burn_in_fraction} outside [0, 1)")));
    }
    let params = config.params()?;
    let pi = stationary_distribution(&params)?;
    let empirical = if config.steps > 0 {
        let mut sim = Simulation::new(&params, &config.path_config(), config.seed)?;
        let traj = sim.run_trajectory(config.steps);
        let burn_in = (burn_in_fraction * config.steps as f64).floor() as u64;
        let occ = occupancy(traj.states[burn_in as usize..].iter().map(|&s| s as usize), params.n);
        let tv = total_variation(&occ, &pi.pi);
        Some(Empirical { burn_in, occupancy: occ, tv })
    } else {
        None
    };
    Ok(InvariantResult { local_maxima: pi.local_maxima(), pi: pi.pi, empirical })
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let burn_in_fraction = config.extra("burn_in", 0.1)?;
    let res = compute(config, burn_in_fraction)?;
    let sink = Sink::new(config.out_dir())?;
    let mut w = sink.primary("invariant", &header(&["i", "pi", "empirical"]))?;
    for (i, p) in res.pi.iter().enumerate() {
        let emp = res.empirical.as_ref().map(|e| num(e.occupancy[i])).unwrap_or_default();
        w.write_record([i.to_string(), num(*p), emp])?;
    }
    w.flush().map_err(|e| CliError::io("invariant.csv", e))?;
    let n = res.pi.len() - 1;
    let mut details = json!({ "local_maxima": res.local_maxima });
    if let Some(e) = &res.empirical {
        eprintln!("total variation after {} burn-in epochs: {:.6}", e.burn_in, e.tv);
        details["burn_in_epochs"] = json!(e.burn_in);
        details["total_variation"] = json!(e.tv);
        details["empirical_modes"] = json!([argmax(&e.occupancy, 0..n / 2), argmax(&e.occupancy, n / 2 + 1..n + 1)]);
    }
    sink.sidecar("invariant", &Metadata::new("invariant", config, &["invariant"], details)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinmarket::sim::Fidelity;

    #[test]
    fn exact_law_is_normalized_and_symmetric() {
        let cfg = RunConfig { steps: 0, ..RunConfig::default() };
        let res = compute(&cfg, 0.1).unwrap();
        assert!((res.pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        for i in 0..=128 {
            assert!((res.pi[i] - res.pi[128 - i]).abs() < 1e-12);
        }
        assert!(res.empirical.is_none());
    }

    #[test]
    fn burn_in_is_dropped() {
        let cfg = RunConfig { steps: 1000, fidelity: Fidelity::Reduced, ..RunConfig::default() };
        let res = compute(&cfg, 0.25).unwrap();
        assert_eq!(res.empirical.unwrap().burn_in, 250);
        assert!(compute(&cfg, 1.0).is_err());
    }

    #[test]
    fn argmax_takes_first_maximum() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 0.0], 0..4), 1);
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 0.0], 2..4), 2);
    }
}
