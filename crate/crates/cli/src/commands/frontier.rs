use std::collections::BTreeMap;

use serde_json::json;
use spinmarket::analytics::{martingale_regions, risk_frontier, Branch, RiskPoint};
use spinmarket::sim::Simulation;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{header, num, regions_json, Metadata, Sink};

/// Risk points for every state (`steps == 0`) or for the states a simulated
/// path visits, with visit counts.
pub fn compute(config: &RunConfig) -> CliResult<Vec<(RiskPoint, u64)>> {
    let params = config.params()?;
    let visits: BTreeMap<usize, u64> = if config.steps == 0 {
        (0..=params.n).map(|i| (i, 0)).collect()
    } else {
        let mut sim = Simulation::new(&params, &config.path_config(), config.seed)?;
        let mut v = BTreeMap::new();
        for s in sim.run_trajectory(config.steps).states {
            *v.entry(s as usize).or_insert(0) += 1;
        }
        v
    };
    let states: Vec<usize> = visits.keys().copied().collect();
    let points = risk_frontier(&params, &states)?;
    Ok(points.into_iter().map(|p| (p, visits[&p.i])).collect())
}

/// Largest standard deviation and most negative mean on each branch.
pub fn branch_extremes(points: &[RiskPoint]) -> BTreeMap<&'static str, (f64, f64)> {
    let mut out: BTreeMap<&'static str, (f64, f64)> = BTreeMap::new();
    for p in points {
        let e = out.entry(p.branch.as_str()).or_insert((f64::NEG_INFINITY, f64::INFINITY));
        e.0 = e.0.max(p.sd);
        e.1 = e.1.min(p.mean);
    }
    out
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let rows = compute(config)?;
    let sink = Sink::new(config.out_dir())?;
    let mut w = sink.primary("frontier", &header(&["i", "mean", "sd", "branch", "visits"]))?;
    for (p, v) in &rows {
        w.write_record([p.i.to_string(), num(p.mean), num(p.sd), p.branch.as_str().to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| CliError::io("frontier.csv", e))?;
    let points: Vec<RiskPoint> = rows.iter().map(|(p, _)| *p).collect();
    let extremes: BTreeMap<_, _> = branch_extremes(&points)
        .into_iter()
        .map(|(b, (sd, mean))| (b, json!({ "max_sd": sd, "min_mean": mean })))
        .collect();
    let regions = martingale_regions(&config.params()?)?;
    let details = json!({ "regions": regions_json(&regions), "branches": extremes });
    sink.sidecar("frontier", &Metadata::new("frontier", config, &["frontier"], details)?)
}

/// Checks the ordering of the upper and lower gain branches and the sign of
/// both loss branches.
pub fn asymmetry_holds(points: &[RiskPoint]) -> bool {
    let max_sd = |b: Branch| points.iter().filter(|p| p.branch == b).map(|p| p.sd).fold(f64::NAN, f64::max);
    let losses_negative =
        points.iter().filter(|p| matches!(p.branch, Branch::LossAboveG4 | Branch::LossBelowG1)).all(|p| p.mean < 0.0);
    max_sd(Branch::GainUpper) > max_sd(Branch::GainLower) && losses_negative
}
