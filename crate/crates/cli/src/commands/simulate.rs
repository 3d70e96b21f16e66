use serde_json::json;
use spinmarket::analytics::martingale_regions;
use spinmarket::numeric::CompensatedSum;
use spinmarket::sim::{Crossing, PathRecord, Simulation};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, regions_json, Metadata, Sink, TableWriter};

const COLUMNS: [&str; 13] = [
    "epoch",
    "time",
    "agent",
    "state_before",
    "state_after",
    "xbar",
    "x_abs",
    "y_abs",
    "volume",
    "log_price",
    "delta_w",
    "wealth",
    "crossing",
];

fn record(r: &PathRecord) -> Vec<String> {
    let mut rec = vec![
        r.epoch.to_string(),
        num(r.time),
        opt(r.agent),
        r.state_before.to_string(),
        r.state_after.to_string(),
        r.xbar.to_string(),
        r.x_abs.to_string(),
        r.y_abs.to_string(),
        r.volume.to_string(),
        num(r.log_price),
        num(r.delta_w),
        num(r.wealth),
        match r.crossing {
            Some(Crossing::G1) => "g1".to_string(),
            Some(Crossing::G4) => "g4".to_string(),
            None => String::new(),
        },
    ];
    rec.extend(r.agent_delta_w.iter().map(|&x| num(x)));
    rec
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let params = config.params()?;
    let mut sim = Simulation::new(&params, &config.path_config(), config.seed)?;
    let sink = Sink::new(config.out_dir())?;
    let mut cols: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend(config.watch.iter().map(|y| format!("w_{y}")));
    let mut w: TableWriter = sink.primary("path", &cols)?;
    let initial_state = sim.state().n_plus;
    let initial_wealth = sim.state().wealth();
    let mut sum = CompensatedSum::default();
    let mut records = 0u64;
    let mut crossings = [0u64; 2];
    let mut failure = None;
    sim.run_each(config.steps, config.record_every, |r| {
        if failure.is_some() {
            return;
        }
        sum.add(r.delta_w);
        records += 1;
        match r.crossing {
            Some(Crossing::G1) => crossings[0] += 1,
            Some(Crossing::G4) => crossings[1] += 1,
            None => {}
        }
        if let Err(e) = w.write_record(record(&r)) {
            failure = Some(e);
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    w.flush().map_err(|e| CliError::io("path.csv", e))?;
    let final_wealth = sim.state().wealth();
    let regions = if params.is_frozen() && params.is_supercritical() {
        martingale_regions(&params).ok().map(|r| regions_json(&r))
    } else {
        None
    };
    let details = json!({
        "regions": regions,
        "initial_state": initial_state,
        "final_state": sim.state().n_plus,
        "initial_wealth": initial_wealth,
        "final_wealth": final_wealth,
        "sum_delta_w": sum.value(),
        "records": records,
        "g1_crossings": crossings[0],
        "g4_crossings": crossings[1],
    });
    sink.sidecar("path", &Metadata::new("simulate", config, &["path"], details)?)
}
