use serde_json::json;
use spinmarket::analytics::martingale_regions;
use spinmarket::sim::Simulation;
use spinmarket::sojourn::{
    fit_log_tail, pooled_durations, sojourn_samples, DurationUnit, GridSpec, SojournSample, TailFit,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{header, num, regions_json, Metadata, Sink};

const FIT_COLUMNS: [&str; 12] =
    ["i", "unit", "n", "c0", "c1", "c2", "c3", "t_min", "t_max", "rss", "grid_points", "status"];

#[derive(Debug, Clone)]
pub struct ReferenceResult {
    pub reference: usize,
    pub samples: Vec<SojournSample>,
    pub fits: Vec<(DurationUnit, Result<TailFit, String>, usize)>,
}

fn unit_name(u: DurationUnit) -> &'static str {
    match u {
        DurationUnit::Epochs => "epochs",
        DurationUnit::Time => "time",
    }
}

/// Reference states: the lowest submartingale state (`g1`, or `g3` when the
/// lower interval is absent), `N/2` and `g4`.
pub fn compute(config: &RunConfig, discard: usize) -> CliResult<Vec<ReferenceResult>> {
    let params = config.params()?;
    let regions = martingale_regions(&params)?;
    let refs = [regions.lower_boundary(), params.n / 2, regions.upper_boundary()];
    let traj = Simulation::new(&params, &config.path_config(), config.seed)?.run_trajectory(config.steps);
    let spec = GridSpec::default();
    Ok(refs
        .iter()
        .map(|&reference| {
            let samples = sojourn_samples(&traj, reference).unwrap_or_default();
            let fits = [DurationUnit::Epochs, DurationUnit::Time]
                .into_iter()
                .map(|unit| {
                    let d = pooled_durations(&samples, unit, discard);
                    (unit, fit_log_tail(&d, &spec).map_err(|e| e.to_string()), d.len())
                })
                .collect();
            ReferenceResult { reference, samples, fits }
        })
        .collect())
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let discard = config.extra("discard", 10usize)?;
    let results = compute(config, discard)?;
    let sink = Sink::new(config.out_dir())?;
    let mut w = sink.primary("sojourn_fits", &header(&FIT_COLUMNS))?;
    for r in &results {
        for (unit, fit, n) in &r.fits {
            let mut rec = vec![r.reference.to_string(), unit_name(*unit).to_string(), n.to_string()];
            match fit {
                Ok(f) => {
                    rec.extend(f.coefficients.iter().map(|&c| num(c)));
                    rec.extend([num(f.t_min), num(f.t_max), num(f.rss), f.grid_points.to_string(), "ok".into()]);
                }
                Err(e) => {
                    rec.extend(std::iter::repeat_n(String::new(), 8));
                    rec.push(e.clone());
                }
            }
            w.write_record(rec)?;
        }
    }
    w.flush().map_err(|e| CliError::io("sojourn_fits.csv", e))?;
    let sample_cols = header(&["i", "l", "tau_epochs", "tau_time", "direction"]);
    if let Some(mut s) = sink.secondary("sojourn_samples", &sample_cols)? {
        for r in &results {
            for x in &r.samples {
                s.write_record([
                    x.reference.to_string(),
                    x.index.to_string(),
                    x.epochs.to_string(),
                    num(x.time),
                    x.direction.to_string(),
                ])?;
            }
        }
        s.flush().map_err(|e| CliError::io("sojourn_samples.csv", e))?;
    }
    let counts: Vec<_> =
        results.iter().map(|r| json!({ "i": r.reference, "samples": r.samples.len(), "used": r.fits[0].2 })).collect();
    let params = config.params()?;
    let spec = GridSpec::default();
    let details = json!({
        "regions": opt_regions(&params),
        "discard": discard,
        "grid": { "points": spec.points, "lower_quantile": spec.lower_quantile, "upper_quantile": spec.upper_quantile },
        "references": counts,
    });
    sink.sidecar("sojourn_fits", &Metadata::new("sojourn", config, &["sojourn_fits", "sojourn_samples"], details)?)
}

fn opt_regions(params: &spinmarket::Params) -> serde_json::Value {
    martingale_regions(params).map(|r| regions_json(&r)).unwrap_or(serde_json::Value::Null)
}
