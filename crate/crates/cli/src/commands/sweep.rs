//! Grid of `(alpha, lambda)` cells, each solved independently.

use serde_json::json;
use spinmarket::analytics::StationaryDistribution;
use spinmarket::par::{map_indexed, Exec};
use spinmarket::sim::{stream_rng, Fidelity, InitialState, PathConfig, Simulation};
use spinmarket::stats::occupancy;
use spinmarket::{KernelTable, Params};

use super::regions::{RegionRow, COLUMNS};
use crate::config::{parse_list, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{header, num, opt, Metadata, Sink};
use crate::paper_table;

pub const STATIONARY_COLUMNS: [&str; 12] = [
    "N",
    "alpha",
    "d",
    "lambda",
    "stream",
    "lower_mode",
    "upper_mode",
    "local_maxima",
    "pi_lower_mode",
    "pi_center",
    "tv",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySummary {
    pub lower_mode: usize,
    pub upper_mode: usize,
    pub local_maxima: Vec<usize>,
    pub pi_lower_mode: f64,
    pub pi_center: f64,
    /// Total variation of a reduced-chain occupancy from the exact law.
    pub tv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub stream: u64,
    pub regions: RegionRow,
    pub stationary: Result<StationarySummary, String>,
}

fn stationary_summary(cell: &Cell, seed: u64, stream: u64, steps: u64) -> spinmarket::Result<StationarySummary> {
    let params = Params::new(cell.n, cell.d, cell.alpha, cell.lambda)?;
    let table = KernelTable::new(&params)?;
    let pi = StationaryDistribution::from_table(&table)?;
    let tv = if steps > 0 {
        let cfg = PathConfig { fidelity: Fidelity::Reduced, initial: InitialState::Half, ..PathConfig::default() };
        let mut sim = Simulation::with_rng(&params, &cfg, stream_rng(seed, stream))?;
        let traj = sim.run_trajectory(steps);
        let burn = (steps / 10) as usize;
        let occ = occupancy(traj.states[burn..].iter().map(|&s| s as usize), params.n);
        Some(pi.total_variation(&occ))
    } else {
        None
    };
    Ok(StationarySummary {
        lower_mode: pi.lower_mode(),
        upper_mode: pi.upper_mode(),
        local_maxima: pi.local_maxima(),
        pi_lower_mode: pi.pi[pi.lower_mode()],
        pi_center: pi.pi[params.n / 2],
        tv,
    })
}

/// Solves every cell; cell `k` draws from stream `k` of `seed`.
pub fn run_cells(cells: &[Cell], seed: u64, steps: u64, exec: Exec) -> Vec<CellResult> {
    map_indexed(exec, cells.len(), |k| {
        let cell = cells[k].clone();
        let stream = k as u64;
        let regions = RegionRow::compute(cell.n, cell.d, cell.alpha, cell.lambda);
        let stationary = stationary_summary(&cell, seed, stream, steps).map_err(|e| e.to_string());
        CellResult { cell, stream, regions, stationary }
    })
}

pub fn grid_cells(config: &RunConfig, paper_table: bool) -> CliResult<Vec<Cell>> {
    if paper_table {
        return Ok(paper_table::ROWS
            .iter()
            .map(|r| Cell { n: paper_table::N, d: paper_table::D, alpha: r.alpha, lambda: r.lambda })
            .collect());
    }
    let alphas: Vec<f64> = match config.extra.get("alphas") {
        Some(v) => parse_list("alphas", v)?,
        None => vec![config.alpha],
    };
    let lambdas: Vec<f64> = match config.extra.get("lambdas") {
        Some(v) => parse_list("lambdas", v)?,
        None => vec![config.lambda],
    };
    if alphas.is_empty() || lambdas.is_empty() {
        return Err(CliError::Usage("empty sweep grid".into()));
    }
    Ok(alphas
        .iter()
        .flat_map(|&alpha| lambdas.iter().map(move |&lambda| (alpha, lambda)))
        .map(|(alpha, lambda)| Cell { n: config.n, d: config.d, alpha, lambda })
        .collect())
}

pub fn run(config: &RunConfig, paper_table: bool, threads: Option<usize>) -> CliResult<()> {
    let cells = grid_cells(config, paper_table)?;
    let results = with_threads(threads, || run_cells(&cells, config.seed, config.steps, Exec::Parallel))?;
    let sink = Sink::new(config.out_dir())?;
    let mut w = sink.primary("sweep_regions", &header(&COLUMNS))?;
    for r in &results {
        r.regions.write(&mut w)?;
    }
    w.flush().map_err(|e| CliError::io("sweep_regions.csv", e))?;
    if let Some(mut s) = sink.secondary("sweep_stationary", &header(&STATIONARY_COLUMNS))? {
        for r in &results {
            let c = &r.cell;
            let mut rec = vec![c.n.to_string(), num(c.alpha), c.d.to_string(), num(c.lambda), r.stream.to_string()];
            match &r.stationary {
                Ok(st) => rec.extend([
                    st.lower_mode.to_string(),
                    st.upper_mode.to_string(),
                    st.local_maxima.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";"),
                    num(st.pi_lower_mode),
                    num(st.pi_center),
                    opt(st.tv.map(num)),
                    "ok".to_string(),
                ]),
                Err(e) => {
                    rec.extend(std::iter::repeat_n(String::new(), 6));
                    rec.push(e.clone());
                }
            }
            s.write_record(rec)?;
        }
        s.flush().map_err(|e| CliError::io("sweep_stationary.csv", e))?;
    }
    let failed: Vec<_> = results.iter().filter_map(|r| r.regions.result.as_ref().err().map(|e| (r, e))).collect();
    for (r, e) in &failed {
        eprintln!("cell alpha={} lambda={}: {e}", r.cell.alpha, r.cell.lambda);
    }
    eprintln!("{} cells, {} failed", results.len(), failed.len());
    let details = json!({ "cells": results.len(), "failed_cells": failed.len(), "stream": "cell index" });
    sink.sidecar("sweep_regions", &Metadata::new("sweep", config, &["sweep_regions", "sweep_stationary"], details)?)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Usage(format!("cannot start {k} worker threads: {e}"))),
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    Ok(f())
}
