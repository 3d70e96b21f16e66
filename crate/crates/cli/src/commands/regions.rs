use serde_json::json;
use spinmarket::analytics::{MartingaleRegions, RegionKind, RegionSolver};
use spinmarket::Params;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{header, num, opt, regions_json, Metadata, Sink, TableWriter};
use crate::paper_table::{self, ReferenceRow};

pub const COLUMNS: [&str; 9] = ["N", "alpha", "d", "lambda", "kind", "g1", "g2", "g3", "g4"];

/// One row of the regions table; a failed cell keeps its parameters and
/// leaves the rest blank.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub n: usize,
    pub alpha: f64,
    pub d: usize,
    pub lambda: f64,
    pub result: Result<MartingaleRegions, String>,
}

impl RegionRow {
    pub fn compute(n: usize, d: usize, alpha: f64, lambda: f64) -> Self {
        let result = Params::new(n, d, alpha, lambda)
            .and_then(|p| RegionSolver::new(&p)?.solve(lambda))
            .map_err(|e| e.to_string());
        RegionRow { n, alpha, d, lambda, result }
    }

    pub fn kind(&self) -> Option<RegionKind> {
        self.result.as_ref().ok().map(|r| r.kind)
    }

    pub fn boundaries(&self) -> [Option<usize>; 4] {
        self.result.as_ref().map(|r| r.boundaries()).unwrap_or([None; 4])
    }

    pub fn record(&self) -> Vec<String> {
        let g = self.boundaries();
        vec![
            self.n.to_string(),
            num(self.alpha),
            self.d.to_string(),
            num(self.lambda),
            opt(self.kind()),
            opt(g[0]),
            opt(g[1]),
            opt(g[2]),
            opt(g[3]),
        ]
    }

    pub fn write(&self, w: &mut TableWriter) -> CliResult<()> {
        w.write_record(self.record())?;
        Ok(())
    }
}

/// Comparison of one computed row with the reference table.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub reference: ReferenceRow,
    pub computed: RegionRow,
}

impl RowCheck {
    pub fn matches(&self) -> bool {
        self.computed.result.is_ok() && self.computed.boundaries() == self.reference.g
    }
}

pub fn paper_table_rows() -> Vec<RegionRow> {
    paper_table::ROWS.iter().map(|r| RegionRow::compute(paper_table::N, paper_table::D, r.alpha, r.lambda)).collect()
}

pub fn check_paper_table() -> Vec<RowCheck> {
    paper_table::ROWS
        .iter()
        .zip(paper_table_rows())
        .map(|(&reference, computed)| RowCheck { reference, computed })
        .collect()
}

fn fmt_g(g: &[Option<usize>; 4]) -> String {
    g.iter().map(|x| opt(*x)).collect::<Vec<_>>().join(",")
}

pub fn run(config: &RunConfig, paper_table: bool) -> CliResult<()> {
    let sink = Sink::new(config.out_dir())?;
    if paper_table {
        let mut w = sink.primary("regions", &header(&COLUMNS))?;
        let checks = check_paper_table();
        for c in &checks {
            c.computed.write(&mut w)?;
        }
        w.flush().map_err(|e| CliError::io("regions.csv", e))?;
        let mismatches: Vec<&RowCheck> = checks.iter().filter(|c| !c.matches()).collect();
        for c in &mismatches {
            eprintln!(
                "mismatch at alpha={} lambda={}: expected [{}], got [{}]",
                c.reference.alpha,
                c.reference.lambda,
                fmt_g(&c.reference.g),
                match &c.computed.result {
                    Ok(_) => fmt_g(&c.computed.boundaries()),
                    Err(e) => e.clone(),
                }
            );
        }
        eprintln!("{}/{} rows match", checks.len() - mismatches.len(), checks.len());
        let details = json!({
            "mode": "reference-table",
            "rows": checks.len(),
            "matching_rows": checks.len() - mismatches.len(),
        });
        sink.sidecar("regions", &Metadata::new("regions", config, &["regions"], details)?)?;
        if !mismatches.is_empty() {
            return Err(CliError::Mismatch { mismatches: mismatches.len(), rows: checks.len() });
        }
        return Ok(());
    }
    let params = config.params()?;
    let regions = RegionSolver::new(&params)?.solve(params.lambda)?;
    let mut w = sink.primary("regions", &header(&COLUMNS))?;
    let row =
        RegionRow { n: params.n, alpha: params.alpha, d: params.d, lambda: params.lambda, result: Ok(regions.clone()) };
    row.write(&mut w)?;
    w.flush().map_err(|e| CliError::io("regions.csv", e))?;
    let details = json!({ "regions": regions_json(&regions) });
    sink.sidecar("regions", &Metadata::new("regions", config, &["regions"], details)?)
}
