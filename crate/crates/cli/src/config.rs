//! Run configuration: defaults, then a `key=value` file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Serialize;
use spinmarket::sim::{Fidelity, InitialState, PathConfig};
use spinmarket::Params;

use crate::error::{CliError, CliResult};

/// Flags shared by every command. All are optional so that unset flags fall
/// through to the config file and then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Number of agents.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<usize>,
    /// Half the neighborhood size.
    #[arg(long)]
    pub d: Option<usize>,
    /// Herding strength.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Price sensitivity.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// Initial number of buyers, or `half`.
    #[arg(long)]
    pub init: Option<String>,
    /// `lattice` or `reduced`.
    #[arg(long)]
    pub fidelity: Option<String>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "record-every")]
    pub record_every: Option<u64>,
    /// Comma-separated agent ids whose own wealth increments are recorded.
    #[arg(long)]
    pub watch: Option<String>,
    /// File of `key=value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Half,
    Count(usize),
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub steps: u64,
    pub init: Init,
    #[serde(serialize_with = "fidelity_name")]
    pub fidelity: Fidelity,
    pub watch: Vec<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub record_every: u64,
    /// Command-specific settings, kept sorted so serialization is stable.
    pub extra: BTreeMap<String, String>,
}

fn fidelity_name<S: serde::Serializer>(f: &Fidelity, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match f {
        Fidelity::Lattice => "lattice",
        Fidelity::Reduced => "reduced",
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 128,
            d: 2,
            alpha: 6.0,
            lambda: 1.0,
            seed: 42,
            steps: 10_000,
            init: Init::Half,
            fidelity: Fidelity::Lattice,
            watch: Vec::new(),
            out: None,
            record_every: 1,
            extra: BTreeMap::new(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.trim().parse().map_err(|_| CliError::Usage(format!("invalid value {value:?} for {key}")))
}

fn parse_init(value: &str) -> CliResult<Init> {
    match value.trim() {
        "half" => Ok(Init::Half),
        v => parse("init", v).map(Init::Count),
    }
}

fn parse_fidelity(value: &str) -> CliResult<Fidelity> {
    match value.trim() {
        "lattice" => Ok(Fidelity::Lattice),
        "reduced" => Ok(Fidelity::Reduced),
        v => Err(CliError::Usage(format!("unknown fidelity {v:?}, expected lattice or reduced"))),
    }
}

pub fn parse_list<T: FromStr>(key: &str, value: &str) -> CliResult<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "N" | "n" => self.n = parse(key, value)?,
            "d" => self.d = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "init" => self.init = parse_init(value)?,
            "fidelity" => self.fidelity = parse_fidelity(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "record_every" => self.record_every = parse(key, value)?,
            "watch" => self.watch = parse_list(key, value)?,
            _ => {
                self.extra.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    /// Merges `defaults < config file < flags`. `command_defaults` are
    /// applied over the global defaults before the file is read.
    pub fn resolve(args: &CommonArgs, command_defaults: &[(&str, &str)]) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        for (k, v) in command_defaults {
            cfg.set(k, v)?;
        }
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (k, v) in parse_config_text(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        if let Some(v) = args.n {
            cfg.n = v;
        }
        if let Some(v) = args.d {
            cfg.d = v;
        }
        if let Some(v) = args.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = args.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = args.seed {
            cfg.seed = v;
        }
        if let Some(v) = args.steps {
            cfg.steps = v;
        }
        if let Some(v) = &args.init {
            cfg.init = parse_init(v)?;
        }
        if let Some(v) = &args.fidelity {
            cfg.fidelity = parse_fidelity(v)?;
        }
        if let Some(v) = &args.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = args.record_every {
            cfg.record_every = v;
        }
        if let Some(v) = &args.watch {
            cfg.watch = parse_list("watch", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets a command-specific key given on the command line.
    pub fn override_extra(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.extra.insert(key.to_string(), v);
        }
    }

    pub fn extra<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        match self.extra.get(key) {
            Some(v) => parse(key, v),
            None => Ok(default),
        }
    }

    fn validate(&self) -> CliResult<()> {
        self.params()?;
        if self.record_every == 0 {
            return Err(CliError::Usage("record_every must be at least 1".into()));
        }
        if let Init::Count(i) = self.init {
            if i > self.n {
                return Err(CliError::Usage(format!("initial state {i} outside [0, {}]", self.n)));
            }
        }
        if let Some(&y) = self.watch.iter().find(|&&y| y >= self.n) {
            return Err(CliError::Usage(format!("watched agent {y} outside [0, {})", self.n)));
        }
        Ok(())
    }

    pub fn params(&self) -> CliResult<Params> {
        Params::new(self.n, self.d, self.alpha, self.lambda).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn path_config(&self) -> PathConfig {
        PathConfig {
            fidelity: self.fidelity,
            initial: match self.init {
                Init::Half => InitialState::Half,
                Init::Count(i) => InitialState::Count(i),
            },
            watch: self.watch.clone(),
            record_every: self.record_every,
            ..PathConfig::default()
        }
    }

    pub fn out_dir(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}
