use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::Scheme;

/// How training examples are drawn from each instance of S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Strategy {
    ScalableEnum { n: usize },
    ScalableFullsbcs { cells: usize, max_cell_size: usize },
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::ScalableEnum { n } => write!(f, "enum({n})"),
            Strategy::ScalableFullsbcs { cells, max_cell_size } => write!(f, "fullsbcs({cells},{max_cell_size})"),
        }
    }
}

/// Settings of a pipeline run, read from `key = value` lines.
///
/// ```text
/// train = double-6
/// gen = double-8, double-10, double-12
/// strategy = fullsbcs
/// cells = 20
/// max_cell_size = 5
/// seeds = 1..=5
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub train: Vec<String>,
    pub gen: Vec<String>,
    pub strategy: Strategy,
    pub scheme: Scheme,
    pub seeds: Vec<u64>,
    pub learn_timeout_ms: u64,
    pub solve_timeout_ms: u64,
    pub coverage_timeout_ms: u64,
    /// Gen positives whose instance takes longer than this to enumerate are
    /// analyzed with sbca from the start.
    pub sbca_threshold_ms: u64,
    /// Weight of the positives drawn from S; `None` is infinite.
    pub positive_weight: Option<u64>,
    /// Instances used to pick the most efficient learned constraint set.
    pub validation: Vec<String>,
    /// Instances benchmarked with and without the selected set.
    pub bench: Vec<String>,
    pub bench_seeds: Vec<u64>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: vec!["double-6".into()],
            gen: vec!["double-8".into(), "double-10".into(), "double-12".into()],
            strategy: Strategy::ScalableFullsbcs {
                cells: 20,
                max_cell_size: 5,
            },
            scheme: Scheme::Custom,
            seeds: (1..=12).collect(),
            learn_timeout_ms: 300_000,
            solve_timeout_ms: 60_000,
            coverage_timeout_ms: 10_000,
            sbca_threshold_ms: 5_000,
            positive_weight: None,
            validation: Vec::new(),
            bench: Vec::new(),
            bench_seeds: (1..=5).collect(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))
}

/// Parses `1, 4, 7..10, 12..=14`.
fn seed_list(value: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for item in list(value) {
        if let Some((a, b)) = item.split_once("..=") {
            seeds.extend(number::<u64>("seeds", a)?..=number::<u64>("seeds", b)?);
        } else if let Some((a, b)) = item.split_once("..") {
            seeds.extend(number::<u64>("seeds", a)?..number::<u64>("seeds", b)?);
        } else {
            seeds.push(number("seeds", &item)?);
        }
    }
    Ok(seeds)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key = value, got `{line}`")))?;
            let key = key.trim().to_string();
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::parse(i + 1, format!("duplicate key `{key}`")));
            }
        }

        let mut cfg = RunConfig::default();
        let mut strategy_name = "fullsbcs".to_string();
        let (mut n, mut cells, mut max_cell_size) = (None, None, None);
        for (key, value) in &values {
            match key.as_str() {
                "train" => cfg.train = list(value),
                "gen" => cfg.gen = list(value),
                "strategy" => strategy_name = value.clone(),
                "n" => n = Some(number(key, value)?),
                "cells" => cells = Some(number(key, value)?),
                "max_cell_size" => max_cell_size = Some(number(key, value)?),
                "scheme" => cfg.scheme = value.parse()?,
                "seeds" => cfg.seeds = seed_list(value)?,
                "learn_timeout_ms" => cfg.learn_timeout_ms = number(key, value)?,
                "solve_timeout_ms" => cfg.solve_timeout_ms = number(key, value)?,
                "coverage_timeout_ms" => cfg.coverage_timeout_ms = number(key, value)?,
                "sbca_threshold_ms" => cfg.sbca_threshold_ms = number(key, value)?,
                "positive_weight" => {
                    cfg.positive_weight = match value.as_str() {
                        "inf" => None,
                        v => Some(number(key, v)?),
                    }
                }
                "validation" => cfg.validation = list(value),
                "bench" => cfg.bench = list(value),
                "bench_seeds" => cfg.bench_seeds = seed_list(value)?,
                "workers" => cfg.workers = number(key, value)?,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.strategy = match strategy_name.as_str() {
            "enum" | "scalable_enum" => {
                if cells.is_some() || max_cell_size.is_some() {
                    return Err(Error::Config("cells and max_cell_size belong to fullsbcs".into()));
                }
                Strategy::ScalableEnum { n: n.unwrap_or(50) }
            }
            "fullsbcs" | "scalable_fullsbcs" => {
                if n.is_some() {
                    return Err(Error::Config("n belongs to the enum strategy".into()));
                }
                Strategy::ScalableFullsbcs {
                    cells: cells.unwrap_or(20),
                    max_cell_size: max_cell_size.unwrap_or(5),
                }
            }
            other => return Err(Error::Config(format!("unknown strategy `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        match self.strategy {
            Strategy::ScalableEnum { n: 0 } => {
                return Err(Error::Config("the enum strategy needs n >= 1".into()))
            }
            Strategy::ScalableFullsbcs { cells: 0, .. } => {
                return Err(Error::Config("the fullsbcs strategy needs cells >= 1".into()))
            }
            _ => {}
        }
        if self.train.is_empty() {
            return Err(Error::Config("the training set is empty".into()));
        }
        if self.gen.is_empty() {
            return Err(Error::Config("the generalization set is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds given".into()));
        }
        if self.positive_weight == Some(0) {
            return Err(Error::Config("positive_weight must be positive or inf".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if !self.bench.is_empty() && self.bench_seeds.is_empty() {
            return Err(Error::Config("no bench seeds given".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::Config(format!("seed {s} listed twice")));
        }
        Ok(())
    }
}
