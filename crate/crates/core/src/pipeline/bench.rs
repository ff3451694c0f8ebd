//! Paired benchmark of the solver with and without learned constraints.
//!
//! CSV schema, one row per instance × seed × condition, in this column
//! order:
//!
//! | column       | meaning                                                    |
//! |--------------|------------------------------------------------------------|
//! | `instance`   | instance name                                              |
//! | `condition`  | `plain` or `with_abk`                                      |
//! | `seed`       | seed of the solver's value order, shared by a pair         |
//! | `status`     | `sat`, `unsat` or `timeout`                                |
//! | `runtime_ms` | wall-clock ms to the first solution or unsat proof, or `TIMEOUT` |
//! | `timeout_ms` | the per-row limit                                          |
//! | `nodes`      | search nodes visited                                       |
//! | `solutions`  | solutions found (0 or 1)                                   |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::ground_all;
use crate::hypothesis::Constraint;
use crate::instance::PupInstance;
use crate::solver::{solve, SearchConfig};

use super::stats::{median, wilcoxon_signed_rank, Wilcoxon};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Plain,
    WithAbk,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Plain => "plain",
            Condition::WithAbk => "with_abk",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchStatus {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub condition: Condition,
    pub seed: u64,
    pub status: BenchStatus,
    /// `None` when the run timed out.
    pub runtime_ms: Option<f64>,
    pub timeout_ms: u64,
    pub nodes: u64,
    pub solutions: u64,
}

impl BenchRow {
    /// Runtime with a timeout counted as the full limit.
    pub fn penalized_ms(&self) -> f64 {
        self.runtime_ms.unwrap_or(self.timeout_ms as f64)
    }
}

/// Parses learned constraints, one per line; blank lines and `%` comments
/// are skipped.
pub fn parse_hypothesis(text: &str) -> Result<Vec<Constraint>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'))
        .map(|(i, l)| {
            l.trim().parse().map_err(|e: Error| match e {
                Error::Parse { msg, .. } => Error::parse(i + 1, msg),
                other => Error::parse(i + 1, other.to_string()),
            })
        })
        .collect()
}

fn run_row(
    inst: &PupInstance,
    abk: Option<&[Constraint]>,
    seed: u64,
    timeout_ms: u64,
) -> Result<BenchRow> {
    let start = Instant::now();
    let ground = match abk {
        Some(rules) => ground_all(rules, inst)?,
        None => Vec::new(),
    };
    let left = timeout_ms.saturating_sub(start.elapsed().as_millis() as u64);
    let cfg = SearchConfig::default().randomized(seed).with_timeout_ms(left);
    let res = solve(inst, &ground, &cfg);
    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    let status = match res.verdict() {
        Some(true) => BenchStatus::Sat,
        Some(false) if elapsed <= timeout_ms as f64 => BenchStatus::Unsat,
        _ => BenchStatus::Timeout,
    };
    Ok(BenchRow {
        instance: inst.name().to_string(),
        condition: if abk.is_some() { Condition::WithAbk } else { Condition::Plain },
        seed,
        status,
        runtime_ms: (status != BenchStatus::Timeout).then_some(elapsed),
        timeout_ms,
        nodes: res.stats.nodes,
        solutions: res.solution.is_some() as u64,
    })
}

/// Runs every instance × seed without constraints and, when `abk` is given,
/// again with them. Rows run on the current rayon pool and come back
/// ordered by instance position, seed, then condition. A satisfiable
/// instance reports the time to its first solution, an unsatisfiable one
/// the time to the proof; a timeout yields a `timeout` row.
pub fn cmd_benchmark(
    instances: &[Arc<PupInstance>],
    abk: Option<&[Constraint]>,
    seeds: &[u64],
    timeout_ms: u64,
) -> Result<Vec<BenchRow>> {
    let mut jobs = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        for &seed in seeds {
            jobs.push((i, inst, seed, None));
            if let Some(rules) = abk {
                jobs.push((i, inst, seed, Some(rules)));
            }
        }
    }
    jobs.par_iter()
        .map(|&(_, inst, seed, rules)| run_row(inst, rules, seed, timeout_ms))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    instance: String,
    condition: Condition,
    seed: u64,
    status: BenchStatus,
    runtime_ms: String,
    timeout_ms: u64,
    nodes: u64,
    solutions: u64,
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            instance: r.instance.clone(),
            condition: r.condition,
            seed: r.seed,
            status: r.status,
            runtime_ms: r.runtime_ms.map_or("TIMEOUT".into(), |ms| format!("{ms:.3}")),
            timeout_ms: r.timeout_ms,
            nodes: r.nodes,
            solutions: r.solutions,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<CsvRow>().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let runtime_ms = match rec.runtime_ms.as_str() {
            "TIMEOUT" => None,
            v => Some(v.parse().map_err(|_| Error::parse(i + 2, format!("bad runtime `{v}`")))?),
        };
        if (runtime_ms.is_none()) != (rec.status == BenchStatus::Timeout) {
            return Err(Error::parse(i + 2, "runtime and status disagree"));
        }
        rows.push(BenchRow {
            instance: rec.instance,
            condition: rec.condition,
            seed: rec.seed,
            status: rec.status,
            runtime_ms,
            timeout_ms: rec.timeout_ms,
            nodes: rec.nodes,
            solutions: rec.solutions,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub rows: usize,
    pub solved: usize,
    pub timeouts: usize,
    /// Runtime sum with timeouts counted at the limit.
    pub total_ms: f64,
    pub median_ms: Option<f64>,
    pub median_nodes: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub conditions: Vec<ConditionSummary>,
    pub pairs: usize,
    /// Plain against with_abk penalized runtimes; `None` when undefined.
    pub wilcoxon: Option<Wilcoxon>,
}

/// Per-condition totals and the paired runtime test.
pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let mut by_condition: BTreeMap<Condition, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        by_condition.entry(r.condition).or_default().push(r);
    }
    let conditions = by_condition
        .iter()
        .map(|(&condition, rs)| ConditionSummary {
            condition,
            rows: rs.len(),
            solved: rs.iter().filter(|r| r.status != BenchStatus::Timeout).count(),
            timeouts: rs.iter().filter(|r| r.status == BenchStatus::Timeout).count(),
            total_ms: rs.iter().map(|r| r.penalized_ms()).sum(),
            median_ms: median(&rs.iter().map(|r| r.penalized_ms()).collect::<Vec<_>>()),
            median_nodes: median(&rs.iter().map(|r| r.nodes as f64).collect::<Vec<_>>()),
        })
        .collect();
    let pairs = paired(rows);
    BenchSummary {
        conditions,
        pairs: pairs.len(),
        wilcoxon: wilcoxon_signed_rank(&pairs),
    }
}

/// (plain, with_abk) penalized runtimes matched on instance and seed.
pub fn paired(rows: &[BenchRow]) -> Vec<(f64, f64)> {
    let mut plain = BTreeMap::new();
    let mut abk = BTreeMap::new();
    for r in rows {
        let side = match r.condition {
            Condition::Plain => &mut plain,
            Condition::WithAbk => &mut abk,
        };
        side.insert((r.instance.as_str(), r.seed), r.penalized_ms());
    }
    plain
        .iter()
        .filter_map(|(k, &p)| abk.get(k).map(|&a| (p, a)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Seed of the learning run whose constraints won.
    pub seed: u64,
    pub total_ms: f64,
    /// Total validation time of every distinct candidate set, by seed.
    pub candidates: Vec<(u64, f64)>,
}

/// Picks the learned constraint set with the least total validation time
/// (timeouts at the limit); ties go to the smaller seed. Identical sets are
/// timed once, under the smallest seed that produced them.
pub fn select_best(
    candidates: &[(u64, Vec<Constraint>)],
    validation: &[Arc<PupInstance>],
    seeds: &[u64],
    timeout_ms: u64,
) -> Result<Option<Selection>> {
    let mut distinct: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for (seed, rules) in candidates {
        let key: BTreeSet<String> = rules.iter().map(|r| r.to_string()).collect();
        let slot = distinct.entry(key.into_iter().collect()).or_insert(*seed);
        *slot = (*slot).min(*seed);
    }
    let mut timed = Vec::new();
    for &seed in distinct.values() {
        let rules = &candidates.iter().find(|(s, _)| *s == seed).expect("candidate").1;
        let rows = cmd_benchmark(validation, Some(rules), seeds, timeout_ms)?;
        let total = rows
            .iter()
            .filter(|r| r.condition == Condition::WithAbk)
            .map(|r| r.penalized_ms())
            .sum::<f64>();
        timed.push((seed, total));
    }
    timed.sort_by(|a, b| a.0.cmp(&b.0));
    let best = timed
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(best.map(|(seed, total_ms)| Selection {
        seed,
        total_ms,
        candidates: timed,
    }))
}
