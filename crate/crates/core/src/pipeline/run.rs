use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::examples::{gen_positive, is_one_sided, scalable_enum, scalable_fullsbcs, write_examples, CdpiExample};
use crate::hypothesis::{build_space, Constraint, HypothesisSpace, LanguageBias};
use crate::instance::{instance_from_spec, PupInstance};
use crate::learner::{cdilp, flag_slow_enumerations, write_hypothesis, CdilpConfig, LearnReport, LearnerState};
use crate::symmetry::{detect_generators, AtomOrder, AtomPermutation};

use super::bench::{cmd_benchmark, select_best, summarize, write_csv, BenchSummary, Selection};
use super::config::{RunConfig, Strategy};

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// A training instance with its symmetry data.
pub struct TrainingInstance {
    pub instance: Arc<PupInstance>,
    pub generators: Vec<AtomPermutation>,
    pub order: AtomOrder,
}

impl TrainingInstance {
    pub fn new(instance: Arc<PupInstance>) -> Self {
        let generators = detect_generators(&instance);
        let order = AtomOrder::new(&instance, &generators);
        TrainingInstance {
            instance,
            generators,
            order,
        }
    }

    pub fn examples(&self, strategy: Strategy, seed: u64) -> Vec<CdpiExample> {
        match strategy {
            Strategy::ScalableEnum { n } => scalable_enum(&self.instance, &self.generators, &self.order, n, seed),
            Strategy::ScalableFullsbcs { cells, max_cell_size } => {
                scalable_fullsbcs(&self.instance, &self.generators, &self.order, cells, max_cell_size, seed)
            }
        }
    }
}

pub fn load_instances(specs: &[String]) -> Result<Vec<Arc<PupInstance>>> {
    specs.iter().map(|s| instance_from_spec(s).map(Arc::new)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStatus {
    Learned,
    /// The generated task was one-sided and not worth learning from.
    Skipped,
    /// The learning task has no solution.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub status: SeedStatus,
    pub reason: Option<String>,
    pub strategy: Strategy,
    pub positives: usize,
    pub negatives: usize,
    pub learn: Option<LearnReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub config: RunConfig,
    /// Gen positives analyzed with sbca from the first conflict on.
    pub sbca_examples: Vec<String>,
    pub seeds: Vec<SeedReport>,
    pub selection: Option<Selection>,
    pub benchmark: Option<BenchSummary>,
    pub elapsed_ms: u64,
}

/// The outcome of one seed, before anything is written.
pub struct SeedRun {
    pub report: SeedReport,
    pub rules: Option<Vec<Constraint>>,
    pub examples: Vec<CdpiExample>,
}

/// Generates the examples for `seed` and learns from them.
pub fn run_seed(
    cfg: &RunConfig,
    space: &Arc<HypothesisSpace>,
    training: &[TrainingInstance],
    gen: &[Arc<PupInstance>],
    sbca_ids: &BTreeSet<String>,
    seed: u64,
) -> Result<SeedRun> {
    let mut examples: Vec<CdpiExample> = training
        .iter()
        .flat_map(|t| t.examples(cfg.strategy, seed))
        .collect();
    for e in examples.iter_mut().filter(|e| e.is_positive()) {
        e.weight = cfg.positive_weight;
    }
    let positives = examples.iter().filter(|e| e.is_positive()).count();
    let mut report = SeedReport {
        seed,
        status: SeedStatus::Skipped,
        reason: None,
        strategy: cfg.strategy,
        positives,
        negatives: examples.len() - positives,
        learn: None,
    };
    if is_one_sided(&examples) {
        report.reason = Some(format!(
            "one-sided task: {positives} positive and {} negative examples",
            report.negatives
        ));
        return Ok(SeedRun {
            report,
            rules: None,
            examples,
        });
    }
    examples.extend(gen.iter().map(gen_positive));

    let mut state = LearnerState::new(space.clone(), examples.clone(), cfg.scheme)?;
    state.sbca_example_ids = sbca_ids.clone();
    let learn_cfg = CdilpConfig {
        budget_ms: cfg.learn_timeout_ms,
        coverage_timeout_ms: cfg.coverage_timeout_ms.min(cfg.solve_timeout_ms),
        ..CdilpConfig::default()
    };
    match cdilp(&mut state, &learn_cfg) {
        Ok(out) => {
            report.status = SeedStatus::Learned;
            report.learn = Some(out.report);
            Ok(SeedRun {
                report,
                rules: Some(out.rules),
                examples,
            })
        }
        Err(Error::Unsatisfiable(msg)) => {
            report.status = SeedStatus::Failed;
            report.reason = Some(msg);
            Ok(SeedRun {
                report,
                rules: None,
                examples,
            })
        }
        Err(e) => Err(e),
    }
}

/// Runs the whole pipeline into `out`:
///
/// ```text
/// out/seed-<s>/examples.las     training task (without Gen contexts)
/// out/seed-<s>/constraints.lp   learned constraints (learned seeds only)
/// out/seed-<s>/report.json      SeedReport
/// out/best.lp                   most efficient set over `validation`
/// out/bench.csv                 paired benchmark over `bench`
/// out/summary.json              PipelineSummary
/// ```
///
/// Every file is written atomically. A seed's constraint file depends only
/// on the config and the seed, save for the wall-clock rules (the sbca
/// threshold and the learning and coverage timeouts).
pub fn cmd_pipeline(cfg: &RunConfig, out: &Path) -> Result<PipelineSummary> {
    cfg.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let training: Vec<TrainingInstance> = load_instances(&cfg.train)?
        .into_iter()
        .map(TrainingInstance::new)
        .collect();
    let gen = load_instances(&cfg.gen)?;
    let space = Arc::new(build_space(LanguageBias::pup()));
    let gen_examples: Vec<CdpiExample> = gen.iter().map(gen_positive).collect();
    let sbca_ids = pool.install(|| flag_slow_enumerations(&gen_examples, cfg.sbca_threshold_ms));
    log::info!("sbca from the start for {sbca_ids:?}");

    let runs: Vec<SeedRun> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| run_seed(cfg, &space, &training, &gen, &sbca_ids, seed))
            .collect::<Result<_>>()
    })?;

    let mut candidates = Vec::new();
    for run in &runs {
        let dir = out.join(format!("seed-{}", run.report.seed));
        std::fs::create_dir_all(&dir)?;
        let training_only: Vec<CdpiExample> = run
            .examples
            .iter()
            .filter(|e| !gen.iter().any(|g| Arc::ptr_eq(g, &e.context)))
            .cloned()
            .collect();
        write_atomic(&dir.join("examples.las"), write_examples(&training_only).as_bytes())?;
        if let Some(rules) = &run.rules {
            write_atomic(&dir.join("constraints.lp"), write_hypothesis(rules).as_bytes())?;
            candidates.push((run.report.seed, rules.clone()));
        }
        write_atomic(&dir.join("report.json"), serde_json::to_string_pretty(&run.report)?.as_bytes())?;
    }

    let selection = if cfg.validation.is_empty() {
        None
    } else {
        let validation = load_instances(&cfg.validation)?;
        pool.install(|| select_best(&candidates, &validation, &cfg.bench_seeds, cfg.solve_timeout_ms))?
    };
    let best = selection
        .as_ref()
        .map(|s| &candidates.iter().find(|(seed, _)| *seed == s.seed).expect("selected").1)
        .or_else(|| candidates.first().map(|(_, r)| r));
    if let Some(rules) = best {
        write_atomic(&out.join("best.lp"), write_hypothesis(rules).as_bytes())?;
    }

    let benchmark = match (cfg.bench.is_empty(), best) {
        (false, Some(rules)) => {
            let bench = load_instances(&cfg.bench)?;
            let rows = pool.install(|| cmd_benchmark(&bench, Some(rules), &cfg.bench_seeds, cfg.solve_timeout_ms))?;
            let mut csv = Vec::new();
            write_csv(&rows, &mut csv)?;
            write_atomic(&out.join("bench.csv"), &csv)?;
            Some(summarize(&rows))
        }
        _ => None,
    };

    let summary = PipelineSummary {
        config: cfg.clone(),
        sbca_examples: sbca_ids.into_iter().collect(),
        seeds: runs.into_iter().map(|r| r.report).collect(),
        selection,
        benchmark,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    write_atomic(&out.join("summary.json"), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}
