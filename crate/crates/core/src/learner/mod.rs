//! Conflict-driven constraint learning.
//!
//! The loop alternates between finding an optimal hypothesis for the
//! coverage constraints collected so far and checking the examples against
//! it with the solver. Every uncovered example whose failure the
//! constraints do not yet explain is analyzed, and the resulting formula is
//! added. When a round adds nothing, the hypothesis is optimal.

mod conflict;
mod formula;
mod optimize;

pub use conflict::{
    sbca, semantic_conflict_negative, semantic_conflict_positive, CandidateBudget, CompiledSpace,
};
pub use formula::{CoverageConstraint, Formula, IdLiteral};
pub use optimize::{optimize_exhaustive, optimize_problem, Optimum, Problem};

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::examples::{CdpiExample, Label};
use crate::ground::{ground_all, GroundConstraint};
use crate::hypothesis::{Constraint, HypothesisSpace, RuleId, Scheme};
use crate::instance::PupInstance;
use crate::solution::Solution;
use crate::solver::{accepting_with_ground, count, Acceptance, SearchConfig, SearchStatus};

/// Everything one learning run works on. `cc` only ever grows.
pub struct LearnerState {
    pub space: Arc<HypothesisSpace>,
    pub examples: Vec<CdpiExample>,
    pub cc: Vec<CoverageConstraint>,
    pub scheme: Scheme,
    /// Positive examples analyzed with sbca instead of the semantic method.
    pub sbca_example_ids: BTreeSet<String>,
}

/// An optimal hypothesis for the current coverage constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimized {
    pub hypothesis: Vec<RuleId>,
    pub sacrificed: BTreeSet<String>,
    pub rule_cost: u64,
    pub penalty: u64,
    pub nodes: u64,
}

impl Optimized {
    pub fn cost(&self) -> u64 {
        self.rule_cost + self.penalty
    }
}

impl LearnerState {
    pub fn new(space: Arc<HypothesisSpace>, examples: Vec<CdpiExample>, scheme: Scheme) -> Result<Self> {
        let mut ids = HashSet::new();
        for e in &examples {
            e.validate()?;
            if !ids.insert(e.id.as_str()) {
                return Err(Error::Invariant(format!("duplicate example id {}", e.id)));
            }
        }
        Ok(LearnerState {
            space,
            examples,
            cc: Vec::new(),
            scheme,
            sbca_example_ids: BTreeSet::new(),
        })
    }

    pub fn example(&self, id: &str) -> Option<&CdpiExample> {
        self.examples.iter().find(|e| e.id == id)
    }

    fn example_index(&self) -> HashMap<&str, usize> {
        self.examples
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect()
    }

    /// Appends a coverage constraint after checking its ids and example.
    pub fn add_constraint(&mut self, cc: CoverageConstraint) -> Result<()> {
        if self.example(&cc.example_id).is_none() {
            return Err(Error::Invariant(format!("unknown example {}", cc.example_id)));
        }
        if let Some(r) = cc.formula.ids().into_iter().find(|r| r.0 as usize >= self.space.len()) {
            return Err(Error::Invariant(format!("formula mentions unknown rule {r}")));
        }
        self.cc.push(cc);
        Ok(())
    }

    pub fn rules(&self, ids: &[RuleId]) -> Vec<Constraint> {
        ids.iter().map(|&r| self.space.get(r).clone()).collect()
    }
}

/// Minimizes hypothesis cost plus sacrificed weight over the coverage
/// constraints of `state`; see [`optimize_problem`].
pub fn optimize(state: &LearnerState) -> Result<Optimized> {
    let index = state.example_index();
    let weights: Vec<Option<u64>> = state.examples.iter().map(|e| e.weight).collect();
    let formulas: Vec<(usize, &Formula)> = state
        .cc
        .iter()
        .map(|c| (index[c.example_id.as_str()], &c.formula))
        .collect();
    let space = &state.space;
    let scheme = state.scheme;
    let cost = move |r: RuleId| space.cost(r, scheme) as u64;
    let opt = optimize_problem(&Problem {
        weights: &weights,
        formulas: &formulas,
        cost: &cost,
    })?;
    Ok(Optimized {
        sacrificed: opt
            .sacrificed
            .iter()
            .map(|&i| state.examples[i].id.clone())
            .collect(),
        rule_cost: opt.rule_cost,
        penalty: opt.penalty,
        nodes: opt.nodes,
        hypothesis: opt.hypothesis,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sbca,
    SemanticNegative,
    SemanticPositive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverage {
    Covered,
    /// Not covered; for a negative example, the accepting answer set.
    Uncovered(Option<Solution>),
    Indeterminate,
}

/// Does `ground` (the hypothesis, grounded on `e`'s context) cover `e`?
pub fn check_coverage(e: &CdpiExample, ground: &[GroundConstraint], timeout_ms: u64) -> Result<Coverage> {
    let cfg = SearchConfig::default().with_timeout_ms(timeout_ms);
    let acc = accepting_with_ground(&e.context, &e.inclusions, &e.exclusions, ground, &cfg)?;
    Ok(match (e.label, acc) {
        (_, Acceptance::Indeterminate) => Coverage::Indeterminate,
        (Label::Positive, Acceptance::Accepting(_)) => Coverage::Covered,
        (Label::Positive, Acceptance::NoneExists) => Coverage::Uncovered(None),
        (Label::Negative, Acceptance::NoneExists) => Coverage::Covered,
        (Label::Negative, Acceptance::Accepting(s)) => Coverage::Uncovered(Some(s)),
    })
}

/// Positive examples with an empty partial interpretation whose context
/// cannot be fully enumerated within `threshold_ms`.
pub fn flag_slow_enumerations(examples: &[CdpiExample], threshold_ms: u64) -> BTreeSet<String> {
    examples
        .par_iter()
        .filter(|e| e.is_positive() && e.inclusions.is_empty() && e.exclusions.is_empty())
        .filter(|e| {
            let cfg = SearchConfig::default().with_timeout_ms(threshold_ms);
            count(&e.context, &[], &cfg).status == SearchStatus::TimedOut
        })
        .map(|e| e.id.clone())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdilpConfig {
    /// Wall-clock budget for the whole run.
    pub budget_ms: u64,
    /// Solver timeout per coverage check.
    pub coverage_timeout_ms: u64,
    pub candidate_budget: CandidateBudget,
}

impl Default for CdilpConfig {
    fn default() -> Self {
        CdilpConfig {
            budget_ms: 300_000,
            coverage_timeout_ms: 10_000,
            candidate_budget: CandidateBudget::default(),
        }
    }
}

/// One sbca call, kept so its guarantees can be audited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SbcaEvent {
    pub example_id: String,
    pub hypothesis: Vec<RuleId>,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub example: String,
    pub method: Method,
    pub clauses: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub cc_size: usize,
    pub cost: u64,
    pub hypothesis: Vec<String>,
    pub analyzed: Vec<Analysis>,
    /// Examples whose coverage check timed out this round.
    pub indeterminate: Vec<String>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnStatus {
    /// No new conflict: the hypothesis is optimal.
    Optimal,
    /// No new conflict, but some coverage checks timed out.
    Unverified,
    BudgetExpired,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnReport {
    pub status: LearnStatus,
    pub scheme: Scheme,
    pub hypothesis: Vec<String>,
    pub cost: u64,
    pub sacrificed: Vec<String>,
    pub examples: usize,
    pub sbca_examples: Vec<String>,
    pub iterations: Vec<IterationReport>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub hypothesis: Vec<RuleId>,
    pub rules: Vec<Constraint>,
    pub report: LearnReport,
    pub sbca_events: Vec<SbcaEvent>,
}

impl LearnOutcome {
    pub fn is_optimal(&self) -> bool {
        self.report.status == LearnStatus::Optimal
    }
}

/// Learned constraints as ASP text, one per line.
pub fn write_hypothesis(rules: &[Constraint]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

/// The CDILP loop. Returns the last optimal hypothesis for the collected
/// constraints; the report says whether it was verified on every example.
pub fn cdilp(state: &mut LearnerState, cfg: &CdilpConfig) -> Result<LearnOutcome> {
    let start = Instant::now();
    let remaining = |start: &Instant| cfg.budget_ms.saturating_sub(start.elapsed().as_millis() as u64);
    let mut compiled: Option<CompiledSpace> = None;
    let mut iterations = Vec::new();
    let mut sbca_events = Vec::new();
    let mut analyzed_pairs: HashSet<(Vec<RuleId>, String)> = HashSet::new();

    loop {
        let opt = optimize(state)?;
        let h = opt.hypothesis.clone();
        let rules = state.rules(&h);
        let mut report = IterationReport {
            iteration: iterations.len() + 1,
            cc_size: state.cc.len(),
            cost: opt.cost(),
            hypothesis: rules.iter().map(|r| r.to_string()).collect(),
            analyzed: Vec::new(),
            indeterminate: Vec::new(),
            elapsed_ms: 0,
        };

        let finish = |status: LearnStatus, iterations: Vec<IterationReport>, events: Vec<SbcaEvent>, state: &LearnerState| {
            LearnOutcome {
                hypothesis: h.clone(),
                rules: rules.clone(),
                report: LearnReport {
                    status,
                    scheme: state.scheme,
                    hypothesis: rules.iter().map(|r| r.to_string()).collect(),
                    cost: opt.cost(),
                    sacrificed: opt.sacrificed.iter().cloned().collect(),
                    examples: state.examples.len(),
                    sbca_examples: state.sbca_example_ids.iter().cloned().collect(),
                    iterations,
                    elapsed_ms: start.elapsed().as_millis() as u64,
                },
                sbca_events: events,
            }
        };

        // ground the hypothesis once per context
        let mut grounded: HashMap<usize, Vec<GroundConstraint>> = HashMap::new();
        for e in &state.examples {
            let key = Arc::as_ptr(&e.context) as usize;
            if let std::collections::hash_map::Entry::Vacant(slot) = grounded.entry(key) {
                slot.insert(ground_all(&rules, &e.context)?);
            }
        }

        let budget_left = remaining(&start);
        if budget_left == 0 {
            iterations.push(report);
            return Ok(finish(LearnStatus::BudgetExpired, iterations, sbca_events, state));
        }
        let timeout = cfg.coverage_timeout_ms.min(budget_left);
        let pending: Vec<&CdpiExample> = state
            .examples
            .iter()
            .filter(|e| !opt.sacrificed.contains(&e.id))
            .collect();
        let mut checks: Vec<(String, Coverage)> = pending
            .par_iter()
            .map(|e| {
                let ground = &grounded[&(Arc::as_ptr(&e.context) as usize)];
                check_coverage(e, ground, timeout).map(|c| (e.id.clone(), c))
            })
            .collect::<Result<_>>()?;
        checks.sort_by(|a, b| a.0.cmp(&b.0));

        let mut new = Vec::new();
        for (id, coverage) in checks {
            let e = state.example(&id).expect("checked example exists");
            let witness = match coverage {
                Coverage::Covered => continue,
                Coverage::Indeterminate => {
                    log::warn!("coverage check for {id} timed out; skipped this round");
                    report.indeterminate.push(id);
                    continue;
                }
                Coverage::Uncovered(w) => w,
            };
            // the collected constraints already explain this failure
            let index = state.example_index();
            let explained = state
                .cc
                .iter()
                .any(|c| index[c.example_id.as_str()] == index[id.as_str()] && !c.formula.eval(&h));
            if explained {
                continue;
            }
            if !analyzed_pairs.insert((h.clone(), id.clone())) {
                return Err(Error::Invariant(format!(
                    "example {id} analyzed twice under the same hypothesis"
                )));
            }
            let (cc, method) = match witness {
                Some(w) => {
                    let compiled = match &mut compiled {
                        Some(c) => c,
                        slot => slot.insert(CompiledSpace::new(&state.space)?),
                    };
                    (
                        semantic_conflict_negative(e, &w, &h, compiled)?,
                        Method::SemanticNegative,
                    )
                }
                None => {
                    let mut semantic = None;
                    if !state.sbca_example_ids.contains(&id) {
                        let compiled = match &mut compiled {
                            Some(c) => c,
                            slot => slot.insert(CompiledSpace::new(&state.space)?),
                        };
                        semantic = semantic_conflict_positive(e, &h, compiled, cfg.candidate_budget)?;
                        if semantic.is_none() {
                            log::info!("{id}: too many candidates, switching to sbca");
                        }
                    }
                    match semantic {
                        Some(cc) => (cc, Method::SemanticPositive),
                        None => {
                            let cc = sbca(e, &h, &state.space)?;
                            sbca_events.push(SbcaEvent {
                                example_id: id.clone(),
                                hypothesis: h.clone(),
                                formula: cc.formula.clone(),
                            });
                            (cc, Method::Sbca)
                        }
                    }
                }
            };
            if cc.formula.eval(&h) {
                return Err(Error::Invariant(format!(
                    "conflict for {id} does not exclude the hypothesis that triggered it"
                )));
            }
            if method == Method::Sbca {
                state.sbca_example_ids.insert(id.clone());
            }
            report.analyzed.push(Analysis {
                example: id,
                method,
                clauses: cc.formula.clauses().len(),
            });
            new.push(cc);
        }

        report.elapsed_ms = start.elapsed().as_millis() as u64;
        let indeterminate = !report.indeterminate.is_empty();
        let done = new.is_empty();
        iterations.push(report);
        for cc in new {
            state.add_constraint(cc)?;
        }
        if done {
            let status = if indeterminate {
                LearnStatus::Unverified
            } else {
                LearnStatus::Optimal
            };
            return Ok(finish(status, iterations, sbca_events, state));
        }
        if remaining(&start) == 0 {
            // the hypothesis was not re-optimized for the latest conflicts
            return Ok(finish(LearnStatus::BudgetExpired, iterations, sbca_events, state));
        }
    }
}

/// Enumerates the solutions of `inst` that survive `rules`, up to `limit`.
pub fn surviving_solutions(inst: &PupInstance, rules: &[Constraint], limit: Option<u64>) -> Result<Vec<Solution>> {
    let ground = ground_all(rules, inst)?;
    let mut cfg = SearchConfig::default();
    cfg.limit = limit;
    let mut out = Vec::new();
    crate::solver::for_each_solution(inst, &ground, &cfg, |s| {
        out.push(s.clone());
        ControlFlow::Continue(())
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{gen_positive, scalable_fullsbcs};
    use crate::hypothesis::{build_space, LanguageBias};
    use crate::instance::make_fig1_instance;
    use crate::symmetry::{detect_generators, AtomOrder};

    fn pup_space() -> Arc<HypothesisSpace> {
        Arc::new(build_space(LanguageBias::pup()))
    }

    #[test]
    fn gen_only_learns_nothing() {
        let inst = Arc::new(make_fig1_instance());
        let mut state = LearnerState::new(pup_space(), vec![gen_positive(&inst)], Scheme::Custom).unwrap();
        let out = cdilp(&mut state, &CdilpConfig::default()).unwrap();
        assert!(out.hypothesis.is_empty());
        assert!(out.is_optimal());
        assert_eq!(out.report.iterations.len(), 1);
    }

    #[test]
    fn cc_empty_optimum() {
        let state = LearnerState::new(pup_space(), Vec::new(), Scheme::Custom).unwrap();
        let o = optimize(&state).unwrap();
        assert!(o.hypothesis.is_empty() && o.cost() == 0);
    }

    #[test]
    fn fig1_fullsbcs_task() {
        let inst = Arc::new(make_fig1_instance());
        let gens = detect_generators(&inst);
        let ord = AtomOrder::new(&inst, &gens);
        let mut examples = scalable_fullsbcs(&inst, &gens, &ord, 20, 5, 3);
        examples.push(gen_positive(&inst));
        let mut state = LearnerState::new(pup_space(), examples.clone(), Scheme::Custom).unwrap();
        let out = cdilp(&mut state, &CdilpConfig::default()).unwrap();
        assert!(out.is_optimal(), "{:?}", out.report.status);
        // post-hoc audit with the solver
        let ground = ground_all(&out.rules, &inst).unwrap();
        for e in &examples {
            let cov = check_coverage(e, &ground, 10_000).unwrap();
            if out.report.sacrificed.contains(&e.id) {
                continue;
            }
            assert_eq!(cov, Coverage::Covered, "{}", e.id);
        }
        assert!(!surviving_solutions(&inst, &out.rules, Some(1)).unwrap().is_empty());
    }
}
