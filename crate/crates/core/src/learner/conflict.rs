use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::time::Instant;

use crate::atoms::SolutionModel;
use crate::error::{Error, Result};
use crate::examples::{CdpiExample, Label};
use crate::ground::CompiledConstraint;
use crate::hypothesis::{HypothesisSpace, RuleId};
use crate::instance::PupInstance;
use crate::solution::Solution;
use crate::solver::{for_each_accepting, SearchConfig, SearchStatus};

use super::formula::{CoverageConstraint, Formula, IdLiteral};

/// The hypothesis space compiled for evaluation against solutions.
pub struct CompiledSpace {
    rules: Vec<CompiledConstraint>,
}

impl CompiledSpace {
    pub fn new(space: &HypothesisSpace) -> Result<Self> {
        let rules = space
            .iter()
            .map(|(_, r)| CompiledConstraint::new(r))
            .collect::<Result<_>>()?;
        Ok(CompiledSpace { rules })
    }

    /// Ids of the rules with a ground instance violated by `sol`.
    pub fn violated_rules(&self, inst: &PupInstance, sol: &Solution) -> Vec<RuleId> {
        let model = SolutionModel::new(inst, sol);
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.violated_by(&model))
            .map(|(i, _)| RuleId(i as u32))
            .collect()
    }
}

/// Subsumption-based conflict analysis for a positive example that `h` does
/// not cover: `⋁_{r ∈ h} ⋀_{r' subsumes r} ¬r'`.
///
/// The formula is false at `h` (every rule subsumes itself) and true at
/// every hypothesis covering `e`: one that falsified it would contain a
/// subsumer of each rule of `h`, hence eliminate every answer set `h`
/// eliminates.
pub fn sbca(e: &CdpiExample, h: &[RuleId], space: &HypothesisSpace) -> Result<CoverageConstraint> {
    if e.label != Label::Positive {
        return Err(Error::Precondition(format!("sbca on negative example {}", e.id)));
    }
    if h.is_empty() {
        return Err(Error::Precondition(format!(
            "sbca on {} with an empty hypothesis, which covers every satisfiable positive",
            e.id
        )));
    }
    let clauses = h.iter().map(|&r| {
        space
            .subsumers(space.get(r))
            .into_iter()
            .map(IdLiteral::neg)
            .collect()
    });
    Ok(CoverageConstraint {
        example_id: e.id.clone(),
        formula: Formula::new(clauses),
    })
}

/// Conflict for a negative example with an accepting answer set `witness`
/// under `h`: some rule violated by the witness must be added. An empty
/// disjunction means no rule of the space can ever cover the example.
pub fn semantic_conflict_negative(
    e: &CdpiExample,
    witness: &Solution,
    h: &[RuleId],
    compiled: &CompiledSpace,
) -> Result<CoverageConstraint> {
    if e.label != Label::Negative {
        return Err(Error::Precondition(format!(
            "negative analysis on positive example {}",
            e.id
        )));
    }
    let violated = compiled.violated_rules(&e.context, witness);
    if let Some(r) = violated.iter().find(|r| h.contains(r)) {
        return Err(Error::Precondition(format!(
            "witness for {} violates hypothesis rule {r}",
            e.id
        )));
    }
    Ok(CoverageConstraint {
        example_id: e.id.clone(),
        formula: Formula::new(violated.into_iter().map(|r| vec![IdLiteral::pos(r)])),
    })
}

/// Limits for enumerating the accepting candidates of a positive example.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateBudget {
    pub max_candidates: usize,
    pub timeout_ms: u64,
}

impl Default for CandidateBudget {
    fn default() -> Self {
        CandidateBudget {
            max_candidates: 2000,
            timeout_ms: 5000,
        }
    }
}

/// Conflict for a positive example that `h` does not cover: some accepting
/// candidate must survive, `⋁_I ⋀_{r violated by I} ¬r`. Returns `None`
/// when the candidates exceed the budget; the caller falls back to
/// [`sbca`].
pub fn semantic_conflict_positive(
    e: &CdpiExample,
    h: &[RuleId],
    compiled: &CompiledSpace,
    budget: CandidateBudget,
) -> Result<Option<CoverageConstraint>> {
    if e.label != Label::Positive {
        return Err(Error::Precondition(format!(
            "positive analysis on negative example {}",
            e.id
        )));
    }
    let start = Instant::now();
    let mut clauses: BTreeSet<Vec<IdLiteral>> = BTreeSet::new();
    let mut over = false;
    let mut seen = 0usize;
    let cfg = SearchConfig::default().with_timeout_ms(budget.timeout_ms);
    let stats = for_each_accepting(&e.context, &e.inclusions, &e.exclusions, &[], &cfg, |s| {
        seen += 1;
        if seen > budget.max_candidates || start.elapsed().as_millis() as u64 > budget.timeout_ms {
            over = true;
            return ControlFlow::Break(());
        }
        let violated = compiled.violated_rules(&e.context, s);
        clauses.insert(violated.into_iter().map(IdLiteral::neg).collect());
        ControlFlow::Continue(())
    })?;
    if over || stats.status == SearchStatus::TimedOut {
        return Ok(None);
    }
    let formula = Formula::new(clauses);
    if formula.eval(h) {
        return Err(Error::Precondition(format!("{} is covered by the hypothesis", e.id)));
    }
    Ok(Some(CoverageConstraint {
        example_id: e.id.clone(),
        formula,
    }))
}
