//! Training examples for the learner: *scalable enum*, *scalable fullSBCs*
//! and the bare positives of the generalization instances.
//!
//! Examples serialize in an ILASP-like text form, one example per block:
//!
//! ```text
//! #neg(double-6_c1_n1@1, {unit2zone(1,1), unit2zone(1,2)}, {unit2zone(2,1)}, {
//! % instance double-6
//! comUnit(1).
//! ...
//! }).
//! ```
//!
//! Weights follow the id after `@`; an example without one has infinite
//! weight. Negatives always carry a finite weight.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{solution_atoms, GroundAtom};
use crate::error::{Error, Result};
use crate::instance::PupInstance;
use crate::solution::Solution;
use crate::solver::{self, for_each_solution, SearchConfig};
use crate::symmetry::{dominated, lex_smallest, orbit, AtomOrder, AtomPermutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

/// A context-dependent partial interpretation with a label and a weight.
/// `weight: None` is infinite: the example may never be left uncovered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdpiExample {
    pub id: String,
    pub label: Label,
    pub inclusions: BTreeSet<GroundAtom>,
    pub exclusions: BTreeSet<GroundAtom>,
    pub context: Arc<PupInstance>,
    pub weight: Option<u64>,
}

impl CdpiExample {
    pub fn is_positive(&self) -> bool {
        self.label == Label::Positive
    }

    /// Checks the example invariants: disjoint partial interpretation,
    /// finite positive weights, negatives never infinite.
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.inclusions.intersection(&self.exclusions).next() {
            return Err(Error::Invariant(format!(
                "example {}: {a} is both included and excluded",
                self.id
            )));
        }
        if self.weight == Some(0) {
            return Err(Error::Invariant(format!("example {}: zero weight", self.id)));
        }
        if self.label == Label::Negative && self.weight.is_none() {
            return Err(Error::Invariant(format!(
                "negative example {} needs a finite weight",
                self.id
            )));
        }
        if self.id.is_empty() || self.id.contains(|c: char| c == ',' || c == '@' || c.is_whitespace()) {
            return Err(Error::Invariant(format!("bad example id `{}`", self.id)));
        }
        Ok(())
    }
}

/// Default weights: negatives 1, positives from the training instances
/// infinite.
pub const NEGATIVE_WEIGHT: u64 = 1;

/// The partial interpretation of `sol` over atoms(Π).
fn partial_interpretation(
    inst: &PupInstance,
    sol: &Solution,
    ord: &AtomOrder,
) -> (BTreeSet<GroundAtom>, BTreeSet<GroundAtom>) {
    let atoms = solution_atoms(inst, sol);
    ord.atoms()
        .iter()
        .copied()
        .partition(|a| atoms.contains(a))
}

fn solution_example(
    id: String,
    label: Label,
    inst: &Arc<PupInstance>,
    sol: &Solution,
    ord: &AtomOrder,
) -> CdpiExample {
    let (inclusions, exclusions) = partial_interpretation(inst, sol, ord);
    CdpiExample {
        id,
        label,
        inclusions,
        exclusions,
        context: inst.clone(),
        weight: match label {
            Label::Positive => None,
            Label::Negative => Some(NEGATIVE_WEIGHT),
        },
    }
}

/// True when the examples are all positive or all negative; such a task
/// cannot teach anything useful.
pub fn is_one_sided(examples: &[CdpiExample]) -> bool {
    let pos = examples.iter().filter(|e| e.is_positive()).count();
    pos == 0 || pos == examples.len()
}

/// Draws up to `n` distinct solutions by seeded random restarts of the
/// solver and labels each one negative when a single generator maps it to a
/// lex-smaller solution, positive otherwise.
///
/// Returns an empty list (and logs why) on an unsatisfiable instance. A
/// one-sided result is returned as is; see [`is_one_sided`].
pub fn scalable_enum(
    inst: &Arc<PupInstance>,
    gens: &[AtomPermutation],
    ord: &AtomOrder,
    n: usize,
    seed: u64,
) -> Vec<CdpiExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Solution> = HashSet::new();
    let mut drawn = Vec::new();
    // restarts stop paying off once they keep returning known solutions
    let max_restarts = 4 * n + 16;
    for _ in 0..max_restarts {
        if drawn.len() >= n {
            break;
        }
        let cfg = SearchConfig::default().randomized(rng.gen());
        match solver::solve(inst, &[], &cfg).solution {
            Some(s) => {
                if seen.insert(s.clone()) {
                    drawn.push(s);
                }
            }
            None => {
                log::warn!("{}: unsatisfiable, no examples generated", inst.name());
                return Vec::new();
            }
        }
    }
    if drawn.len() < n {
        // few solutions: top up from a randomized enumeration
        let cfg = SearchConfig::default().randomized(rng.gen());
        for_each_solution(inst, &[], &cfg, |s| {
            if seen.insert(s.clone()) {
                drawn.push(s.clone());
            }
            if drawn.len() >= n {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
    }

    let examples: Vec<CdpiExample> = drawn
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let label = if dominated(inst, s, gens, ord) {
                Label::Negative
            } else {
                Label::Positive
            };
            solution_example(format!("{}_e{}", inst.name(), i + 1), label, inst, s, ord)
        })
        .collect();
    if is_one_sided(&examples) {
        log::warn!("{}: scalable enum produced a one-sided example set", inst.name());
    }
    examples
}

/// Interleaves solving and orbit analysis. Each solution outside the orbits
/// explored so far opens a new cell: its orbit is closed by BFS, the first
/// `max_cell_size` members in BFS order other than the orbit minimum become
/// negatives, and the minimum becomes a positive. Stops after `cells` cells
/// or when the solutions run out.
pub fn scalable_fullsbcs(
    inst: &Arc<PupInstance>,
    gens: &[AtomPermutation],
    ord: &AtomOrder,
    cells: usize,
    max_cell_size: usize,
    seed: u64,
) -> Vec<CdpiExample> {
    let mut explored: HashSet<Solution> = HashSet::new();
    let mut examples = Vec::new();
    let mut done = 0;
    if cells == 0 {
        return examples;
    }
    let cfg = SearchConfig::default().randomized(seed);
    for_each_solution(inst, &[], &cfg, |s| {
        if explored.contains(s) {
            return ControlFlow::Continue(());
        }
        done += 1;
        let members = orbit(s, gens, None).members;
        let min = lex_smallest(inst, &members, ord).expect("orbit is non-empty");
        for (j, neg) in members.iter().filter(|m| **m != min).take(max_cell_size).enumerate() {
            examples.push(solution_example(
                format!("{}_c{done}_n{}", inst.name(), j + 1),
                Label::Negative,
                inst,
                neg,
                ord,
            ));
        }
        examples.push(solution_example(
            format!("{}_c{done}_p", inst.name()),
            Label::Positive,
            inst,
            &min,
            ord,
        ));
        explored.extend(members);
        if done >= cells {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if done == 0 {
        log::warn!("{}: unsatisfiable, no examples generated", inst.name());
    }
    examples
}

/// Positive example with an empty partial interpretation: the learned
/// constraints must leave `inst` satisfiable.
pub fn gen_positive(inst: &Arc<PupInstance>) -> CdpiExample {
    CdpiExample {
        id: format!("gen_{}", inst.name()),
        label: Label::Positive,
        inclusions: BTreeSet::new(),
        exclusions: BTreeSet::new(),
        context: inst.clone(),
        weight: None,
    }
}

fn write_atoms(f: &mut fmt::Formatter<'_>, atoms: &BTreeSet<GroundAtom>) -> fmt::Result {
    f.write_str("{")?;
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str("}")
}

impl fmt::Display for CdpiExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.label {
            Label::Positive => "pos",
            Label::Negative => "neg",
        };
        write!(f, "#{tag}({}", self.id)?;
        if let Some(w) = self.weight {
            write!(f, "@{w}")?;
        }
        f.write_str(", ")?;
        write_atoms(f, &self.inclusions)?;
        f.write_str(", ")?;
        write_atoms(f, &self.exclusions)?;
        write!(f, ", {{\n{}}}).", self.context.to_facts())
    }
}

/// Serializes examples, one block per example, each ending in a newline.
pub fn write_examples(examples: &[CdpiExample]) -> String {
    examples.iter().map(|e| format!("{e}\n")).collect()
}

fn parse_atom_set(text: &str, line: usize) -> Result<BTreeSet<GroundAtom>> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::parse(line, "expected `{...}`"))?;
    let mut out = BTreeSet::new();
    // atoms contain commas themselves, so split on the closing parenthesis
    for piece in inner.split_inclusive(')') {
        let piece = piece.trim().trim_start_matches(',').trim();
        if piece.is_empty() {
            continue;
        }
        out.insert(piece.parse().map_err(|e| Error::parse(line, format!("{e}")))?);
    }
    Ok(out)
}

/// Parses the output of [`write_examples`]. Examples sharing the same
/// context text share one instance.
pub fn parse_examples(text: &str) -> Result<Vec<CdpiExample>> {
    let mut contexts: HashMap<String, Arc<PupInstance>> = HashMap::new();
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((idx, line)) = lines.next() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (label, rest) = if let Some(r) = line.strip_prefix("#pos(") {
            (Label::Positive, r)
        } else if let Some(r) = line.strip_prefix("#neg(") {
            (Label::Negative, r)
        } else {
            return Err(Error::parse(line_no, format!("expected #pos or #neg, got `{line}`")));
        };
        let rest = rest
            .strip_suffix('{')
            .ok_or_else(|| Error::parse(line_no, "context must start at the end of the line"))?;
        let (head, rest) = rest
            .split_once(", {")
            .ok_or_else(|| Error::parse(line_no, "missing inclusions"))?;
        let (id, weight) = match head.split_once('@') {
            Some((id, w)) => (
                id,
                Some(w.parse::<u64>().map_err(|_| Error::parse(line_no, "bad weight"))?),
            ),
            None => (head, None),
        };
        let (inc, rest) = rest
            .split_once("}, {")
            .ok_or_else(|| Error::parse(line_no, "missing exclusions"))?;
        let exc = rest
            .strip_suffix("}, ")
            .ok_or_else(|| Error::parse(line_no, "missing context"))?;
        let inclusions = parse_atom_set(&format!("{{{inc}}}"), line_no)?;
        let exclusions = parse_atom_set(&format!("{{{exc}}}"), line_no)?;

        let mut ctx = String::new();
        loop {
            let (_, l) = lines
                .next()
                .ok_or_else(|| Error::parse(line_no, "unterminated context"))?;
            if l == "})." {
                break;
            }
            ctx.push_str(l);
            ctx.push('\n');
        }
        let context = match contexts.get(&ctx) {
            Some(c) => c.clone(),
            None => {
                let inst = Arc::new(PupInstance::parse_facts(&ctx, id)?);
                contexts.insert(ctx, inst.clone());
                inst
            }
        };
        let example = CdpiExample {
            id: id.to_string(),
            label,
            inclusions,
            exclusions,
            context,
            weight,
        };
        example
            .validate()
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
        out.push(example);
    }
    Ok(out)
}
