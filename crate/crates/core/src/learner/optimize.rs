//! Exact hypothesis optimization over coverage constraints.
//!
//! Only rules that occur positively in some formula can ever help, so those
//! are the decision variables; every other rule stays out. The search is a
//! depth-first branch-and-bound:
//!
//! * the default completion of a node leaves every undecided rule out;
//! * a formula false under that completion can be repaired by any clause
//!   whose positive rules are not excluded and whose negated rules are not
//!   included; with no repair left, its example has to be sacrificed;
//! * the node branches on the open formula with the fewest repairs, one
//!   child per repair plus one that sacrifices the example;
//! * the bound charges every open example the cheaper of its weight and its
//!   cheapest repair, with each rule's cost split evenly among the open
//!   examples it could repair.
//!
//! Before the search, a rule is dropped when another rule is at most as
//! expensive (with a smaller id on equal cost), repairs at least the same
//! formulas and is negated in no clause the first is not negated in;
//! swapping it in never hurts. This preprocessing only runs when every
//! clause with a positive literal is a unit clause, which is the shape all
//! conflict-analysis methods produce.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::hypothesis::RuleId;

use super::formula::Formula;

/// The best hypothesis for a set of coverage constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    /// Sorted rule ids.
    pub hypothesis: Vec<RuleId>,
    /// Indices of the examples left uncovered.
    pub sacrificed: BTreeSet<usize>,
    pub rule_cost: u64,
    pub penalty: u64,
    /// Search nodes visited.
    pub nodes: u64,
}

impl Optimum {
    pub fn cost(&self) -> u64 {
        self.rule_cost + self.penalty
    }

    fn key(&self) -> (u64, usize, &[RuleId]) {
        (self.cost(), self.hypothesis.len(), &self.hypothesis)
    }
}

/// One optimization problem: per-example weights (`None` is infinite),
/// formulas attached to examples, and a cost per rule id.
pub struct Problem<'a> {
    pub weights: &'a [Option<u64>],
    pub formulas: &'a [(usize, &'a Formula)],
    pub cost: &'a dyn Fn(RuleId) -> u64,
}

#[derive(Clone, Debug)]
struct Clause {
    pos: Vec<usize>,
    neg: Vec<usize>,
}

struct Dense {
    ids: Vec<RuleId>,
    cost: Vec<u64>,
    /// per formula: owning example and clauses
    formulas: Vec<(usize, Vec<Clause>)>,
    weights: Vec<Option<u64>>,
}

fn densify(p: &Problem<'_>) -> Dense {
    let mut candidates: BTreeSet<RuleId> = BTreeSet::new();
    for (_, f) in p.formulas {
        for c in f.clauses() {
            candidates.extend(c.iter().filter(|l| l.positive).map(|l| l.id));
        }
    }
    let ids: Vec<RuleId> = candidates.into_iter().collect();
    let index: HashMap<RuleId, usize> = ids.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let formulas = p
        .formulas
        .iter()
        .map(|(e, f)| {
            let clauses = f
                .clauses()
                .iter()
                .map(|c| Clause {
                    pos: c.iter().filter(|l| l.positive).map(|l| index[&l.id]).collect(),
                    // negations of rules that can never be chosen are always true
                    neg: c
                        .iter()
                        .filter(|l| !l.positive)
                        .filter_map(|l| index.get(&l.id).copied())
                        .collect(),
                })
                .collect();
            (*e, clauses)
        })
        .collect();
    Dense {
        cost: ids.iter().map(|&r| (p.cost)(r)).collect(),
        ids,
        formulas,
        weights: p.weights.to_vec(),
    }
}

/// Rules no optimal hypothesis needs, given the unit-clause shape.
fn dominated_rules(d: &Dense) -> Vec<bool> {
    let m = d.ids.len();
    let mut removed = vec![false; m];
    let unit_shape = d
        .formulas
        .iter()
        .all(|(_, cs)| cs.iter().all(|c| c.pos.is_empty() || (c.pos.len() == 1 && c.neg.is_empty())));
    if !unit_shape {
        return removed;
    }
    let num_f = d.formulas.len();
    let num_c: usize = d.formulas.iter().map(|(_, cs)| cs.len()).sum();
    let words = |n: usize| n.div_ceil(64);
    let mut pos = vec![vec![0u64; words(num_f)]; m];
    let mut neg = vec![vec![0u64; words(num_c)]; m];
    let mut ci = 0;
    for (fi, (_, cs)) in d.formulas.iter().enumerate() {
        for c in cs {
            for &r in &c.pos {
                pos[r][fi / 64] |= 1 << (fi % 64);
            }
            for &r in &c.neg {
                neg[r][ci / 64] |= 1 << (ci % 64);
            }
            ci += 1;
        }
    }
    let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);
    for r in 0..m {
        for s in 0..m {
            if r == s || removed[s] || d.cost[s] > d.cost[r] {
                continue;
            }
            if !subset(&pos[r], &pos[s]) || !subset(&neg[s], &neg[r]) {
                continue;
            }
            // equal cost: only a smaller id keeps the tie-break intact
            if d.cost[s] < d.cost[r] || s < r {
                removed[r] = true;
                break;
            }
        }
    }
    removed
}

struct Search<'a> {
    d: &'a Dense,
    best: Option<Optimum>,
    nodes: u64,
    unit_shape: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Var {
    Free,
    In,
    Out,
}

struct Open {
    example: usize,
    /// per failing formula: its repairs as lists of rules to add
    repairs: Vec<Vec<Vec<usize>>>,
}

impl Search<'_> {
    fn clause_true(c: &Clause, vars: &[Var]) -> bool {
        c.pos.iter().all(|&r| vars[r] == Var::In) && c.neg.iter().all(|&r| vars[r] != Var::In)
    }

    /// Penalty of the examples some formula of which `h` falsifies.
    fn leaf(&mut self, vars: &[Var]) {
        let mut failed = BTreeSet::new();
        for (e, cs) in &self.d.formulas {
            if !failed.contains(e) && !cs.iter().any(|c| Self::clause_true(c, vars)) {
                failed.insert(*e);
            }
        }
        if failed.iter().any(|&e| self.d.weights[e].is_none()) {
            return;
        }
        let hypothesis: Vec<RuleId> = (0..vars.len())
            .filter(|&r| vars[r] == Var::In)
            .map(|r| self.d.ids[r])
            .collect();
        let cand = Optimum {
            rule_cost: (0..vars.len())
                .filter(|&r| vars[r] == Var::In)
                .map(|r| self.d.cost[r])
                .sum(),
            penalty: failed.iter().map(|&e| self.d.weights[e].unwrap_or(0)).sum(),
            hypothesis,
            sacrificed: failed,
            nodes: 0,
        };
        let better = match &self.best {
            None => true,
            Some(b) => cand.key().cmp(&b.key()) == Ordering::Less,
        };
        if better {
            self.best = Some(cand);
        }
    }

    fn dfs(&mut self, vars: &mut Vec<Var>, sac: &mut Vec<bool>) {
        self.nodes += 1;
        let d = self.d;
        // classify the formulas under the default completion
        let mut forced: Vec<usize> = Vec::new();
        let mut open: Vec<Open> = Vec::new();
        let mut by_example: HashMap<usize, usize> = HashMap::new();
        for (e, cs) in &d.formulas {
            if sac[*e] || forced.contains(e) {
                continue;
            }
            if cs.iter().any(|c| Self::clause_true(c, vars)) {
                continue;
            }
            let repairs: Vec<Vec<usize>> = cs
                .iter()
                .filter(|c| c.neg.iter().all(|&r| vars[r] != Var::In))
                .filter(|c| c.pos.iter().all(|&r| vars[r] != Var::Out))
                .map(|c| c.pos.iter().copied().filter(|&r| vars[r] == Var::Free).collect())
                .collect();
            if repairs.is_empty() {
                if d.weights[*e].is_none() {
                    return;
                }
                forced.push(*e);
                if let Some(i) = by_example.remove(e) {
                    open.swap_remove(i);
                    if i < open.len() {
                        by_example.insert(open[i].example, i);
                    }
                }
                continue;
            }
            match by_example.get(e) {
                Some(&i) => open[i].repairs.push(repairs),
                None => {
                    by_example.insert(*e, open.len());
                    open.push(Open {
                        example: *e,
                        repairs: vec![repairs],
                    });
                }
            }
        }

        let rule_cost: u64 = (0..vars.len()).filter(|&r| vars[r] == Var::In).map(|r| d.cost[r]).sum();
        let sac_cost: u64 = (0..sac.len())
            .filter(|&e| sac[e])
            .chain(forced.iter().copied())
            .map(|e| d.weights[e].unwrap_or(0))
            .sum();
        let base = rule_cost + sac_cost;

        if open.is_empty() {
            self.leaf(vars);
            return;
        }

        // bound
        let mut degree: HashMap<usize, u32> = HashMap::new();
        for o in &open {
            let rules: BTreeSet<usize> = o.repairs.iter().flatten().flatten().copied().collect();
            for r in rules {
                *degree.entry(r).or_default() += 1;
            }
        }
        let share = |r: usize| d.cost[r] as f64 / degree[&r] as f64;
        let mut bound = base as f64;
        for o in &open {
            let need = o
                .repairs
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|c| c.iter().map(|&r| share(r)).sum::<f64>())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            bound += match d.weights[o.example] {
                Some(w) => need.min(w as f64),
                None => need,
            };
        }
        if let Some(b) = &self.best {
            if bound > b.cost() as f64 + 1e-9 {
                return;
            }
        }

        // branch on the formula with the fewest repairs
        let (oi, fi) = open
            .iter()
            .enumerate()
            .flat_map(|(oi, o)| o.repairs.iter().enumerate().map(move |(fi, f)| (oi, fi, f.len())))
            .min_by_key(|&(_, _, n)| n)
            .map(|(oi, fi, _)| (oi, fi))
            .expect("open is non-empty");
        let example = open[oi].example;
        let mut repairs = open[oi].repairs[fi].clone();
        repairs.sort_by(|a, b| {
            let ca: f64 = a.iter().map(|&r| share(r)).sum();
            let cb: f64 = b.iter().map(|&r| share(r)).sum();
            ca.total_cmp(&cb).then_with(|| a.cmp(b))
        });
        let exclusive = self.unit_shape && repairs.iter().all(|c| c.len() == 1);

        for &e in &forced {
            sac[e] = true;
        }
        let mut excluded = Vec::new();
        for c in &repairs {
            for &r in c {
                vars[r] = Var::In;
            }
            self.dfs(vars, sac);
            for &r in c {
                vars[r] = Var::Free;
            }
            if exclusive {
                vars[c[0]] = Var::Out;
                excluded.push(c[0]);
            }
        }
        if d.weights[example].is_some() {
            sac[example] = true;
            self.dfs(vars, sac);
            sac[example] = false;
        }
        for r in excluded {
            vars[r] = Var::Free;
        }
        for &e in &forced {
            sac[e] = false;
        }
    }
}

/// Minimizes rule cost plus the weights of sacrificed examples, subject to
/// every kept example satisfying all its formulas. Ties go to fewer rules,
/// then to the lexicographically smallest sorted id list.
pub fn optimize_problem(p: &Problem<'_>) -> Result<Optimum> {
    let d = densify(p);
    let removed = dominated_rules(&d);
    let unit_shape = removed.iter().any(|&x| x)
        || d
            .formulas
            .iter()
            .all(|(_, cs)| cs.iter().all(|c| c.pos.is_empty() || (c.pos.len() == 1 && c.neg.is_empty())));
    let mut vars: Vec<Var> = removed.iter().map(|&x| if x { Var::Out } else { Var::Free }).collect();
    let mut sac = vec![false; d.weights.len()];
    let mut search = Search {
        d: &d,
        best: None,
        nodes: 0,
        unit_shape,
    };
    search.dfs(&mut vars, &mut sac);
    let nodes = search.nodes;
    search
        .best
        .map(|mut b| {
            b.nodes = nodes;
            b
        })
        .ok_or_else(|| {
            Error::Unsatisfiable(
                "the coverage constraints of some infinite-weight example cannot all hold".into(),
            )
        })
}

/// Exhaustive search over all subsets of the mentioned ids, for testing.
pub fn optimize_exhaustive(p: &Problem<'_>) -> Option<Optimum> {
    let ids: Vec<RuleId> = p
        .formulas
        .iter()
        .flat_map(|(_, f)| f.ids())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(ids.len() <= 20, "exhaustive oracle is exponential");
    let mut best: Option<Optimum> = None;
    for mask in 0u32..(1 << ids.len()) {
        let h: Vec<RuleId> = (0..ids.len()).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
        let failed: BTreeSet<usize> = p
            .formulas
            .iter()
            .filter(|(_, f)| !f.eval(&h))
            .map(|(e, _)| *e)
            .collect();
        if failed.iter().any(|&e| p.weights[e].is_none()) {
            continue;
        }
        let cand = Optimum {
            rule_cost: h.iter().map(|&r| (p.cost)(r)).sum(),
            penalty: failed.iter().map(|&e| p.weights[e].unwrap_or(0)).sum(),
            hypothesis: h,
            sacrificed: failed,
            nodes: 0,
        };
        if best.as_ref().is_none_or(|b| cand.key() < b.key()) {
            best = Some(cand);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::formula::IdLiteral;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(i: u32) -> RuleId {
        RuleId(i)
    }

    #[test]
    fn empty_and_forced() {
        let cost = |_: RuleId| 1;
        let none = Problem {
            weights: &[],
            formulas: &[],
            cost: &cost,
        };
        let o = optimize_problem(&none).unwrap();
        assert!(o.hypothesis.is_empty() && o.cost() == 0);

        let f = Formula::new([vec![IdLiteral::pos(r(5))]]);
        let forced = Problem {
            weights: &[None],
            formulas: &[(0, &f)],
            cost: &cost,
        };
        assert_eq!(optimize_problem(&forced).unwrap().hypothesis, vec![r(5)]);
    }

    #[test]
    fn infinite_conflict_is_unsatisfiable() {
        let cost = |_: RuleId| 1;
        let must = Formula::new([vec![IdLiteral::pos(r(1))]]);
        let never = Formula::new([vec![IdLiteral::neg(r(1))]]);
        let p = Problem {
            weights: &[None, None],
            formulas: &[(0, &must), (1, &never)],
            cost: &cost,
        };
        assert!(matches!(optimize_problem(&p), Err(Error::Unsatisfiable(_))));
        let f = Formula::falsum();
        let p = Problem {
            weights: &[None],
            formulas: &[(0, &f)],
            cost: &cost,
        };
        assert!(optimize_problem(&p).is_err());
    }

    #[test]
    fn sacrifice_when_cheaper() {
        let cost = |_: RuleId| 5;
        let f = Formula::new([vec![IdLiteral::pos(r(1))]]);
        let p = Problem {
            weights: &[Some(2)],
            formulas: &[(0, &f)],
            cost: &cost,
        };
        let o = optimize_problem(&p).unwrap();
        assert!(o.hypothesis.is_empty());
        assert_eq!(o.sacrificed, BTreeSet::from([0]));
        assert_eq!(o.cost(), 2);
    }

    fn random_formula(rng: &mut ChaCha8Rng, ids: u32) -> Formula {
        if rng.gen_bool(0.5) {
            // negative-example shape
            let n = rng.gen_range(0..4);
            Formula::new((0..n).map(|_| vec![IdLiteral::pos(r(rng.gen_range(0..ids)))]))
        } else {
            // positive-example shape
            let n = rng.gen_range(1..4);
            Formula::new((0..n).map(|_| {
                let k = rng.gen_range(0..4);
                (0..k).map(|_| IdLiteral::neg(r(rng.gen_range(0..ids)))).collect()
            }))
        }
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..400 {
            let ids = rng.gen_range(1..=12);
            let examples = rng.gen_range(1..8);
            let weights: Vec<Option<u64>> = (0..examples)
                .map(|_| if rng.gen_bool(0.25) { None } else { Some(rng.gen_range(1..6)) })
                .collect();
            let formulas: Vec<(usize, Formula)> = (0..rng.gen_range(1..10))
                .map(|_| (rng.gen_range(0..examples), random_formula(&mut rng, ids)))
                .collect();
            let costs: Vec<u64> = (0..ids).map(|_| rng.gen_range(1..7)).collect();
            let cost = |id: RuleId| costs[id.0 as usize];
            let refs: Vec<(usize, &Formula)> = formulas.iter().map(|(e, f)| (*e, f)).collect();
            let p = Problem {
                weights: &weights,
                formulas: &refs,
                cost: &cost,
            };
            let fast = optimize_problem(&p).ok();
            let slow = optimize_exhaustive(&p);
            assert_eq!(
                fast.as_ref().map(|o| (o.cost(), o.hypothesis.clone(), o.sacrificed.clone())),
                slow.as_ref().map(|o| (o.cost(), o.hypothesis.clone(), o.sacrificed.clone())),
                "{formulas:?} {weights:?} {costs:?}"
            );
        }
    }
}
