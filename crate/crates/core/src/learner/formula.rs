use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hypothesis::RuleId;

/// `r_id` (the rule is in the hypothesis) or `¬r_id`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IdLiteral {
    pub id: RuleId,
    pub positive: bool,
}

impl IdLiteral {
    pub fn pos(id: RuleId) -> Self {
        IdLiteral { id, positive: true }
    }

    pub fn neg(id: RuleId) -> Self {
        IdLiteral { id, positive: false }
    }
}

/// A formula over rule ids in disjunctive normal form. No clauses is
/// `false`; an empty clause is `true`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Formula {
    clauses: Vec<Vec<IdLiteral>>,
}

impl Formula {
    /// Clauses are sorted and deduplicated; duplicate clauses collapse.
    pub fn new(clauses: impl IntoIterator<Item = Vec<IdLiteral>>) -> Self {
        let set: BTreeSet<Vec<IdLiteral>> = clauses
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        Formula {
            clauses: set.into_iter().collect(),
        }
    }

    pub fn falsum() -> Self {
        Formula::default()
    }

    pub fn clauses(&self) -> &[Vec<IdLiteral>] {
        &self.clauses
    }

    pub fn is_false(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Truth value under the hypothesis `h` (sorted or not).
    pub fn eval(&self, h: &[RuleId]) -> bool {
        self.eval_with(|id| h.contains(&id))
    }

    pub fn eval_with(&self, contains: impl Fn(RuleId) -> bool) -> bool {
        self.clauses
            .iter()
            .any(|c| c.iter().all(|l| contains(l.id) == l.positive))
    }

    /// Every id mentioned.
    pub fn ids(&self) -> BTreeSet<RuleId> {
        self.clauses.iter().flatten().map(|l| l.id).collect()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("false");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            if c.is_empty() {
                f.write_str("true")?;
                continue;
            }
            let many = c.len() > 1 && self.clauses.len() > 1;
            if many {
                f.write_str("(")?;
            }
            for (j, l) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(" & ")?;
                }
                if !l.positive {
                    f.write_str("!")?;
                }
                write!(f, "{}", l.id)?;
            }
            if many {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

/// A coverage constraint: `example_id` is covered only by hypotheses that
/// satisfy `formula`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageConstraint {
    pub example_id: String,
    pub formula: Formula,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let r = |i| RuleId(i);
        let f = Formula::new([
            vec![IdLiteral::neg(r(1))],
            vec![IdLiteral::neg(r(2)), IdLiteral::neg(r(3))],
        ]);
        assert!(!f.eval(&[r(1), r(2)]));
        assert!(f.eval(&[r(1)]));
        assert!(f.eval(&[]));
        assert!(!Formula::falsum().eval(&[]));
        assert!(Formula::new([vec![]]).eval(&[r(9)]));
        assert_eq!(f.to_string(), "!r1 | (!r2 & !r3)");
    }
}
