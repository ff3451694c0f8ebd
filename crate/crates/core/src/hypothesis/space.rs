use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bias::{LanguageBias, Modifier};
use super::constraint::{Constraint, Literal, Scheme};
use super::subsume::subsumes;

/// Dense identifier of a rule in a [`HypothesisSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(pub u32);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// The rules admitted by a language bias, one per isomorphism class.
#[derive(Clone, Debug)]
pub struct HypothesisSpace {
    rules: Vec<Constraint>,
    index: HashMap<Constraint, RuleId>,
}

impl HypothesisSpace {
    /// Wraps an explicit rule list; ids follow list order.
    pub fn from_rules(rules: Vec<Constraint>) -> Self {
        let mut uniq = Vec::new();
        let mut index = HashMap::new();
        for r in rules {
            if !index.contains_key(&r) {
                index.insert(r.clone(), RuleId(uniq.len() as u32));
                uniq.push(r);
            }
        }
        HypothesisSpace { rules: uniq, index }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, id: RuleId) -> &Constraint {
        &self.rules[id.0 as usize]
    }

    pub fn id_of(&self, r: &Constraint) -> Option<RuleId> {
        self.index.get(r).copied()
    }

    pub fn contains(&self, r: &Constraint) -> bool {
        self.index.contains_key(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = (RuleId, &Constraint)> {
        self.rules
            .iter()
            .enumerate()
            .map(|(i, r)| (RuleId(i as u32), r))
    }

    pub fn ids(&self) -> impl Iterator<Item = RuleId> {
        (0..self.rules.len() as u32).map(RuleId)
    }

    pub fn cost(&self, id: RuleId, scheme: Scheme) -> u32 {
        self.get(id).score(scheme)
    }

    /// Every rule of the space that subsumes `r` (`r` itself included when
    /// it is a member).
    pub fn subsumers(&self, r: &Constraint) -> Vec<RuleId> {
        self.iter()
            .filter(|(_, cand)| subsumes(cand, r))
            .map(|(id, _)| id)
            .collect()
    }

    /// Audit listing, one `id: constraint` line per rule.
    pub fn export(&self) -> String {
        self.iter().map(|(id, r)| format!("{}: {r}\n", id.0)).collect()
    }
}

fn candidate_literals(bias: &LanguageBias) -> Vec<Literal> {
    let mut out = Vec::new();
    for mode in &bias.modes {
        let pred: Arc<str> = Arc::from(mode.predicate.as_str());
        for positive in [true, false] {
            for a in 1..=bias.max_vars {
                for b in 1..=bias.max_vars {
                    if mode.has(Modifier::AntiReflexive) && a == b {
                        continue;
                    }
                    if mode.has(Modifier::Symmetric) && a > b {
                        continue;
                    }
                    out.push(Literal {
                        pred: pred.clone(),
                        positive,
                        args: [a, b],
                        symmetric: mode.has(Modifier::Symmetric),
                        domain: bias.is_domain(&mode.predicate),
                    });
                }
            }
        }
    }
    out
}

fn admissible(body: &[&Literal], bias: &LanguageBias) -> bool {
    let mut per_pred: BTreeMap<&str, u32> = BTreeMap::new();
    for l in body {
        *per_pred.entry(&l.pred).or_default() += 1;
    }
    if per_pred
        .iter()
        .any(|(p, &n)| bias.mode(p).is_some_and(|m| n > m.recall))
    {
        return false;
    }
    // p and not p on the same arguments can never fire
    let atoms: BTreeSet<(&str, [u8; 2])> = body.iter().map(|l| (&*l.pred, l.args)).collect();
    atoms.len() == body.len()
}

/// Enumerates the hypothesis space of `bias`: every safe body of at most
/// `max_body` literals over at most `max_vars` variables that respects the
/// recalls, deduplicated up to variable renaming (and argument order for
/// symmetric predicates). Bodies containing an atom with both signs are
/// left out. Rules are ordered by body length, then canonical form.
pub fn build_space(bias: &LanguageBias) -> HypothesisSpace {
    let lits = candidate_literals(bias);
    let mut found: BTreeSet<(usize, Constraint)> = BTreeSet::new();
    let n = lits.len();
    let mut consider = |body: Vec<&Literal>| {
        if !admissible(&body, bias) {
            return;
        }
        let c = Constraint::from_body(body.into_iter().cloned().collect()).expect("non-empty body");
        if c.is_safe() && c.num_vars() <= bias.max_vars && c.len() <= bias.max_body {
            found.insert((c.len(), c));
        }
    };
    for i in 0..n {
        consider(vec![&lits[i]]);
        if bias.max_body < 2 {
            continue;
        }
        for j in i + 1..n {
            consider(vec![&lits[i], &lits[j]]);
            if bias.max_body < 3 {
                continue;
            }
            for k in j + 1..n {
                consider(vec![&lits[i], &lits[j], &lits[k]]);
            }
        }
    }
    HypothesisSpace::from_rules(found.into_iter().map(|(_, c)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::bias::ModeDecl;

    fn abs(s: &str) -> Constraint {
        Constraint::parse_with(s, LanguageBias::abstract_scheme()).unwrap()
    }

    #[test]
    fn single_r_mode() {
        let bias = LanguageBias::new(vec![ModeDecl::new(1, "r")], ["r"]);
        let space = build_space(&bias);
        let rules: Vec<String> = space.iter().map(|(_, r)| r.to_string()).collect();
        assert_eq!(rules, vec![":- r(V1,V1).", ":- r(V1,V2)."]);
    }

    #[test]
    fn footnote_isomorphism() {
        let space = build_space(LanguageBias::abstract_scheme());
        assert!(space.contains(&abs(":- q(V1,V1).")));
        // the V2 variant canonicalizes onto the same member
        assert_eq!(space.id_of(&abs(":- q(V2,V2).")), space.id_of(&abs(":- q(V1,V1).")));
        let texts: Vec<String> = space.iter().map(|(_, r)| r.to_string()).collect();
        assert!(!texts.iter().any(|t| t == ":- q(V2,V2)."));
    }

    #[test]
    fn anti_reflexive_symmetric_close() {
        let space = build_space(LanguageBias::abstract_scheme());
        let close_only: Vec<String> = space
            .iter()
            .filter(|(_, r)| r.body().iter().all(|l| &*l.pred == "close"))
            .map(|(_, r)| r.to_string())
            .collect();
        // one close literal per rule (recall 1), never reflexive
        assert_eq!(close_only, vec![":- close(V1,V2)."]);
    }

    #[test]
    fn deterministic_and_duplicate_free() {
        let a = build_space(LanguageBias::abstract_scheme());
        let b = build_space(LanguageBias::abstract_scheme());
        assert_eq!(a.export(), b.export());
        let set: BTreeSet<&Constraint> = a.iter().map(|(_, r)| r).collect();
        assert_eq!(set.len(), a.len());
        for (_, r) in a.iter() {
            assert!(r.is_safe());
            assert!(r.len() <= 3 && r.num_vars() <= 3);
        }
    }
}
