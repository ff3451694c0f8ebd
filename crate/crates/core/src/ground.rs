//! Ground constraints and the instantiation of first-order constraints.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atoms::{ArgKind, GroundAtom, Predicate, SolutionModel};
use crate::error::{Error, Result};
use crate::hypothesis::Constraint;
use crate::instance::PupInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundLiteral {
    pub positive: bool,
    pub atom: GroundAtom,
}

impl GroundLiteral {
    pub fn pos(atom: GroundAtom) -> Self {
        GroundLiteral {
            positive: true,
            atom,
        }
    }

    pub fn neg(atom: GroundAtom) -> Self {
        GroundLiteral {
            positive: false,
            atom,
        }
    }
}

/// A headless ground rule: violated by an interpretation that makes every
/// literal true.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundConstraint {
    literals: Vec<GroundLiteral>,
}

impl GroundConstraint {
    pub fn new(literals: impl IntoIterator<Item = GroundLiteral>) -> Result<Self> {
        let set: BTreeSet<GroundLiteral> = literals.into_iter().collect();
        if set.is_empty() {
            return Err(Error::Invariant("ground constraint without literals".into()));
        }
        let atoms: BTreeSet<GroundAtom> = set.iter().map(|l| l.atom).collect();
        if atoms.len() != set.len() {
            return Err(Error::Invariant(
                "ground constraint uses an atom with both signs".into(),
            ));
        }
        Ok(GroundConstraint {
            literals: set.into_iter().collect(),
        })
    }

    pub fn literals(&self) -> &[GroundLiteral] {
        &self.literals
    }

    pub fn violated_by(&self, model: &SolutionModel<'_>) -> bool {
        self.literals
            .iter()
            .all(|l| model.holds(&l.atom) == l.positive)
    }
}

impl fmt::Display for GroundConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(":- ")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if !l.positive {
                f.write_str("not ")?;
            }
            write!(f, "{}", l.atom)?;
        }
        f.write_str(".")
    }
}

fn kind_max(inst: &PupInstance, kind: ArgKind) -> u32 {
    match kind {
        ArgKind::Unit => inst.num_units(),
        ArgKind::Zone => inst.num_zones(),
        ArgKind::Sensor => inst.num_sensors(),
    }
}

fn domain_fact(inst: &PupInstance, atom: &GroundAtom) -> Option<bool> {
    let (a, b) = atom.args;
    match atom.pred {
        Predicate::Zone2Sensor => Some(inst.has_edge(a, b)),
        Predicate::CloseSensors => Some(inst.close_sensors(a, b)),
        Predicate::CloseZones => Some(inst.close_zones(a, b)),
        _ => None,
    }
}

/// All ground instances of `c` over `inst`.
///
/// A variable ranges over the intersection of the domains its argument
/// positions imply (ids are `1..=n`, so that is `1..=min n`). Instances
/// that can never fire because a domain literal has the wrong truth value,
/// or that contain an atom with both signs, are dropped.
pub fn ground_constraint(c: &Constraint, inst: &PupInstance) -> Result<Vec<GroundConstraint>> {
    let body: Vec<(bool, Predicate, [u8; 2])> = c
        .body()
        .iter()
        .map(|l| Ok((l.positive, l.pred.parse::<Predicate>()?, l.args)))
        .collect::<Result<_>>()?;

    let num_vars = c.num_vars() as usize;
    let mut max = vec![u32::MAX; num_vars];
    for &(_, p, args) in &body {
        for (pos, kind) in p.arg_kinds().into_iter().enumerate() {
            let v = args[pos] as usize - 1;
            max[v] = max[v].min(kind_max(inst, kind));
        }
    }

    let mut out = BTreeSet::new();
    let mut subst = vec![1u32; num_vars];
    if max.iter().any(|&m| m == 0) {
        return Ok(Vec::new());
    }
    'outer: loop {
        let mut lits = Vec::with_capacity(body.len());
        let mut keep = true;
        for &(positive, p, args) in &body {
            let atom = GroundAtom::new(p, subst[args[0] as usize - 1], subst[args[1] as usize - 1]);
            if domain_fact(inst, &atom).is_some_and(|holds| holds != positive) {
                keep = false;
                break;
            }
            lits.push(GroundLiteral { positive, atom });
        }
        if keep {
            if let Ok(g) = GroundConstraint::new(lits) {
                out.insert(g);
            }
        }
        // odometer over the substitution
        for i in (0..num_vars).rev() {
            if subst[i] < max[i] {
                subst[i] += 1;
                continue 'outer;
            }
            subst[i] = 1;
        }
        break;
    }
    Ok(out.into_iter().collect())
}

/// Grounds every constraint of a hypothesis.
pub fn ground_all(hypothesis: &[Constraint], inst: &PupInstance) -> Result<Vec<GroundConstraint>> {
    let mut out = Vec::new();
    for c in hypothesis {
        out.extend(ground_constraint(c, inst)?);
    }
    Ok(out)
}

/// A first-order constraint prepared for direct evaluation against total
/// solutions, without materializing its ground instances.
#[derive(Clone, Debug)]
pub struct CompiledConstraint {
    body: Vec<(bool, Predicate, [usize; 2])>,
    kinds: Vec<Vec<ArgKind>>,
    /// literals whose variables are all bound once variable `i` is
    checks: Vec<Vec<usize>>,
}

impl CompiledConstraint {
    pub fn new(c: &Constraint) -> Result<Self> {
        let body: Vec<(bool, Predicate, [usize; 2])> = c
            .body()
            .iter()
            .map(|l| {
                let p = l.pred.parse::<Predicate>()?;
                Ok((l.positive, p, [l.args[0] as usize - 1, l.args[1] as usize - 1]))
            })
            .collect::<Result<_>>()?;
        let k = c.num_vars() as usize;
        let mut kinds = vec![Vec::new(); k];
        let mut checks = vec![Vec::new(); k];
        for (i, &(_, p, args)) in body.iter().enumerate() {
            for (pos, kind) in p.arg_kinds().into_iter().enumerate() {
                kinds[args[pos]].push(kind);
            }
            checks[args[0].max(args[1])].push(i);
        }
        Ok(CompiledConstraint { body, kinds, checks })
    }

    /// True iff some ground instance is violated by the model, i.e. some
    /// substitution makes every body literal true.
    pub fn violated_by(&self, model: &SolutionModel<'_>) -> bool {
        let inst = model.instance();
        let max: Vec<u32> = self
            .kinds
            .iter()
            .map(|ks| ks.iter().map(|&k| kind_max(inst, k)).min().unwrap_or(0))
            .collect();
        let mut subst = vec![0u32; max.len()];
        self.search(model, &max, &mut subst, 0)
    }

    fn search(&self, model: &SolutionModel<'_>, max: &[u32], subst: &mut [u32], var: usize) -> bool {
        if var == max.len() {
            return true;
        }
        for v in 1..=max[var] {
            subst[var] = v;
            let ok = self.checks[var].iter().all(|&i| {
                let (positive, p, args) = self.body[i];
                model.holds(&GroundAtom::new(p, subst[args[0]], subst[args[1]])) == positive
            });
            if ok && self.search(model, max, subst, var + 1) {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::Constraint;
    use crate::instance::make_fig1_instance;

    #[test]
    fn zone2sensor_pairs_are_filtered_by_edges() {
        let inst = make_fig1_instance();
        let c: Constraint = ":- zone2sensor(V1,V2), zone2sensor(V1,V3).".parse().unwrap();
        let ground = ground_constraint(&c, &inst).unwrap();
        // per zone: V2 = V3 collapses to one literal, and (s, s') and (s', s)
        // give the same literal set
        let expect: usize = inst
            .zones()
            .map(|z| inst.sensors_of(z).len())
            .map(|d| d + d * (d - 1) / 2)
            .sum();
        assert_eq!(ground.len(), expect);
        for g in &ground {
            for l in g.literals() {
                assert!(inst.has_edge(l.atom.args.0, l.atom.args.1));
            }
        }
    }

    #[test]
    fn reflexive_geq_over_unit_zone_intersection() {
        let inst = make_fig1_instance();
        let c: Constraint = ":- unit2zoneGEQ(V1,V1).".parse().unwrap();
        let ground = ground_constraint(&c, &inst).unwrap();
        let args: Vec<_> = ground.iter().map(|g| g.literals()[0].atom.args).collect();
        assert_eq!(args, vec![(1, 1), (2, 2), (3, 3), (4, 4)]);
    }

    #[test]
    fn unknown_predicate_is_domain_error() {
        let c: Constraint = ":- q(V1,V1).".parse().unwrap();
        assert!(matches!(
            ground_constraint(&c, &make_fig1_instance()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn compiled_agrees_with_grounding() {
        use crate::hypothesis::{build_space, LanguageBias};
        use crate::solver::{enumerate, SearchConfig};
        let inst = make_fig1_instance();
        let sols = enumerate(&inst, &[], &SearchConfig::default().randomized(5).with_limit(6)).solutions;
        let space = build_space(LanguageBias::pup());
        for (_, r) in space.iter().step_by(7) {
            let compiled = CompiledConstraint::new(r).unwrap();
            let ground = ground_constraint(r, &inst).unwrap();
            for s in &sols {
                let model = SolutionModel::new(&inst, s);
                let expected = ground.iter().any(|g| g.violated_by(&model));
                assert_eq!(compiled.violated_by(&model), expected, "{r}");
            }
        }
    }

    #[test]
    fn both_signs_rejected() {
        let a = GroundAtom::new(Predicate::Unit2Zone, 1, 1);
        assert!(GroundConstraint::new([GroundLiteral::pos(a), GroundLiteral::neg(a)]).is_err());
        assert!(GroundConstraint::new([]).is_err());
    }

    #[test]
    fn contradictory_substitutions_dropped() {
        let c: Constraint = ":- unit2zone(V1,V2), not unit2zone(V1,V3).".parse().unwrap();
        let ground = ground_constraint(&c, &make_fig1_instance()).unwrap();
        // V2 == V3 yields p and not p; those are dropped
        assert_eq!(ground.len(), 4 * 6 * 5);
    }
}
