use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};

use crate::atoms::{GroundAtom, Predicate};
use crate::error::{Error, Result};
use crate::instance::PupInstance;
use crate::solution::Solution;

use super::permutation::AtomPermutation;

/// Total order on atoms(Π): the `unit2zone`, `unit2sensor` and
/// `partnerunits` atoms moved by at least one generator, sorted by
/// (predicate name, first argument, second argument).
///
/// Solutions compare as bit-vectors over this order; at the first position
/// where they differ, the one containing the atom is the smaller.
#[derive(Clone, Debug)]
pub struct AtomOrder {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, usize>,
    num_units: u32,
}

/// Membership bit-vector of a solution; bit `i` is the most significant
/// unused bit of word `i / 64`, so larger words mean lex-smaller vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomBits(Vec<u64>);

impl AtomBits {
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (63 - i % 64)) != 0
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (63 - i % 64);
    }
}

impl AtomOrder {
    pub fn new(inst: &PupInstance, gens: &[AtomPermutation]) -> Self {
        let mut atoms = Vec::new();
        let moved = |a: &GroundAtom| gens.iter().any(|g| g.map_atom(a) != *a);
        for u in inst.units() {
            for v in inst.units().filter(|&v| v != u) {
                atoms.push(GroundAtom::new(Predicate::PartnerUnits, u, v));
            }
            for s in inst.sensors() {
                atoms.push(GroundAtom::new(Predicate::Unit2Sensor, u, s));
            }
            for z in inst.zones() {
                atoms.push(GroundAtom::new(Predicate::Unit2Zone, u, z));
            }
        }
        atoms.retain(moved);
        atoms.sort();
        let index = atoms.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        AtomOrder {
            atoms,
            index,
            num_units: inst.num_units(),
        }
    }

    /// The atoms in order.
    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn position(&self, atom: &GroundAtom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn bits(&self, inst: &PupInstance, sol: &Solution) -> AtomBits {
        let mut bits = AtomBits(vec![0; self.atoms.len().div_ceil(64)]);
        let mut mark = |a: GroundAtom| {
            if let Some(&i) = self.index.get(&a) {
                bits.set(i);
            }
        };
        for (i, &u) in sol.zone_units().iter().enumerate() {
            mark(GroundAtom::new(Predicate::Unit2Zone, u, i as u32 + 1));
        }
        for (i, &u) in sol.sensor_units().iter().enumerate() {
            mark(GroundAtom::new(Predicate::Unit2Sensor, u, i as u32 + 1));
        }
        debug_assert!(sol.zone_units().iter().all(|&u| u <= self.num_units));
        for (u, v) in sol.partner_pairs(inst) {
            mark(GroundAtom::new(Predicate::PartnerUnits, u, v));
            mark(GroundAtom::new(Predicate::PartnerUnits, v, u));
        }
        bits
    }

    pub fn cmp_bits(&self, a: &AtomBits, b: &AtomBits) -> Ordering {
        b.0.cmp(&a.0)
    }

    /// Lex comparison of two solutions of `inst`.
    pub fn compare(&self, inst: &PupInstance, a: &Solution, b: &Solution) -> Ordering {
        self.cmp_bits(&self.bits(inst, a), &self.bits(inst, b))
    }
}

/// True iff a single generator maps `sol` to a lex-smaller solution.
pub fn dominated(inst: &PupInstance, sol: &Solution, gens: &[AtomPermutation], ord: &AtomOrder) -> bool {
    if gens.is_empty() {
        return false;
    }
    let own = ord.bits(inst, sol);
    gens.iter().any(|g| {
        let image = g.apply(sol);
        ord.cmp_bits(&ord.bits(inst, &image), &own) == Ordering::Less
    })
}

/// Closure of a solution under the generators.
#[derive(Clone, Debug)]
pub struct Orbit {
    /// Members in BFS discovery order, starting with the seed solution.
    pub members: Vec<Solution>,
    /// Set when a cap stopped the closure early.
    pub truncated: bool,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, sol: &Solution) -> bool {
        self.members.contains(sol)
    }
}

/// BFS closure of `{sol}` under `gens`, applied in list order. With a cap,
/// stops once `cap` distinct members have been found.
pub fn orbit(sol: &Solution, gens: &[AtomPermutation], cap: Option<usize>) -> Orbit {
    let cap = cap.unwrap_or(usize::MAX).max(1);
    let mut seen: HashSet<Solution> = HashSet::from([sol.clone()]);
    let mut members = vec![sol.clone()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in gens {
            let image = g.apply(&members[i]);
            if seen.contains(&image) {
                continue;
            }
            if members.len() >= cap {
                return Orbit {
                    members,
                    truncated: true,
                };
            }
            seen.insert(image.clone());
            members.push(image);
            queue.push_back(members.len() - 1);
        }
    }
    Orbit {
        members,
        truncated: false,
    }
}

/// Orbit statistics of a complete solution set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct OrbitPartition {
    pub solutions: usize,
    pub orbits: usize,
    /// Solutions some generator maps to a lex-smaller one.
    pub single_generator_dominated: usize,
}

impl OrbitPartition {
    /// Share of solutions that are not their orbit's representative.
    pub fn dominated_fraction(&self) -> f64 {
        if self.solutions == 0 {
            0.0
        } else {
            1.0 - self.orbits as f64 / self.solutions as f64
        }
    }
}

/// Splits `solutions` (all solutions of `inst`) into orbits under `gens`.
/// An orbit leaving the set means it was not closed under the group, which
/// is reported as an invariant violation.
pub fn partition_orbits(
    inst: &PupInstance,
    solutions: &[Solution],
    gens: &[AtomPermutation],
    ord: &AtomOrder,
) -> Result<OrbitPartition> {
    let all: HashSet<&Solution> = solutions.iter().collect();
    let mut explored: HashSet<Solution> = HashSet::new();
    let mut orbits = 0;
    for s in solutions {
        if explored.contains(s) {
            continue;
        }
        orbits += 1;
        for m in orbit(s, gens, None).members {
            if !all.contains(&m) {
                return Err(Error::Invariant(format!(
                    "the orbit of a solution leaves the solution set:\n{}",
                    m.to_facts()
                )));
            }
            explored.insert(m);
        }
    }
    let single_generator_dominated = solutions.iter().filter(|s| dominated(inst, s, gens, ord)).count();
    Ok(OrbitPartition {
        solutions: solutions.len(),
        orbits,
        single_generator_dominated,
    })
}

/// The lex-smallest member of a set of solutions.
pub fn lex_smallest<'a>(
    inst: &PupInstance,
    solutions: impl IntoIterator<Item = &'a Solution>,
    ord: &AtomOrder,
) -> Result<Solution> {
    let mut best: Option<(AtomBits, &Solution)> = None;
    for s in solutions {
        let bits = ord.bits(inst, s);
        let better = match &best {
            None => true,
            Some((b, bs)) => match ord.cmp_bits(&bits, b) {
                Ordering::Less => true,
                // equal bit-vectors: fall back to the assignment itself
                Ordering::Equal => s < *bs,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((bits, s));
        }
    }
    best.map(|(_, s)| s.clone())
        .ok_or_else(|| Error::Precondition("lex_smallest of an empty set".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::solution_atoms;
    use crate::instance::make_fig1_instance;
    use crate::solution::tests::fig1b;

    fn transpositions(inst: &PupInstance) -> Vec<AtomPermutation> {
        (1..inst.num_units())
            .map(|u| AtomPermutation::unit_transposition(inst, u, u + 1))
            .collect()
    }

    /// Independent comparison on explicit atom sets.
    fn lex_less_oracle(ord: &AtomOrder, a: &[GroundAtom], b: &[GroundAtom]) -> bool {
        for atom in ord.atoms() {
            let (x, y) = (a.contains(atom), b.contains(atom));
            if x != y {
                return x;
            }
        }
        false
    }

    #[test]
    fn order_is_sorted_and_restricted() {
        let inst = make_fig1_instance();
        let ord = AtomOrder::new(&inst, &transpositions(&inst));
        // 12 partner atoms + 4*7 sensor atoms + 4*6 zone atoms
        assert_eq!(ord.len(), 12 + 28 + 24);
        assert!(ord.atoms().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ord.atoms()[0].to_string(), "partnerunits(1,2)");
        assert!(AtomOrder::new(&inst, &[]).is_empty());
    }

    #[test]
    fn fig1b_dominance_matches_oracle() {
        let inst = make_fig1_instance();
        let gens = transpositions(&inst);
        let ord = AtomOrder::new(&inst, &gens);
        let sol = fig1b();
        let own: Vec<GroundAtom> = solution_atoms(&inst, &sol).into_iter().collect();
        let expected = gens.iter().any(|g| {
            let img: Vec<GroundAtom> = solution_atoms(&inst, &g.apply(&sol)).into_iter().collect();
            lex_less_oracle(&ord, &img, &own)
        });
        assert_eq!(dominated(&inst, &sol, &gens, &ord), expected);
        assert!(!dominated(&inst, &sol, &[], &ord));
    }

    #[test]
    fn fixed_point_not_dominated() {
        let inst = make_fig1_instance();
        let id = AtomPermutation::identity(&inst);
        let ord = AtomOrder::new(&inst, &transpositions(&inst));
        assert!(!dominated(&inst, &fig1b(), &[id], &ord));
    }

    #[test]
    fn orbit_of_fig1b_under_units() {
        let inst = make_fig1_instance();
        let gens = transpositions(&inst);
        let o = orbit(&fig1b(), &gens, None);
        // four distinct units used: all 24 relabelings are distinct
        assert_eq!(o.len(), 24);
        assert!(!o.truncated);
        assert!(o.members.iter().all(|s| s.is_valid(&inst)));
        let capped = orbit(&fig1b(), &gens, Some(5));
        assert_eq!(capped.len(), 5);
        assert!(capped.truncated);
        assert_eq!(orbit(&fig1b(), &[], None).members, vec![fig1b()]);
    }

    #[test]
    fn lex_smallest_is_undominated() {
        let inst = make_fig1_instance();
        let gens = transpositions(&inst);
        let ord = AtomOrder::new(&inst, &gens);
        let o = orbit(&fig1b(), &gens, None);
        let min = lex_smallest(&inst, &o.members, &ord).unwrap();
        assert!(!dominated(&inst, &min, &gens, &ord));
        let again = lex_smallest(&inst, &orbit(&min, &gens, None).members, &ord).unwrap();
        assert_eq!(min, again);
        assert!(lex_smallest(&inst, &[], &ord).is_err());
        assert_eq!(lex_smallest(&inst, [&fig1b()], &ord).unwrap(), fig1b());
    }
}
