//! Complete backtracking search for PUP solutions.
//!
//! Zones are assigned in ascending id order, each followed by its not yet
//! assigned sensors. Per-unit zone and sensor counts and the partner-unit
//! adjacency are maintained incrementally and a branch fails as soon as
//! UCAP or IUCAP is exceeded, or an open sensor next to an assigned zone has
//! no unit left. Extra ground
//! constraints are checked with three-valued evaluation whenever an item
//! they mention is assigned or a partner pair they mention appears;
//! constraints with a negative `partnerunits` literal are re-checked at the
//! leaves, where every partner atom is decided.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{GroundAtom, Predicate};
use crate::error::{Error, Result};
use crate::ground::{ground_all, GroundConstraint, GroundLiteral};
use crate::hypothesis::Constraint;
use crate::instance::PupInstance;
use crate::solution::Solution;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub limit: Option<u64>,
    pub timeout_ms: Option<u64>,
    pub randomize_values: bool,
}

impl SearchConfig {
    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn with_timeout_ms(mut self, ms: u64) -> Self {
        self.timeout_ms = Some(ms);
        self
    }

    pub fn randomized(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.randomize_values = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.limit == Some(0) {
            return Err(Error::Config("solution limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// How a search run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// The whole search space was explored.
    Complete,
    /// Stopped by the solution limit or the caller.
    Stopped,
    TimedOut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub status: SearchStatus,
    pub nodes: u64,
    pub solutions: u64,
    pub elapsed_ms: u64,
}

impl SearchStats {
    /// True when the search stopped before exhausting the space, so the
    /// solution count is only a lower bound.
    pub fn truncated(&self) -> bool {
        self.status != SearchStatus::Complete
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Truth {
    True,
    False,
    Unknown,
}

struct Search<'a> {
    inst: &'a PupInstance,
    constraints: &'a [GroundConstraint],
    nz: usize,
    nu: usize,
    domains: Vec<Vec<u32>>,
    /// variables in branching order
    order: Vec<usize>,
    /// per variable: indices of the other side's variables it shares an edge with
    neighbours: Vec<Vec<usize>>,
    by_var: Vec<Vec<usize>>,
    by_pair: HashMap<(u32, u32), Vec<usize>>,
    at_leaf: Vec<usize>,
    assign: Vec<u32>,
    zone_load: Vec<u32>,
    sensor_load: Vec<u32>,
    pair_edges: Vec<u32>,
    degree: Vec<u32>,
    rng: Option<ChaCha8Rng>,
    deadline: Option<Instant>,
    limit: Option<u64>,
    nodes: u64,
    solutions: u64,
    status: SearchStatus,
}

impl<'a> Search<'a> {
    fn new(
        inst: &'a PupInstance,
        constraints: &'a [GroundConstraint],
        domains: Vec<Vec<u32>>,
        cfg: &SearchConfig,
    ) -> Self {
        let nz = inst.num_zones() as usize;
        let ns = inst.num_sensors() as usize;
        let nu = inst.num_units() as usize;
        let mut neighbours = vec![Vec::new(); nz + ns];
        for &(z, s) in inst.edges() {
            let (zi, si) = (z as usize - 1, nz + s as usize - 1);
            neighbours[zi].push(si);
            neighbours[si].push(zi);
        }

        let mut by_var = vec![Vec::new(); nz + ns];
        let mut by_pair: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
        let mut at_leaf = Vec::new();
        for (ci, c) in constraints.iter().enumerate() {
            let mut vars = BTreeSet::new();
            let mut pairs = BTreeSet::new();
            let mut leaf = false;
            for l in c.literals() {
                let (a, b) = l.atom.args;
                match l.atom.pred {
                    Predicate::Unit2Zone | Predicate::Unit2ZoneGeq if (b as usize) <= nz && b > 0 => {
                        vars.insert(b as usize - 1);
                    }
                    Predicate::Unit2Sensor | Predicate::Unit2SensorGeq if (b as usize) <= ns && b > 0 => {
                        vars.insert(nz + b as usize - 1);
                    }
                    Predicate::PartnerUnits if l.positive => {
                        pairs.insert((a.min(b), a.max(b)));
                    }
                    Predicate::PartnerUnits => leaf = true,
                    _ => {}
                }
            }
            for v in vars {
                by_var[v].push(ci);
            }
            for p in pairs {
                by_pair.entry(p).or_default().push(ci);
            }
            if leaf {
                at_leaf.push(ci);
            }
        }

        // each zone is followed by its not yet ordered sensors, so sensor
        // capacity and partner links are checked close to the zones causing them
        let mut order = Vec::with_capacity(nz + ns);
        let mut placed = vec![false; nz + ns];
        for z in zone_order(&neighbours, nz) {
            order.push(z);
            let mut sensors: Vec<usize> = neighbours[z].iter().copied().filter(|&s| !placed[s]).collect();
            sensors.sort_unstable();
            for s in sensors {
                placed[s] = true;
                order.push(s);
            }
        }
        order.extend((nz..nz + ns).filter(|&s| !placed[s]));

        Search {
            inst,
            constraints,
            nz,
            nu,
            domains,
            order,
            neighbours,
            by_var,
            by_pair,
            at_leaf,
            assign: vec![0; nz + ns],
            zone_load: vec![0; nu + 1],
            sensor_load: vec![0; nu + 1],
            pair_edges: vec![0; (nu + 1) * (nu + 1)],
            degree: vec![0; nu + 1],
            rng: cfg
                .randomize_values
                .then(|| ChaCha8Rng::seed_from_u64(cfg.seed)),
            deadline: cfg
                .timeout_ms
                .map(|ms| Instant::now() + Duration::from_millis(ms)),
            limit: cfg.limit,
            nodes: 0,
            solutions: 0,
            status: SearchStatus::Complete,
        }
    }

    fn var_of_atom(&self, atom: &GroundAtom) -> Option<usize> {
        let b = atom.args.1 as usize;
        match atom.pred {
            Predicate::Unit2Zone | Predicate::Unit2ZoneGeq => Some(b - 1),
            Predicate::Unit2Sensor | Predicate::Unit2SensorGeq => Some(self.nz + b - 1),
            _ => None,
        }
    }

    fn atom_truth(&self, atom: &GroundAtom, complete: bool) -> Truth {
        if !atom.in_domain(self.inst) {
            return Truth::False;
        }
        let from = |b: bool| if b { Truth::True } else { Truth::False };
        let (a, b) = atom.args;
        match atom.pred {
            Predicate::Unit2Zone
            | Predicate::Unit2ZoneGeq
            | Predicate::Unit2Sensor
            | Predicate::Unit2SensorGeq => {
                let unit = self.assign[self.var_of_atom(atom).expect("item atom")];
                if unit == 0 {
                    Truth::Unknown
                } else if matches!(atom.pred, Predicate::Unit2Zone | Predicate::Unit2Sensor) {
                    from(unit == a)
                } else {
                    from(unit >= a)
                }
            }
            Predicate::PartnerUnits => {
                if a == b {
                    Truth::False
                } else if self.pair_edges[a as usize * (self.nu + 1) + b as usize] > 0 {
                    Truth::True
                } else if complete {
                    Truth::False
                } else {
                    Truth::Unknown
                }
            }
            Predicate::Zone2Sensor => from(self.inst.has_edge(a, b)),
            Predicate::CloseSensors => from(self.inst.close_sensors(a, b)),
            Predicate::CloseZones => from(self.inst.close_zones(a, b)),
        }
    }

    fn violated(&self, ci: usize, complete: bool) -> bool {
        self.constraints[ci].literals().iter().all(|l: &GroundLiteral| {
            let t = self.atom_truth(&l.atom, complete);
            if l.positive {
                t == Truth::True
            } else {
                t == Truth::False
            }
        })
    }

    fn pair_index(&self, u: u32, v: u32) -> usize {
        u as usize * (self.nu + 1) + v as usize
    }

    /// Assigns `var := unit`; on failure everything is rolled back and
    /// `false` returned.
    fn assign(&mut self, var: usize, unit: u32) -> bool {
        let is_zone = var < self.nz;
        let load = if is_zone {
            &mut self.zone_load
        } else {
            &mut self.sensor_load
        };
        if load[unit as usize] >= self.inst.ucap() {
            return false;
        }
        load[unit as usize] += 1;
        self.assign[var] = unit;

        let mut new_pairs = Vec::new();
        let mut ok = true;
        for i in 0..self.neighbours[var].len() {
            let w = self.assign[self.neighbours[var][i]];
            if w == 0 || w == unit {
                continue;
            }
            let (i1, i2) = (self.pair_index(unit, w), self.pair_index(w, unit));
            self.pair_edges[i1] += 1;
            self.pair_edges[i2] += 1;
            if self.pair_edges[i1] == 1 {
                self.degree[unit as usize] += 1;
                self.degree[w as usize] += 1;
                new_pairs.push((unit.min(w), unit.max(w)));
                if self.degree[unit as usize] > self.inst.iucap()
                    || self.degree[w as usize] > self.inst.iucap()
                {
                    ok = false;
                }
            }
        }

        if ok {
            ok = self.neighbours_feasible(var);
        }
        if ok {
            ok = !self.by_var[var].iter().any(|&ci| self.violated(ci, false));
        }
        if ok {
            ok = !new_pairs.iter().any(|p| {
                self.by_pair
                    .get(p)
                    .is_some_and(|cs| cs.iter().any(|&ci| self.violated(ci, false)))
            });
        }
        if !ok {
            self.unassign(var);
        }
        ok
    }

    /// Forward check: every unassigned sensor next to a zone touched by
    /// `var` still has a unit with free capacity whose new partner links fit
    /// within IUCAP.
    fn neighbours_feasible(&self, var: usize) -> bool {
        let zones: &[usize] = if var < self.nz {
            std::slice::from_ref(&var)
        } else {
            &self.neighbours[var]
        };
        zones.iter().all(|&z| {
            self.neighbours[z]
                .iter()
                .all(|&s| self.assign[s] != 0 || self.sensor_feasible(s))
        })
    }

    fn sensor_feasible(&self, s: usize) -> bool {
        let iucap = self.inst.iucap();
        let mut adjacent: Vec<u32> = self.neighbours[s]
            .iter()
            .map(|&z| self.assign[z])
            .filter(|&u| u != 0)
            .collect();
        adjacent.sort_unstable();
        adjacent.dedup();
        self.domains[s].iter().any(|&v| {
            if self.sensor_load[v as usize] >= self.inst.ucap() {
                return false;
            }
            let mut added = 0;
            for &u in &adjacent {
                if u != v && self.pair_edges[self.pair_index(u, v)] == 0 {
                    if self.degree[u as usize] >= iucap {
                        return false;
                    }
                    added += 1;
                }
            }
            self.degree[v as usize] + added <= iucap
        })
    }

    /// Preference for `var := unit`, lower first: a unit already serving a
    /// neighbour adds no partner link, a partner of one adds no new link
    /// either, a unit in use keeps the rest free. Ties keep their order.
    fn value_rank(&self, var: usize, unit: u32) -> u8 {
        let mut rank = 3;
        for &w in &self.neighbours[var] {
            let other = self.assign[w];
            if other == unit {
                return 0;
            }
            if other != 0 && self.pair_edges[self.pair_index(unit, other)] > 0 {
                rank = 1;
            }
        }
        if rank == 3 && self.zone_load[unit as usize] + self.sensor_load[unit as usize] > 0 {
            rank = 2;
        }
        rank
    }

    fn unassign(&mut self, var: usize) {
        let unit = self.assign[var];
        for i in 0..self.neighbours[var].len() {
            let w = self.assign[self.neighbours[var][i]];
            if w == 0 || w == unit {
                continue;
            }
            let (i1, i2) = (self.pair_index(unit, w), self.pair_index(w, unit));
            self.pair_edges[i1] -= 1;
            self.pair_edges[i2] -= 1;
            if self.pair_edges[i1] == 0 {
                self.degree[unit as usize] -= 1;
                self.degree[w as usize] -= 1;
            }
        }
        if var < self.nz {
            self.zone_load[unit as usize] -= 1;
        } else {
            self.sensor_load[unit as usize] -= 1;
        }
        self.assign[var] = 0;
    }

    fn solution(&self) -> Solution {
        Solution::new(
            self.assign[..self.nz].to_vec(),
            self.assign[self.nz..].to_vec(),
        )
    }

    fn run<F>(&mut self, visit: &mut F)
    where
        F: FnMut(&Solution) -> ControlFlow<()>,
    {
        // constraints that mention no item and no positive partner pair are
        // decided before search starts
        let triggered: BTreeSet<usize> = self
            .by_var
            .iter()
            .flatten()
            .chain(self.by_pair.values().flatten())
            .chain(&self.at_leaf)
            .copied()
            .collect();
        let fixed_violation =
            (0..self.constraints.len()).any(|ci| !triggered.contains(&ci) && self.violated(ci, false));
        if fixed_violation {
            self.nodes = 1;
            return;
        }
        let _ = self.search(0, visit);
    }

    fn search<F>(&mut self, depth: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Solution) -> ControlFlow<()>,
    {
        self.nodes += 1;
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.status = SearchStatus::TimedOut;
                return ControlFlow::Break(());
            }
        }
        if depth == self.assign.len() {
            if self.at_leaf.iter().any(|&ci| self.violated(ci, true)) {
                return ControlFlow::Continue(());
            }
            self.solutions += 1;
            let sol = self.solution();
            if visit(&sol).is_break() || self.limit.is_some_and(|l| self.solutions >= l) {
                self.status = SearchStatus::Stopped;
                return ControlFlow::Break(());
            }
            return ControlFlow::Continue(());
        }

        let var = self.order[depth];
        let mut values = self.domains[var].clone();
        if let Some(rng) = self.rng.as_mut() {
            values.shuffle(rng);
        }
        values.sort_by_cached_key(|&u| self.value_rank(var, u));
        for unit in values {
            if self.assign(var, unit) {
                let flow = self.search(depth + 1, visit);
                self.unassign(var);
                flow?;
            }
        }
        ControlFlow::Continue(())
    }
}

/// Zones breadth-first over shared sensors, lowest id first at each step
/// and for each new component, so zones that must cooperate are assigned
/// close together.
fn zone_order(neighbours: &[Vec<usize>], nz: usize) -> Vec<usize> {
    let mut seen = vec![false; nz];
    let mut order = Vec::with_capacity(nz);
    for root in 0..nz {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(z) = queue.pop_front() {
            order.push(z);
            let mut next: Vec<usize> = neighbours[z]
                .iter()
                .flat_map(|&s| neighbours[s].iter().copied())
                .filter(|&y| !seen[y])
                .collect();
            next.sort_unstable();
            next.dedup();
            for y in next {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    order
}

fn full_domains(inst: &PupInstance) -> Vec<Vec<u32>> {
    let n = (inst.num_zones() + inst.num_sensors()) as usize;
    vec![inst.units().collect(); n]
}

fn search_with<F>(
    inst: &PupInstance,
    extra: &[GroundConstraint],
    domains: Vec<Vec<u32>>,
    cfg: &SearchConfig,
    mut visit: F,
) -> SearchStats
where
    F: FnMut(&Solution) -> ControlFlow<()>,
{
    let start = Instant::now();
    let mut search = Search::new(inst, extra, domains, cfg);
    search.run(&mut visit);
    SearchStats {
        status: search.status,
        nodes: search.nodes,
        solutions: search.solutions,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// Streams the valid solutions of `inst` that violate no constraint in
/// `extra` to `visit`, which may stop the search early.
pub fn for_each_solution<F>(
    inst: &PupInstance,
    extra: &[GroundConstraint],
    cfg: &SearchConfig,
    visit: F,
) -> SearchStats
where
    F: FnMut(&Solution) -> ControlFlow<()>,
{
    search_with(inst, extra, full_domains(inst), cfg, visit)
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub solutions: Vec<Solution>,
    pub stats: SearchStats,
}

impl Enumeration {
    pub fn truncated(&self) -> bool {
        self.stats.truncated()
    }
}

pub fn enumerate(inst: &PupInstance, extra: &[GroundConstraint], cfg: &SearchConfig) -> Enumeration {
    let mut solutions = Vec::new();
    let stats = for_each_solution(inst, extra, cfg, |s| {
        solutions.push(s.clone());
        ControlFlow::Continue(())
    });
    Enumeration { solutions, stats }
}

/// Number of solutions; `stats.truncated()` tells whether the count is a
/// lower bound cut short by the limit or the timeout.
pub fn count(inst: &PupInstance, extra: &[GroundConstraint], cfg: &SearchConfig) -> SearchStats {
    for_each_solution(inst, extra, cfg, |_| ControlFlow::Continue(()))
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub solution: Option<Solution>,
    pub stats: SearchStats,
}

impl SolveResult {
    /// `Some(true)` satisfiable, `Some(false)` proved unsatisfiable, `None`
    /// when the timeout struck first.
    pub fn verdict(&self) -> Option<bool> {
        match (&self.solution, self.stats.status) {
            (Some(_), _) => Some(true),
            (None, SearchStatus::TimedOut) => None,
            (None, _) => Some(false),
        }
    }
}

/// First solution, if any.
pub fn solve(inst: &PupInstance, extra: &[GroundConstraint], cfg: &SearchConfig) -> SolveResult {
    let mut found = None;
    let stats = for_each_solution(inst, extra, cfg, |s| {
        found = Some(s.clone());
        ControlFlow::Break(())
    });
    SolveResult {
        solution: found,
        stats,
    }
}

/// Outcome of an accepting-answer-set query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Acceptance {
    Accepting(Solution),
    NoneExists,
    /// The search timed out before deciding.
    Indeterminate,
}

impl Acceptance {
    pub fn exists(&self) -> Option<bool> {
        match self {
            Acceptance::Accepting(_) => Some(true),
            Acceptance::NoneExists => Some(false),
            Acceptance::Indeterminate => None,
        }
    }
}

/// Searches for a solution of `inst` whose atoms include `inclusions`, avoid
/// `exclusions`, and that violates no ground instance of `hypothesis`.
///
/// Assignment atoms in the partial interpretation restrict variable domains
/// directly; every other atom becomes a one-literal ground constraint.
pub fn accepting_answer_set_exists(
    inst: &PupInstance,
    inclusions: &BTreeSet<GroundAtom>,
    exclusions: &BTreeSet<GroundAtom>,
    hypothesis: &[Constraint],
    cfg: &SearchConfig,
) -> Result<Acceptance> {
    let ground = ground_all(hypothesis, inst)?;
    accepting_with_ground(inst, inclusions, exclusions, &ground, cfg)
}

/// [`accepting_answer_set_exists`] with an already grounded hypothesis.
pub fn accepting_with_ground(
    inst: &PupInstance,
    inclusions: &BTreeSet<GroundAtom>,
    exclusions: &BTreeSet<GroundAtom>,
    ground: &[GroundConstraint],
    cfg: &SearchConfig,
) -> Result<Acceptance> {
    let mut found = None;
    let stats = for_each_accepting(inst, inclusions, exclusions, ground, cfg, |s| {
        found = Some(s.clone());
        ControlFlow::Break(())
    })?;
    Ok(match (found, stats.status) {
        (Some(s), _) => Acceptance::Accepting(s),
        (None, SearchStatus::TimedOut) => Acceptance::Indeterminate,
        (None, _) => Acceptance::NoneExists,
    })
}

/// Streams every solution extending the partial interpretation
/// `(inclusions, exclusions)` that violates no constraint in `ground`.
pub fn for_each_accepting<F>(
    inst: &PupInstance,
    inclusions: &BTreeSet<GroundAtom>,
    exclusions: &BTreeSet<GroundAtom>,
    ground: &[GroundConstraint],
    cfg: &SearchConfig,
    visit: F,
) -> Result<SearchStats>
where
    F: FnMut(&Solution) -> ControlFlow<()>,
{
    if let Some(a) = inclusions.intersection(exclusions).next() {
        return Err(Error::Precondition(format!(
            "atom {a} is both included and excluded"
        )));
    }
    let nz = inst.num_zones() as usize;
    let mut domains = full_domains(inst);
    let mut extra: Vec<GroundConstraint> = ground.to_vec();
    let item_var = |a: &GroundAtom| -> Option<usize> {
        if !a.in_domain(inst) {
            return None;
        }
        match a.pred {
            Predicate::Unit2Zone => Some(a.args.1 as usize - 1),
            Predicate::Unit2Sensor => Some(nz + a.args.1 as usize - 1),
            _ => None,
        }
    };
    for a in inclusions {
        match item_var(a) {
            Some(v) => domains[v].retain(|&u| u == a.args.0),
            None => extra.push(GroundConstraint::new([GroundLiteral::neg(*a)])?),
        }
    }
    for a in exclusions {
        match item_var(a) {
            Some(v) => domains[v].retain(|&u| u != a.args.0),
            None => extra.push(GroundConstraint::new([GroundLiteral::pos(*a)])?),
        }
    }
    Ok(search_with(inst, &extra, domains, cfg, visit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::solution_atoms;
    use crate::instance::make_fig1_instance;
    use crate::solution::tests::fig1b;

    fn atom(p: Predicate, a: u32, b: u32) -> GroundAtom {
        GroundAtom::new(p, a, b)
    }

    #[test]
    fn forbidding_z1_on_u1_prunes() {
        let inst = make_fig1_instance();
        let c = GroundConstraint::new([GroundLiteral::pos(atom(Predicate::Unit2Zone, 1, 1))]).unwrap();
        let all = enumerate(&inst, &[c], &SearchConfig::default());
        assert!(all.solutions.len() < 145_368);
        assert!(!all.solutions.is_empty());
        assert!(all.solutions.iter().all(|s| s.zone_unit(1) != 1));
    }

    #[test]
    fn instance_fact_constraint_kills_everything() {
        let inst = make_fig1_instance();
        let c = GroundConstraint::new([GroundLiteral::pos(atom(Predicate::Zone2Sensor, 1, 1))]).unwrap();
        assert_eq!(count(&inst, &[c], &SearchConfig::default()).solutions, 0);
    }

    #[test]
    fn three_units_are_not_enough() {
        let inst = make_fig1_instance().with_units(3, "un-double-6");
        let stats = count(&inst, &[], &SearchConfig::default());
        assert_eq!(stats.solutions, 0);
        assert_eq!(stats.status, SearchStatus::Complete);
    }

    #[test]
    fn limit_and_determinism() {
        let inst = make_fig1_instance();
        let cfg = SearchConfig::default().randomized(42).with_limit(25);
        let a = enumerate(&inst, &[], &cfg);
        let b = enumerate(&inst, &[], &cfg);
        assert_eq!(a.solutions.len(), 25);
        assert_eq!(a.solutions, b.solutions);
        assert_eq!(a.stats.status, SearchStatus::Stopped);
        let c = enumerate(&inst, &[], &SearchConfig::default().randomized(43).with_limit(25));
        assert_ne!(a.solutions, c.solutions);
        assert!(SearchConfig::default().with_limit(0).validate().is_err());
    }

    #[test]
    fn zero_timeout_is_truncated() {
        let inst = make_fig1_instance();
        let stats = count(&inst, &[], &SearchConfig::default().with_timeout_ms(0));
        assert!(stats.truncated());
        let r = accepting_answer_set_exists(
            &inst,
            &BTreeSet::new(),
            &BTreeSet::new(),
            &[],
            &SearchConfig::default().with_timeout_ms(0),
        )
        .unwrap();
        assert_eq!(r, Acceptance::Indeterminate);
    }

    #[test]
    fn accepting_trivial_and_precondition() {
        let inst = make_fig1_instance();
        let none = BTreeSet::new();
        let r = accepting_answer_set_exists(&inst, &none, &none, &[], &SearchConfig::default()).unwrap();
        assert!(matches!(r, Acceptance::Accepting(_)));

        let a: BTreeSet<_> = [atom(Predicate::Unit2Zone, 1, 1)].into();
        let err = accepting_answer_set_exists(&inst, &a, &a, &[], &SearchConfig::default());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn accepting_extends_fig1b_zones() {
        let inst = make_fig1_instance();
        let target = solution_atoms(&inst, &fig1b());
        let inc: BTreeSet<_> = target
            .iter()
            .filter(|a| a.pred == Predicate::Unit2Zone)
            .copied()
            .collect();
        let r = accepting_answer_set_exists(&inst, &inc, &BTreeSet::new(), &[], &SearchConfig::default())
            .unwrap();
        let Acceptance::Accepting(w) = r else {
            panic!("expected a witness")
        };
        w.validate(&inst).unwrap();
        assert!(inc.is_subset(&solution_atoms(&inst, &w)));
    }

    #[test]
    fn non_assignment_inclusions_become_constraints() {
        let inst = make_fig1_instance();
        let inc: BTreeSet<_> = [atom(Predicate::PartnerUnits, 1, 4)].into();
        let exc: BTreeSet<_> = [atom(Predicate::Unit2ZoneGeq, 3, 1)].into();
        let r = accepting_answer_set_exists(&inst, &inc, &exc, &[], &SearchConfig::default()).unwrap();
        let Acceptance::Accepting(w) = r else {
            panic!("expected a witness")
        };
        let atoms = solution_atoms(&inst, &w);
        assert!(atoms.contains(&atom(Predicate::PartnerUnits, 1, 4)));
        assert!(w.zone_unit(1) < 3);
    }
}
