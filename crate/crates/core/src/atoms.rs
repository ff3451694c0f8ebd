//! The fixed ground-atom vocabulary and the derived (ABK) predicates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::PupInstance;
use crate::solution::Solution;

/// Predicates of the vocabulary. The variant order is the alphabetical order
/// of the predicate names, which the lex-leader atom order relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Predicate {
    CloseSensors,
    CloseZones,
    PartnerUnits,
    Unit2Sensor,
    Unit2SensorGeq,
    Unit2Zone,
    Unit2ZoneGeq,
    Zone2Sensor,
}

/// Sort of an argument position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArgKind {
    Unit,
    Zone,
    Sensor,
}

impl Predicate {
    pub const ALL: [Predicate; 8] = [
        Predicate::CloseSensors,
        Predicate::CloseZones,
        Predicate::PartnerUnits,
        Predicate::Unit2Sensor,
        Predicate::Unit2SensorGeq,
        Predicate::Unit2Zone,
        Predicate::Unit2ZoneGeq,
        Predicate::Zone2Sensor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::CloseSensors => "closesensors",
            Predicate::CloseZones => "closezones",
            Predicate::PartnerUnits => "partnerunits",
            Predicate::Unit2Sensor => "unit2sensor",
            Predicate::Unit2SensorGeq => "unit2sensorGEQ",
            Predicate::Unit2Zone => "unit2zone",
            Predicate::Unit2ZoneGeq => "unit2zoneGEQ",
            Predicate::Zone2Sensor => "zone2sensor",
        }
    }

    pub fn arg_kinds(self) -> [ArgKind; 2] {
        use ArgKind::*;
        match self {
            Predicate::Unit2Zone | Predicate::Unit2ZoneGeq => [Unit, Zone],
            Predicate::Unit2Sensor | Predicate::Unit2SensorGeq => [Unit, Sensor],
            Predicate::PartnerUnits => [Unit, Unit],
            Predicate::Zone2Sensor => [Zone, Sensor],
            Predicate::CloseSensors => [Sensor, Sensor],
            Predicate::CloseZones => [Zone, Zone],
        }
    }

    /// Predicates fixed by the instance alone.
    pub fn is_domain(self) -> bool {
        matches!(
            self,
            Predicate::Zone2Sensor | Predicate::CloseSensors | Predicate::CloseZones
        )
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown predicate `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub pred: Predicate,
    pub args: (u32, u32),
}

impl GroundAtom {
    pub fn new(pred: Predicate, a: u32, b: u32) -> Self {
        GroundAtom { pred, args: (a, b) }
    }

    /// Whether the arguments lie in the domains the predicate implies.
    pub fn in_domain(&self, inst: &PupInstance) -> bool {
        let [ka, kb] = self.pred.arg_kinds();
        in_kind(inst, ka, self.args.0) && in_kind(inst, kb, self.args.1)
    }
}

pub(crate) fn in_kind(inst: &PupInstance, kind: ArgKind, v: u32) -> bool {
    let max = match kind {
        ArgKind::Unit => inst.num_units(),
        ArgKind::Zone => inst.num_zones(),
        ArgKind::Sensor => inst.num_sensors(),
    };
    (1..=max).contains(&v)
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.pred, self.args.0, self.args.1)
    }
}

impl FromStr for GroundAtom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_end_matches('.');
        match crate::instance::parse_fact(s) {
            Some((p, args)) if args.len() == 2 => Ok(GroundAtom::new(p.parse()?, args[0], args[1])),
            _ => Err(Error::Domain(format!("malformed atom `{s}`"))),
        }
    }
}

/// Unfolds `pGEQ(X,Y) :- p(X,Y).` and `pGEQ(X,Y) :- pGEQ(X+1,Y), 0 < X.`:
/// `pGEQ(x,y)` holds iff `p(x',y)` for some `x' >= x`, for `1 <= x <= max_unit`.
///
/// `assign` holds the `(unit, item)` pairs of `p`; `geq` names the derived
/// predicate.
pub fn derive_geq(
    geq: Predicate,
    assign: impl IntoIterator<Item = (u32, u32)>,
    max_unit: u32,
) -> Result<BTreeSet<GroundAtom>> {
    let mut top: BTreeMap<u32, u32> = BTreeMap::new();
    for (unit, item) in assign {
        if let Some(prev) = top.insert(item, unit) {
            if prev != unit {
                return Err(Error::Invariant(format!(
                    "item {item} assigned to units {prev} and {unit}"
                )));
            }
        }
    }
    let mut out = BTreeSet::new();
    for (item, unit) in top {
        for x in 1..=unit.min(max_unit) {
            out.insert(GroundAtom::new(geq, x, item));
        }
    }
    Ok(out)
}

/// `closesensors/2` and `closezones/2`: distinct nodes of one side sharing a
/// neighbour on the other side.
pub fn derive_close(inst: &PupInstance) -> BTreeSet<GroundAtom> {
    let mut out = BTreeSet::new();
    for z in inst.zones() {
        for &a in inst.sensors_of(z) {
            for &b in inst.sensors_of(z) {
                if a != b {
                    out.insert(GroundAtom::new(Predicate::CloseSensors, a, b));
                }
            }
        }
    }
    for s in inst.sensors() {
        for &a in inst.zones_of(s) {
            for &b in inst.zones_of(s) {
                if a != b {
                    out.insert(GroundAtom::new(Predicate::CloseZones, a, b));
                }
            }
        }
    }
    out
}

/// The full atom set of a solution: assignment, partner, instance, GEQ and
/// close atoms.
pub fn solution_atoms(inst: &PupInstance, sol: &Solution) -> BTreeSet<GroundAtom> {
    let mut out = BTreeSet::new();
    for z in inst.zones() {
        out.insert(GroundAtom::new(Predicate::Unit2Zone, sol.zone_unit(z), z));
    }
    for s in inst.sensors() {
        out.insert(GroundAtom::new(Predicate::Unit2Sensor, sol.sensor_unit(s), s));
    }
    for &(z, s) in inst.edges() {
        out.insert(GroundAtom::new(Predicate::Zone2Sensor, z, s));
        let (u, v) = (sol.zone_unit(z), sol.sensor_unit(s));
        if u != v {
            out.insert(GroundAtom::new(Predicate::PartnerUnits, u, v));
            out.insert(GroundAtom::new(Predicate::PartnerUnits, v, u));
        }
    }
    let zones = inst.zones().map(|z| (sol.zone_unit(z), z));
    out.extend(derive_geq(Predicate::Unit2ZoneGeq, zones, inst.num_units()).expect("one unit per zone"));
    let sensors = inst.sensors().map(|s| (sol.sensor_unit(s), s));
    out.extend(
        derive_geq(Predicate::Unit2SensorGeq, sensors, inst.num_units()).expect("one unit per sensor"),
    );
    out.extend(derive_close(inst));
    out
}

/// Constant-time membership for the atoms of one total solution.
pub struct SolutionModel<'a> {
    inst: &'a PupInstance,
    sol: &'a Solution,
    partners: Vec<bool>,
}

impl<'a> SolutionModel<'a> {
    pub fn new(inst: &'a PupInstance, sol: &'a Solution) -> Self {
        let nu = inst.num_units() as usize;
        let mut partners = vec![false; nu * nu];
        for &(z, s) in inst.edges() {
            let (u, v) = (sol.zone_unit(z) as usize - 1, sol.sensor_unit(s) as usize - 1);
            if u != v {
                partners[u * nu + v] = true;
                partners[v * nu + u] = true;
            }
        }
        SolutionModel {
            inst,
            sol,
            partners,
        }
    }

    pub fn instance(&self) -> &PupInstance {
        self.inst
    }

    pub fn holds(&self, atom: &GroundAtom) -> bool {
        if !atom.in_domain(self.inst) {
            return false;
        }
        let (a, b) = atom.args;
        match atom.pred {
            Predicate::Unit2Zone => self.sol.zone_unit(b) == a,
            Predicate::Unit2Sensor => self.sol.sensor_unit(b) == a,
            Predicate::Unit2ZoneGeq => self.sol.zone_unit(b) >= a,
            Predicate::Unit2SensorGeq => self.sol.sensor_unit(b) >= a,
            Predicate::PartnerUnits => {
                let nu = self.inst.num_units() as usize;
                self.partners[(a as usize - 1) * nu + (b as usize - 1)]
            }
            Predicate::Zone2Sensor => self.inst.has_edge(a, b),
            Predicate::CloseSensors => self.inst.close_sensors(a, b),
            Predicate::CloseZones => self.inst.close_zones(a, b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::make_fig1_instance;
    use crate::solution::tests::fig1b;
    use proptest::prelude::*;

    fn atom(p: Predicate, a: u32, b: u32) -> GroundAtom {
        GroundAtom::new(p, a, b)
    }

    #[test]
    fn geq_unfolding() {
        let g = Predicate::Unit2ZoneGeq;
        let got = derive_geq(g, [(3, 2)], 4).unwrap();
        let want: BTreeSet<_> = [atom(g, 3, 2), atom(g, 2, 2), atom(g, 1, 2)].into();
        assert_eq!(got, want);
        assert_eq!(derive_geq(g, [(1, 5)], 4).unwrap(), [atom(g, 1, 5)].into());
        assert!(derive_geq(g, [], 4).unwrap().is_empty());
    }

    #[test]
    fn geq_rejects_two_units_per_item() {
        let err = derive_geq(Predicate::Unit2SensorGeq, [(1, 2), (3, 2)], 4).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
    }

    #[test]
    fn close_on_fig1() {
        let close = derive_close(&make_fig1_instance());
        assert!(close.contains(&atom(Predicate::CloseSensors, 1, 2)));
        assert!(close.contains(&atom(Predicate::CloseZones, 1, 2)));
        assert!(!close.contains(&atom(Predicate::CloseSensors, 1, 1)));
        for a in &close {
            assert!(close.contains(&atom(a.pred, a.args.1, a.args.0)));
            assert_ne!(a.args.0, a.args.1);
        }
    }

    #[test]
    fn fig1b_atoms() {
        let inst = make_fig1_instance();
        let atoms = solution_atoms(&inst, &fig1b());
        assert!(atoms.contains(&atom(Predicate::Unit2Zone, 1, 1)));
        assert!(atoms.contains(&atom(Predicate::Unit2Zone, 1, 2)));
        assert!(atoms.contains(&atom(Predicate::Unit2Sensor, 4, 7)));
        assert!(atoms.contains(&atom(Predicate::PartnerUnits, 1, 2)));
        assert!(atoms.contains(&atom(Predicate::PartnerUnits, 2, 1)));
        assert!(!atoms.contains(&atom(Predicate::PartnerUnits, 1, 3)));
    }

    #[test]
    fn model_agrees_with_atom_set() {
        let inst = make_fig1_instance();
        let sol = fig1b();
        let atoms = solution_atoms(&inst, &sol);
        let model = SolutionModel::new(&inst, &sol);
        for p in Predicate::ALL {
            for a in 0..=8 {
                for b in 0..=8 {
                    let at = atom(p, a, b);
                    assert_eq!(model.holds(&at), atoms.contains(&at), "{at}");
                }
            }
        }
    }

    #[test]
    fn single_unit_has_no_partners() {
        let inst = PupInstance::new("one", [(1, 1), (1, 2)], 1, 2, 2).unwrap();
        let sol = Solution::new(vec![1], vec![1, 1]);
        let atoms = solution_atoms(&inst, &sol);
        assert!(atoms.iter().all(|a| a.pred != Predicate::PartnerUnits));
    }

    #[test]
    fn atom_text_roundtrip() {
        let a = atom(Predicate::Unit2SensorGeq, 3, 7);
        assert_eq!(a.to_string(), "unit2sensorGEQ(3,7)");
        assert_eq!(a.to_string().parse::<GroundAtom>().unwrap(), a);
    }

    proptest! {
        #[test]
        fn geq_matches_brute_force(units in proptest::collection::vec(0u32..=5, 1..8)) {
            // units[i] == 0 means item i+1 unassigned
            let assign: Vec<(u32, u32)> = units.iter().enumerate()
                .filter(|(_, &u)| u > 0).map(|(i, &u)| (u, i as u32 + 1)).collect();
            let got = derive_geq(Predicate::Unit2ZoneGeq, assign.clone(), 5).unwrap();
            for x in 1..=5u32 {
                for y in 1..=units.len() as u32 {
                    let expect = assign.iter().any(|&(u, i)| i == y && u >= x);
                    prop_assert_eq!(got.contains(&atom(Predicate::Unit2ZoneGeq, x, y)), expect);
                }
            }
        }
    }
}
