use std::fmt;

use crate::atoms::{ArgKind, GroundAtom};
use crate::error::{Error, Result};
use crate::instance::PupInstance;
use crate::solution::Solution;

/// A solution symmetry: a type-preserving graph automorphism together with a
/// renaming of units. Maps are indexed by `id - 1` and hold image ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomPermutation {
    zone_map: Vec<u32>,
    sensor_map: Vec<u32>,
    unit_map: Vec<u32>,
}

fn identity_map(n: u32) -> Vec<u32> {
    (1..=n).collect()
}

fn is_bijection(map: &[u32]) -> bool {
    let mut seen = vec![false; map.len()];
    map.iter().all(|&x| {
        let i = x as usize;
        (1..=map.len()).contains(&i) && !std::mem::replace(&mut seen[i - 1], true)
    })
}

fn invert(map: &[u32]) -> Vec<u32> {
    let mut inv = vec![0; map.len()];
    for (i, &x) in map.iter().enumerate() {
        inv[x as usize - 1] = i as u32 + 1;
    }
    inv
}

impl AtomPermutation {
    pub fn new(zone_map: Vec<u32>, sensor_map: Vec<u32>, unit_map: Vec<u32>) -> Self {
        AtomPermutation {
            zone_map,
            sensor_map,
            unit_map,
        }
    }

    pub fn identity(inst: &PupInstance) -> Self {
        AtomPermutation::new(
            identity_map(inst.num_zones()),
            identity_map(inst.num_sensors()),
            identity_map(inst.num_units()),
        )
    }

    /// Swaps units `a` and `b`, fixing every vertex.
    pub fn unit_transposition(inst: &PupInstance, a: u32, b: u32) -> Self {
        let mut p = Self::identity(inst);
        p.unit_map.swap(a as usize - 1, b as usize - 1);
        p
    }

    pub fn zone(&self, z: u32) -> u32 {
        self.zone_map[z as usize - 1]
    }

    pub fn sensor(&self, s: u32) -> u32 {
        self.sensor_map[s as usize - 1]
    }

    pub fn unit(&self, u: u32) -> u32 {
        self.unit_map[u as usize - 1]
    }

    pub fn is_identity(&self) -> bool {
        [&self.zone_map, &self.sensor_map, &self.unit_map]
            .iter()
            .all(|m| m.iter().enumerate().all(|(i, &x)| x as usize == i + 1))
    }

    pub fn inverse(&self) -> Self {
        AtomPermutation::new(
            invert(&self.zone_map),
            invert(&self.sensor_map),
            invert(&self.unit_map),
        )
    }

    /// Checks that the maps are bijections of the right sizes and that the
    /// vertex map preserves the edge relation.
    pub fn validate(&self, inst: &PupInstance) -> Result<()> {
        if self.zone_map.len() != inst.num_zones() as usize
            || self.sensor_map.len() != inst.num_sensors() as usize
            || self.unit_map.len() != inst.num_units() as usize
        {
            return Err(Error::Invariant("permutation sized for another instance".into()));
        }
        if !(is_bijection(&self.zone_map) && is_bijection(&self.sensor_map) && is_bijection(&self.unit_map)) {
            return Err(Error::Invariant("permutation map is not a bijection".into()));
        }
        for &(z, s) in inst.edges() {
            if !inst.has_edge(self.zone(z), self.sensor(s)) {
                return Err(Error::Invariant(format!(
                    "edge ({z},{s}) is not preserved"
                )));
            }
        }
        Ok(())
    }

    fn map_arg(&self, kind: ArgKind, v: u32) -> u32 {
        match kind {
            ArgKind::Unit => self.unit(v),
            ArgKind::Zone => self.zone(v),
            ArgKind::Sensor => self.sensor(v),
        }
    }

    /// Image of an atom. Out-of-domain atoms map to themselves.
    pub fn map_atom(&self, atom: &GroundAtom) -> GroundAtom {
        let [ka, kb] = atom.pred.arg_kinds();
        let ok = |k: ArgKind, v: u32| {
            let n = match k {
                ArgKind::Unit => self.unit_map.len(),
                ArgKind::Zone => self.zone_map.len(),
                ArgKind::Sensor => self.sensor_map.len(),
            };
            (1..=n as u32).contains(&v)
        };
        if !(ok(ka, atom.args.0) && ok(kb, atom.args.1)) {
            return *atom;
        }
        GroundAtom::new(
            atom.pred,
            self.map_arg(ka, atom.args.0),
            self.map_arg(kb, atom.args.1),
        )
    }

    /// Image of a solution: vertex `v` on unit `u` becomes vertex `π(v)` on
    /// unit `π(u)`.
    pub fn apply(&self, sol: &Solution) -> Solution {
        let mut zones = vec![0; sol.zone_units().len()];
        for (i, &u) in sol.zone_units().iter().enumerate() {
            zones[self.zone_map[i] as usize - 1] = self.unit(u);
        }
        let mut sensors = vec![0; sol.sensor_units().len()];
        for (i, &u) in sol.sensor_units().iter().enumerate() {
            sensors[self.sensor_map[i] as usize - 1] = self.unit(u);
        }
        Solution::new(zones, sensors)
    }

    /// Parses the cycle notation written by `Display`.
    pub fn parse(text: &str, inst: &PupInstance) -> Result<Self> {
        let bad = |m: &str| Error::Domain(format!("bad generator `{text}`: {m}"));
        let mut p = Self::identity(inst);
        for part in text.split(';') {
            let (label, cycles) = part.split_once(':').ok_or_else(|| bad("missing label"))?;
            let label = label.trim();
            for cycle in cycles.trim().split(')').map(str::trim).filter(|c| !c.is_empty()) {
                let body = cycle.strip_prefix('(').ok_or_else(|| bad("missing `(`"))?;
                let elems: Vec<&str> = body.split_whitespace().collect();
                for (i, e) in elems.iter().enumerate() {
                    let next = elems[(i + 1) % elems.len()];
                    let parse_id = |s: &str, prefix: Option<char>| -> Result<(char, u32)> {
                        let (tag, num) = match prefix {
                            Some(_) => (s.chars().next().unwrap_or(' '), &s[1.min(s.len())..]),
                            None => ('u', s),
                        };
                        let id = num.parse::<u32>().map_err(|_| bad("bad id"))?;
                        Ok((tag, id))
                    };
                    match label {
                        "units" => {
                            let (_, a) = parse_id(e, None)?;
                            let (_, b) = parse_id(next, None)?;
                            *p.unit_map.get_mut((a as usize).wrapping_sub(1)).ok_or_else(|| bad("unit out of range"))? = b;
                        }
                        "vertices" => {
                            let (ta, a) = parse_id(e, Some('v'))?;
                            let (tb, b) = parse_id(next, Some('v'))?;
                            if ta != tb {
                                return Err(bad("cycle mixes sensors and zones"));
                            }
                            let map = match ta {
                                's' => &mut p.sensor_map,
                                'z' => &mut p.zone_map,
                                _ => return Err(bad("vertex must start with s or z")),
                            };
                            *map.get_mut((a as usize).wrapping_sub(1)).ok_or_else(|| bad("vertex out of range"))? = b;
                        }
                        _ => return Err(bad("unknown label")),
                    }
                }
            }
        }
        p.validate(inst)?;
        Ok(p)
    }
}

fn write_cycles(f: &mut fmt::Formatter<'_>, map: &[u32], tag: &str) -> fmt::Result {
    let mut seen = vec![false; map.len()];
    for start in 0..map.len() {
        if seen[start] || map[start] as usize == start + 1 {
            continue;
        }
        f.write_str("(")?;
        let mut i = start;
        let mut first = true;
        while !seen[i] {
            seen[i] = true;
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{tag}{}", i + 1)?;
            i = map[i] as usize - 1;
        }
        f.write_str(")")?;
    }
    Ok(())
}

/// Cycle notation, e.g. `units: (1 2); vertices: (s3 s4)(z2 z5)`. Each cycle
/// starts at its smallest element; sensor cycles come before zone cycles.
impl fmt::Display for AtomPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("units: ")?;
        write_cycles(f, &self.unit_map, "")?;
        f.write_str("; vertices: ")?;
        write_cycles(f, &self.sensor_map, "s")?;
        write_cycles(f, &self.zone_map, "z")
    }
}

/// One generator per line.
pub fn write_generators(gens: &[AtomPermutation]) -> String {
    gens.iter().map(|g| format!("{g}\n")).collect()
}

pub fn parse_generators(text: &str, inst: &PupInstance) -> Result<Vec<AtomPermutation>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'))
        .map(|l| AtomPermutation::parse(l, inst))
        .collect()
}
