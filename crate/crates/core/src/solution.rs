use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{parse_fact, PupInstance};

/// A total assignment of zones and sensors to units.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    zone_unit: Vec<u32>,
    sensor_unit: Vec<u32>,
}

impl Solution {
    /// `zone_unit[z - 1]` is the unit of zone `z`; likewise for sensors.
    pub fn new(zone_unit: Vec<u32>, sensor_unit: Vec<u32>) -> Self {
        Solution {
            zone_unit,
            sensor_unit,
        }
    }

    pub fn zone_unit(&self, zone: u32) -> u32 {
        self.zone_unit[zone as usize - 1]
    }

    pub fn sensor_unit(&self, sensor: u32) -> u32 {
        self.sensor_unit[sensor as usize - 1]
    }

    pub fn zone_units(&self) -> &[u32] {
        &self.zone_unit
    }

    pub fn sensor_units(&self) -> &[u32] {
        &self.sensor_unit
    }

    /// Unordered partner pairs `(u, v)` with `u < v`.
    pub fn partner_pairs(&self, inst: &PupInstance) -> BTreeSet<(u32, u32)> {
        inst.edges()
            .iter()
            .filter_map(|&(z, s)| {
                let (u, v) = (self.zone_unit(z), self.sensor_unit(s));
                (u != v).then(|| (u.min(v), u.max(v)))
            })
            .collect()
    }

    /// Checks totality, unit range, UCAP and IUCAP.
    pub fn validate(&self, inst: &PupInstance) -> Result<()> {
        if self.zone_unit.len() != inst.num_zones() as usize
            || self.sensor_unit.len() != inst.num_sensors() as usize
        {
            return Err(Error::Invariant("solution is not total".into()));
        }
        let nu = inst.num_units();
        let all = self.zone_unit.iter().chain(&self.sensor_unit);
        if let Some(u) = all.copied().find(|u| !(1..=nu).contains(u)) {
            return Err(Error::Invariant(format!("unknown unit {u}")));
        }
        for u in inst.units() {
            let zones = self.zone_unit.iter().filter(|&&x| x == u).count() as u32;
            let sensors = self.sensor_unit.iter().filter(|&&x| x == u).count() as u32;
            if zones > inst.ucap() || sensors > inst.ucap() {
                return Err(Error::Invariant(format!("unit {u} exceeds ucap")));
            }
        }
        let mut degree = vec![0u32; nu as usize];
        for (u, v) in self.partner_pairs(inst) {
            degree[u as usize - 1] += 1;
            degree[v as usize - 1] += 1;
        }
        if let Some(u) = degree.iter().position(|&d| d > inst.iucap()) {
            return Err(Error::Invariant(format!("unit {} exceeds iucap", u + 1)));
        }
        Ok(())
    }

    pub fn is_valid(&self, inst: &PupInstance) -> bool {
        self.validate(inst).is_ok()
    }

    /// Sorted `unit2sensor(U,S).` then `unit2zone(U,Z).` lines.
    pub fn to_facts(&self) -> String {
        let mut sensors: Vec<(u32, u32)> = (1..=self.sensor_unit.len() as u32)
            .map(|s| (self.sensor_unit(s), s))
            .collect();
        sensors.sort_unstable();
        let mut zones: Vec<(u32, u32)> = (1..=self.zone_unit.len() as u32)
            .map(|z| (self.zone_unit(z), z))
            .collect();
        zones.sort_unstable();
        let mut out = String::new();
        for (u, s) in sensors {
            out.push_str(&format!("unit2sensor({u},{s}).\n"));
        }
        for (u, z) in zones {
            out.push_str(&format!("unit2zone({u},{z}).\n"));
        }
        out
    }

    pub fn parse_facts(text: &str, inst: &PupInstance) -> Result<Self> {
        let mut zone_unit = vec![0; inst.num_zones() as usize];
        let mut sensor_unit = vec![0; inst.num_sensors() as usize];
        for (idx, line) in text.lines().enumerate() {
            let code = line.split('%').next().unwrap_or("");
            let code: String = code.chars().filter(|c| !c.is_whitespace()).collect();
            for fact in code.split('.').filter(|f| !f.is_empty()) {
                let bad = || Error::parse(idx + 1, format!("bad solution fact `{fact}`"));
                let (pred, args) = parse_fact(fact).ok_or_else(bad)?;
                let (slot, id) = match (pred, args.as_slice()) {
                    ("unit2zone", &[u, z]) => (zone_unit.get_mut((z as usize).wrapping_sub(1)), u),
                    ("unit2sensor", &[u, s]) => (sensor_unit.get_mut((s as usize).wrapping_sub(1)), u),
                    _ => return Err(bad()),
                };
                *slot.ok_or_else(bad)? = id;
            }
        }
        let sol = Solution::new(zone_unit, sensor_unit);
        sol.validate(inst)?;
        Ok(sol)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::instance::make_fig1_instance;

    /// The assignment drawn in Fig. 1(b).
    pub(crate) fn fig1b() -> Solution {
        Solution::new(vec![1, 1, 2, 2, 3, 3], vec![1, 1, 2, 2, 3, 3, 4])
    }

    #[test]
    fn fig1b_is_valid() {
        let inst = make_fig1_instance();
        fig1b().validate(&inst).unwrap();
        let pairs = fig1b().partner_pairs(&inst);
        assert_eq!(pairs, [(1, 2), (2, 3), (3, 4)].into());
    }

    #[test]
    fn capacity_violations() {
        let inst = make_fig1_instance();
        let crowded = Solution::new(vec![1, 1, 1, 2, 3, 3], vec![1, 1, 2, 2, 3, 3, 4]);
        assert!(!crowded.is_valid(&inst));
        // unit 1 partners with 2, 3 and 4
        let star = Solution::new(vec![1, 2, 3, 4, 1, 2], vec![1, 1, 3, 4, 3, 4, 2]);
        assert!(star.validate(&inst).is_err());
    }

    #[test]
    fn facts_roundtrip() {
        let inst = make_fig1_instance();
        let text = fig1b().to_facts();
        assert!(text.starts_with("unit2sensor(1,1).\nunit2sensor(1,2).\n"));
        assert_eq!(Solution::parse_facts(&text, &inst).unwrap(), fig1b());
    }
}
