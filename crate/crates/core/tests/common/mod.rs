#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use pupsbc::symmetry::AtomPermutation;
use pupsbc::{PupInstance, Solution};

/// Zones 1, 2, 4, 5 of the Fig. 1 building with their sensors, renumbered:
/// a 4-cycle of zones with one dangling sensor on each of z2 and z4.
pub fn four_zone_instance(units: u32) -> PupInstance {
    let edges = [(1, 1), (1, 2), (2, 1), (2, 3), (2, 4), (3, 2), (3, 5), (4, 4), (4, 5), (4, 6)];
    PupInstance::new("four-zone", edges, units, 2, 2).unwrap()
}

/// Every assignment of units to items, filtered by validity.
pub fn naive_solutions(inst: &PupInstance) -> HashSet<Solution> {
    let nz = inst.num_zones() as usize;
    let ns = inst.num_sensors() as usize;
    let nu = inst.num_units();
    let mut digits = vec![1u32; nz + ns];
    let mut out = HashSet::new();
    loop {
        let sol = Solution::new(digits[..nz].to_vec(), digits[nz..].to_vec());
        if sol.is_valid(inst) {
            out.insert(sol);
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return out;
            }
            if digits[i] < nu {
                digits[i] += 1;
                break;
            }
            digits[i] = 1;
            i += 1;
        }
    }
}

/// `x ↦ second(first(x))`.
pub fn compose(inst: &PupInstance, first: &AtomPermutation, second: &AtomPermutation) -> AtomPermutation {
    AtomPermutation::new(
        inst.zones().map(|z| second.zone(first.zone(z))).collect(),
        inst.sensors().map(|s| second.sensor(first.sensor(s))).collect(),
        inst.units().map(|u| second.unit(first.unit(u))).collect(),
    )
}

/// Every element of the group generated by `gens`.
pub fn group_elements(inst: &PupInstance, gens: &[AtomPermutation]) -> Vec<AtomPermutation> {
    let id = AtomPermutation::identity(inst);
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    let mut all = Vec::new();
    while let Some(g) = queue.pop_front() {
        for h in gens {
            let gh = compose(inst, &g, h);
            if seen.insert(gh.clone()) {
                queue.push_back(gh);
            }
        }
        all.push(g);
    }
    all
}
