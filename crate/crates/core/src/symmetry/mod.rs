//! Solution symmetries of a PUP instance: the group Aut(G) × Sym(U) as a
//! generator list, orbits, and lex-leader dominance.

mod automorphism;
mod order;
mod permutation;

pub use automorphism::{automorphism_generators, ColouredGraph};
pub use order::{dominated, lex_smallest, orbit, partition_orbits, AtomBits, AtomOrder, Orbit, OrbitPartition};
pub use permutation::{parse_generators, write_generators, AtomPermutation};

use crate::instance::PupInstance;

/// Generators of Aut(G) × Sym(U): the automorphisms of the bipartite graph
/// (zones and sensors coloured apart) with units fixed, followed by the unit
/// transpositions `(i i+1)` with vertices fixed.
pub fn detect_generators(inst: &PupInstance) -> Vec<AtomPermutation> {
    let nz = inst.num_zones() as usize;
    let ns = inst.num_sensors() as usize;
    let colours = (0..nz).map(|_| 0).chain((0..ns).map(|_| 1)).collect();
    let edges = inst
        .edges()
        .iter()
        .map(|&(z, s)| (z as usize - 1, nz + s as usize - 1));
    let graph = ColouredGraph::new(nz + ns, edges, colours);
    let units: Vec<u32> = inst.units().collect();

    let mut gens: Vec<AtomPermutation> = automorphism_generators(&graph)
        .into_iter()
        .map(|perm| {
            let zone_map = perm[..nz].iter().map(|&v| v as u32 + 1).collect();
            let sensor_map = perm[nz..].iter().map(|&v| (v - nz) as u32 + 1).collect();
            AtomPermutation::new(zone_map, sensor_map, units.clone())
        })
        .collect();
    gens.extend((1..inst.num_units()).map(|u| AtomPermutation::unit_transposition(inst, u, u + 1)));
    debug_assert!(gens.iter().all(|g| g.validate(inst).is_ok()));
    gens
}

/// Order of the group generated by the graph automorphisms alone, by
/// closing the vertex maps (only sensible for small graphs).
pub fn graph_group_order(inst: &PupInstance, gens: &[AtomPermutation]) -> usize {
    use std::collections::HashSet;
    let vertex_gens: Vec<&AtomPermutation> = gens
        .iter()
        .filter(|g| inst.units().all(|u| g.unit(u) == u))
        .collect();
    let key = |zs: &Vec<u32>, ss: &Vec<u32>| (zs.clone(), ss.clone());
    let id_z: Vec<u32> = inst.zones().collect();
    let id_s: Vec<u32> = inst.sensors().collect();
    let mut seen = HashSet::from([key(&id_z, &id_s)]);
    let mut stack = vec![(id_z, id_s)];
    while let Some((zs, ss)) = stack.pop() {
        for g in &vertex_gens {
            let nz: Vec<u32> = zs.iter().map(|&z| g.zone(z)).collect();
            let nsen: Vec<u32> = ss.iter().map(|&s| g.sensor(s)).collect();
            if seen.insert(key(&nz, &nsen)) {
                stack.push((nz, nsen));
            }
        }
    }
    seen.len()
}
