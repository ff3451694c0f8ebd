mod common;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pupsbc::solver::{enumerate, SearchConfig};
use pupsbc::symmetry::{
    detect_generators, dominated, graph_group_order, lex_smallest, orbit, partition_orbits, AtomOrder,
};
use pupsbc::{make_fig1_instance, PupInstance, Solution};

use common::{four_zone_instance, group_elements};

#[test]
fn four_zone_orbits_match_group_closure() {
    let inst = four_zone_instance(3);
    let gens = detect_generators(&inst);
    let group = group_elements(&inst, &gens);
    // Aut(G) is the reflection swapping the two dangling sensors' sides
    assert_eq!(graph_group_order(&inst, &gens), 2);
    assert_eq!(group.len(), 2 * 6);
    let sols = enumerate(&inst, &[], &SearchConfig::default()).solutions;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in sols.choose_multiple(&mut rng, 50) {
        let fast: HashSet<Solution> = orbit(s, &gens, None).members.into_iter().collect();
        let slow: HashSet<Solution> = group.iter().map(|g| g.apply(s)).collect();
        assert_eq!(fast, slow);
    }
}

#[test]
fn rigid_graph_orbit_is_unit_permutations() {
    // a path has one reflection, broken here by the zone/sensor colouring
    let inst = PupInstance::new("path", [(1, 1), (2, 1), (2, 2)], 4, 2, 2).unwrap();
    let gens = detect_generators(&inst);
    assert_eq!(graph_group_order(&inst, &gens), 1);
    let group = group_elements(&inst, &gens);
    assert_eq!(group.len(), 24);
    // only Sym(U) acts: a solution using k units has 4!/(4-k)! images,
    // 24 when every item has its own unit
    let sols = enumerate(&inst, &[], &SearchConfig::default()).solutions;
    assert!(sols.iter().any(|s| s.zone_units()[0] != s.zone_units()[1] && s.sensor_units()[0] != s.sensor_units()[1]
        && !s.zone_units().iter().any(|u| s.sensor_units().contains(u))));
    for s in &sols {
        let used: HashSet<u32> = s.zone_units().iter().chain(s.sensor_units()).copied().collect();
        let expected: usize = (0..used.len()).map(|i| 4 - i).product();
        assert_eq!(orbit(s, &gens, None).len(), expected, "{}", s.to_facts());
    }
}

#[test]
fn fig1_orbits_partition_and_minima() {
    let inst = make_fig1_instance();
    let gens = detect_generators(&inst);
    let ord = AtomOrder::new(&inst, &gens);
    let sols = enumerate(&inst, &[], &SearchConfig::default()).solutions;
    let p = partition_orbits(&inst, &sols, &gens, &ord).unwrap();
    assert_eq!(p.solutions, 145_368);
    assert_eq!(p.orbits, 1538);

    // orbits of distinct solutions are equal or disjoint
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sample: Vec<&Solution> = sols.choose_multiple(&mut rng, 40).collect();
    let orbits: Vec<HashSet<Solution>> = sample
        .iter()
        .map(|s| orbit(s, &gens, None).members.into_iter().collect())
        .collect();
    for a in &orbits {
        for b in &orbits {
            assert!(a == b || a.is_disjoint(b));
        }
        let min = lex_smallest(&inst, a, &ord).unwrap();
        assert!(!dominated(&inst, &min, &gens, &ord));
    }
}

#[test]
fn orbit_cap_truncates() {
    let inst = make_fig1_instance();
    let gens = detect_generators(&inst);
    let s = enumerate(&inst, &[], &SearchConfig::default().with_limit(1)).solutions.remove(0);
    let full = orbit(&s, &gens, None);
    let capped = orbit(&s, &gens, Some(3));
    assert!(full.len() > 3 && !full.truncated);
    assert_eq!(capped.len(), 3);
    assert!(capped.truncated);
    assert_eq!(capped.members[..], full.members[..3]);
}
