mod common;

use std::collections::HashSet;

use pupsbc::ground::ground_all;
use pupsbc::hypothesis::Constraint;
use pupsbc::learner::CompiledSpace;
use pupsbc::hypothesis::HypothesisSpace;
use pupsbc::solver::{count, enumerate, SearchConfig};
use pupsbc::{make_fig1_instance, Solution};

use common::{four_zone_instance, naive_solutions};

#[test]
fn four_zone_matches_generate_and_test() {
    for units in [2, 3, 4] {
        let inst = four_zone_instance(units);
        let naive = naive_solutions(&inst);
        let found = enumerate(&inst, &[], &SearchConfig::default());
        let set: HashSet<Solution> = found.solutions.iter().cloned().collect();
        assert_eq!(set.len(), found.solutions.len(), "duplicates with {units} units");
        assert_eq!(set, naive, "{units} units");
    }
}

#[test]
fn constrained_search_matches_filtered_oracle() {
    let inst = four_zone_instance(4);
    let naive = naive_solutions(&inst);
    let rules: Vec<Constraint> = [
        ":- closezones(V1,V2), partnerunits(V1,V2), not zone2sensor(V1,V2).",
        ":- closesensors(V1,V2), unit2sensorGEQ(V1,V2), unit2sensorGEQ(V2,V1).",
        ":- not unit2zoneGEQ(V1,V1), partnerunits(V1,V2).",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    for r in &rules {
        let compiled = CompiledSpace::new(&HypothesisSpace::from_rules(vec![r.clone()])).unwrap();
        let expected: HashSet<Solution> = naive
            .iter()
            .filter(|s| compiled.violated_rules(&inst, s).is_empty())
            .cloned()
            .collect();
        let ground = ground_all(std::slice::from_ref(r), &inst).unwrap();
        let found: HashSet<Solution> = enumerate(&inst, &ground, &SearchConfig::default())
            .solutions
            .into_iter()
            .collect();
        assert!(found.len() < naive.len(), "{r} removes nothing");
        assert_eq!(found, expected, "{r}");
    }
}

#[test]
fn fig1_with_five_units() {
    // independent brute-force count, computed before the solver existed
    let inst = make_fig1_instance().with_units(5, "double-6-u5");
    let stats = count(&inst, &[], &SearchConfig::default());
    assert_eq!(stats.solutions, 1_467_120);
}

#[test]
fn randomized_enumeration_is_a_permutation() {
    let inst = make_fig1_instance();
    let plain = enumerate(&inst, &[], &SearchConfig::default().with_limit(1000)).solutions;
    let mut a = enumerate(&inst, &[], &SearchConfig::default().randomized(9)).solutions;
    let b = enumerate(&inst, &[], &SearchConfig::default().randomized(9)).solutions;
    assert_eq!(a, b);
    assert_eq!(a.len(), 145_368);
    assert_ne!(a[..1000], plain[..]);
    a.sort();
    a.dedup();
    assert_eq!(a.len(), 145_368);
}
