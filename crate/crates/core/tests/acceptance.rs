//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! verdict. A criterion that panics counts as FAIL with the panic message.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pupsbc::atoms::Predicate;
use pupsbc::examples::{gen_positive, scalable_fullsbcs, CdpiExample};
use pupsbc::ground::ground_all;
use pupsbc::hypothesis::{build_space, score, Constraint, HypothesisSpace, LanguageBias, RuleId, Scheme};
use pupsbc::learner::{check_coverage, flag_slow_enumerations, sbca, Coverage, SbcaEvent};
use pupsbc::pipeline::{cmd_benchmark, median, run_seed, wilcoxon_signed_rank, RunConfig, TrainingInstance};
use pupsbc::solver::{count, enumerate, solve, SearchConfig};
use pupsbc::symmetry::{detect_generators, dominated, graph_group_order, orbit, partition_orbits, AtomOrder};
use pupsbc::{instance_from_spec, make_fig1_instance, PupInstance, Solution};

use common::{four_zone_instance, group_elements, naive_solutions};

type Outcome = (bool, String);

fn solution_of(e: &CdpiExample) -> Solution {
    let inst = &e.context;
    let mut zones = vec![0; inst.num_zones() as usize];
    let mut sensors = vec![0; inst.num_sensors() as usize];
    for a in &e.inclusions {
        let (u, item) = a.args;
        match a.pred {
            Predicate::Unit2Zone => zones[item as usize - 1] = u,
            Predicate::Unit2Sensor => sensors[item as usize - 1] = u,
            _ => {}
        }
    }
    let sol = Solution::new(zones, sensors);
    assert!(sol.is_valid(inst), "{} does not pin down a solution", e.id);
    sol
}

fn c1_solution_count() -> Outcome {
    let inst = make_fig1_instance();
    let start = Instant::now();
    let n = count(&inst, &[], &SearchConfig::default()).solutions;
    let secs = start.elapsed().as_secs_f64();
    let small = four_zone_instance(4);
    let naive = naive_solutions(&small);
    let found: HashSet<Solution> = enumerate(&small, &[], &SearchConfig::default())
        .solutions
        .into_iter()
        .collect();
    let ok = n == 145_368 && secs < 60.0 && found == naive;
    (
        ok,
        format!(
            "Fig. 1 has {n} solutions ({secs:.2} s); 4-zone sub-instance: solver {} vs generate-and-test {}, sets {}",
            found.len(),
            naive.len(),
            if found == naive { "equal" } else { "differ" }
        ),
    )
}

fn c2_symmetric_fraction() -> Outcome {
    let inst = make_fig1_instance();
    let gens = detect_generators(&inst);
    let ord = AtomOrder::new(&inst, &gens);
    let sols = enumerate(&inst, &[], &SearchConfig::default()).solutions;
    let p = partition_orbits(&inst, &sols, &gens, &ord).unwrap();
    let pct = 100.0 * p.dominated_fraction();
    let aut = graph_group_order(&inst, &gens);
    (
        (pct - 98.9).abs() <= 0.2,
        format!(
            "dominated fraction {pct:.3}% = 1 - {} orbits / {} solutions; group Aut(G) x Sym(U) with |Aut(G)| = {aut}, |Sym(U)| = 24",
            p.orbits, p.solutions
        ),
    )
}

fn c3_subsumers() -> Outcome {
    let bias = LanguageBias::abstract_scheme();
    let space = build_space(bias);
    let parse = |s: &str| Constraint::parse_with(s, bias).unwrap();
    let listed = [
        ":- q(V1,V1).",
        ":- q(V1,V2).",
        ":- pGEQ(V1,V1).",
        ":- pGEQ(V1,V2).",
        ":- not pGEQ(V1,V1), q(V1,V2).",
        ":- not pGEQ(V1,V2), q(V1,V2).",
        ":- not pGEQ(V2,V1), q(V1,V2).",
        ":- not pGEQ(V2,V2), q(V1,V2).",
        ":- not pGEQ(V1,V1), q(V1,V1).",
        ":- not pGEQ(V1,V1), not pGEQ(V1,V2), q(V1,V2).",
        ":- not pGEQ(V1,V1), not pGEQ(V2,V1), q(V1,V2).",
        ":- not pGEQ(V1,V1), not pGEQ(V2,V2), q(V1,V2).",
        ":- not pGEQ(V1,V2), not pGEQ(V2,V1), q(V1,V2).",
        ":- not pGEQ(V1,V2), not pGEQ(V2,V2), q(V1,V2).",
        ":- not pGEQ(V2,V1), not pGEQ(V2,V2), q(V1,V2).",
    ];
    let expected: BTreeSet<String> = listed.iter().map(|s| parse(s).to_string()).collect();
    let target = parse(":- not pGEQ(V1,V1), q(V1,V1).");
    let got: BTreeSet<String> = space
        .subsumers(&target)
        .into_iter()
        .map(|id| space.get(id).to_string())
        .collect();
    let close = parse(":- close(V1,V2).");
    let close_subs = space.subsumers(&close);
    let close_ok = close_subs == vec![space.id_of(&close).unwrap()];
    let missing: Vec<&String> = expected.difference(&got).collect();
    let extra: Vec<&String> = got.difference(&expected).collect();
    (
        missing.is_empty() && extra.is_empty() && close_ok,
        format!(
            "{} of 15 listed subsumers returned; listed but not subsuming: {missing:?}; returned but not listed: {extra:?}; \
             close(V1,V2) subsumed only by itself: {close_ok}",
            expected.intersection(&got).count()
        ),
    )
}

fn c4_scoring() -> Outcome {
    let r = Constraint::parse_with(":- pGEQ(V1,V1), close(V1,V2), q(V2,V3).", LanguageBias::abstract_scheme()).unwrap();
    let (d, c) = (score(&r, Scheme::Default), score(&r, Scheme::Custom));
    (d == 3 && c == 6, format!("default {d}, custom {c}"))
}

/// sbca calls on Fig. 1 positives under random hypotheses that reject
/// them, until at least `want` events are logged. Returns the events and
/// the number of hypotheses drawn.
fn sbca_events(space: &Arc<HypothesisSpace>, want: usize) -> (Vec<(SbcaEvent, CdpiExample)>, usize) {
    let fig1 = Arc::new(make_fig1_instance());
    let gens = detect_generators(&fig1);
    let ord = AtomOrder::new(&fig1, &gens);
    let positives: Vec<CdpiExample> = (1..=4u64)
        .flat_map(|seed| scalable_fullsbcs(&fig1, &gens, &ord, 20, 5, seed))
        .filter(|e| e.is_positive())
        .collect();
    let all_ids: Vec<RuleId> = space.ids().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut events = Vec::new();
    let mut drawn = 0;
    while events.len() < want && drawn < 50_000 {
        drawn += 1;
        let e = positives.choose(&mut rng).unwrap();
        let k = rng.gen_range(1..=3);
        let mut h: Vec<RuleId> = (0..k).map(|_| *all_ids.choose(&mut rng).unwrap()).collect();
        h.sort();
        h.dedup();
        let rules: Vec<Constraint> = h.iter().map(|&r| space.get(r).clone()).collect();
        let ground = ground_all(&rules, &e.context).unwrap();
        if check_coverage(e, &ground, 2000).unwrap() != Coverage::Uncovered(None) {
            continue;
        }
        let cc = sbca(e, &h, space).unwrap();
        let ev = SbcaEvent {
            example_id: e.id.clone(),
            hypothesis: h,
            formula: cc.formula,
        };
        events.push((ev, e.clone()));
    }
    (events, drawn)
}

fn c5_sbca_soundness(space: &Arc<HypothesisSpace>) -> Outcome {
    let (events, drawn) = sbca_events(space, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let all_ids: Vec<RuleId> = space.ids().collect();
    let (mut false_at_h, mut sampled, mut covering, mut touching, mut violations) = (0, 0, 0, 0, 0);
    for (ev, e) in &events {
        if !ev.formula.eval(&ev.hypothesis) {
            false_at_h += 1;
        } else {
            violations += 1;
        }
        let mut near: Vec<RuleId> = ev.formula.ids().into_iter().collect();
        near.extend(&ev.hypothesis);
        for _ in 0..100 {
            let k = rng.gen_range(1..=3);
            let mut h: Vec<RuleId> = (0..k)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        *near.choose(&mut rng).unwrap()
                    } else {
                        *all_ids.choose(&mut rng).unwrap()
                    }
                })
                .collect();
            h.sort();
            h.dedup();
            sampled += 1;
            let rules: Vec<Constraint> = h.iter().map(|&r| space.get(r).clone()).collect();
            let ground = ground_all(&rules, &e.context).unwrap();
            if check_coverage(e, &ground, 2000).unwrap() != Coverage::Covered {
                continue;
            }
            covering += 1;
            if h.iter().any(|r| near.contains(r)) {
                touching += 1;
            }
            if !ev.formula.eval(&h) {
                violations += 1;
            }
        }
    }
    (
        events.len() >= 200 && violations == 0 && covering >= 200,
        format!(
            "{} sbca events from {drawn} random hypotheses; false at H: {false_at_h}/{}; {covering} covering H' accepted of {sampled} sampled \
             ({touching} sharing rules with the formula), all satisfying it: {}",
            events.len(),
            events.len(),
            violations == 0
        ),
    )
}

fn c6_fullsbcs_bounds() -> Outcome {
    let inst = Arc::new(make_fig1_instance());
    let gens = detect_generators(&inst);
    let ord = AtomOrder::new(&inst, &gens);
    let mut problems = Vec::new();
    let mut runs = 0;
    for cells in [1, 5, 20] {
        for max_cell_size in [0, 1, 5] {
            for seed in [1, 2] {
                runs += 1;
                let ex = scalable_fullsbcs(&inst, &gens, &ord, cells, max_cell_size, seed);
                let pos: Vec<Solution> = ex.iter().filter(|e| e.is_positive()).map(solution_of).collect();
                let neg = ex.len() - pos.len();
                if pos.len() > cells || neg > cells * max_cell_size {
                    problems.push(format!("({cells},{max_cell_size}) seed {seed}: {} pos, {neg} neg", pos.len()));
                }
                if let Some(p) = pos.iter().find(|p| dominated(&inst, p, &gens, &ord)) {
                    problems.push(format!("({cells},{max_cell_size}) dominated positive {p:?}"));
                }
                for (i, p) in pos.iter().enumerate() {
                    let o: HashSet<Solution> = orbit(p, &gens, None).members.into_iter().collect();
                    if pos[i + 1..].iter().any(|q| o.contains(q)) {
                        problems.push(format!("({cells},{max_cell_size}) positives share an orbit"));
                    }
                }
            }
        }
    }
    (
        problems.is_empty(),
        format!("{runs} runs over {{1,5,20}} x {{0,1,5}} x 2 seeds; violations: {problems:?}"),
    )
}

fn c7_effectiveness() -> Outcome {
    let cfg = RunConfig::parse(
        "train = double-6\ngen = double-8, double-10, double-12\nstrategy = fullsbcs\ncells = 20\nmax_cell_size = 5\n\
         scheme = custom\nseeds = 1..=10\n",
    )
    .unwrap();
    let space = Arc::new(build_space(LanguageBias::pup()));
    let training = vec![TrainingInstance::new(Arc::new(instance_from_spec("double-6").unwrap()))];
    let gen: Vec<Arc<PupInstance>> = cfg.gen.iter().map(|s| Arc::new(instance_from_spec(s).unwrap())).collect();
    let gen_examples: Vec<CdpiExample> = gen.iter().map(gen_positive).collect();
    let sbca_ids = flag_slow_enumerations(&gen_examples, cfg.sbca_threshold_ms);

    let mut learned: Vec<(u64, Vec<Constraint>)> = Vec::new();
    for &seed in &cfg.seeds {
        if learned.len() >= 5 {
            break;
        }
        let run = run_seed(&cfg, &space, &training, &gen, &sbca_ids, seed).unwrap();
        if let Some(rules) = run.rules {
            learned.push((seed, rules));
        }
    }
    let mut detail = format!("{} learned sets (seeds {:?})", learned.len(), learned.iter().map(|l| l.0).collect::<Vec<_>>());

    // (a) Gen stays satisfiable
    let mut a_ok = !learned.is_empty();
    for (seed, rules) in &learned {
        for g in &gen {
            let ground = ground_all(rules, g).unwrap();
            let res = solve(g, &ground, &SearchConfig::default().with_timeout_ms(120_000));
            if res.verdict() != Some(true) {
                a_ok = false;
                detail.push_str(&format!("; seed {seed}: {} verdict {:?}", g.name(), res.verdict()));
            }
        }
    }

    // (b) fewer but still some solutions on a held-out double instance
    let held_out = make_fig1_instance().with_units(5, "double-6-u5");
    let plain = count(&held_out, &[], &SearchConfig::default()).solutions;
    let mut counts = Vec::new();
    for (seed, rules) in &learned {
        let ground = ground_all(rules, &held_out).unwrap();
        counts.push((*seed, count(&held_out, &ground, &SearchConfig::default()).solutions));
    }
    let b_ok = counts.iter().any(|&(_, c)| c >= 1 && c < plain);

    // (c) unsat proofs with the learned constraints need no more nodes
    let unsat: Vec<Arc<PupInstance>> = ["un-double-6", "un-double-8"]
        .iter()
        .map(|s| Arc::new(instance_from_spec(s).unwrap()))
        .collect();
    let (mut plain_nodes, mut abk_nodes) = (Vec::new(), Vec::new());
    let mut c_all_unsat = true;
    for (seed, rules) in &learned {
        for row in cmd_benchmark(&unsat, Some(rules), &[*seed], 120_000).unwrap() {
            c_all_unsat &= row.solutions == 0 && row.runtime_ms.is_some();
            match row.condition {
                pupsbc::pipeline::Condition::Plain => plain_nodes.push(row.nodes as f64),
                pupsbc::pipeline::Condition::WithAbk => abk_nodes.push(row.nodes as f64),
            }
        }
    }
    let (mp, ma) = (median(&plain_nodes), median(&abk_nodes));
    let c_ok = learned.len() >= 5 && c_all_unsat && matches!((mp, ma), (Some(p), Some(a)) if a <= p);
    detail.push_str(&format!(
        "; (a) Gen satisfiable under every set: {a_ok}; (b) held-out double-6 with 5 units: plain {plain}, constrained {counts:?}; \
         (c) median unsat nodes plain {mp:?} vs with ABK {ma:?} over {} rows",
        plain_nodes.len()
    ));
    (a_ok && b_ok && c_ok, detail)
}

fn c8_orbits() -> Outcome {
    let inst = four_zone_instance(3);
    let gens = detect_generators(&inst);
    let group = group_elements(&inst, &gens);
    let sols = enumerate(&inst, &[], &SearchConfig::default()).solutions;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sample: Vec<&Solution> = sols.choose_multiple(&mut rng, 50).collect();
    let mismatches = sample
        .iter()
        .filter(|s| {
            let fast: HashSet<Solution> = orbit(s, &gens, None).members.into_iter().collect();
            let slow: HashSet<Solution> = group.iter().map(|g| g.apply(s)).collect();
            fast != slow
        })
        .count();
    (
        sample.len() == 50 && mismatches == 0,
        format!(
            "{} sampled solutions of {}, group of order {}; mismatches: {mismatches}",
            sample.len(),
            sols.len(),
            group.len()
        ),
    )
}

fn c9_wilcoxon() -> Outcome {
    let pairs: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 2.0 * i as f64)).collect();
    let w = wilcoxon_signed_rank(&pairs).unwrap();
    // exact oracle: all 2^6 sign patterns over ranks 1..6
    let observed = 0u32;
    let extreme = (0..64u32)
        .filter(|mask| {
            let plus: u32 = (0..6).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
            plus.min(21 - plus) <= observed
        })
        .count();
    let oracle = extreme as f64 / 64.0;
    (
        w.statistic == 0.0 && (w.p_value - oracle).abs() < 1e-9,
        format!("statistic {}, p {} vs exact enumeration {oracle}", w.statistic, w.p_value),
    )
}

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let pup_space = Arc::new(build_space(LanguageBias::pup()));
    let criteria: Vec<(u8, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(c1_solution_count)),
        (2, Box::new(c2_symmetric_fraction)),
        (3, Box::new(c3_subsumers)),
        (4, Box::new(c4_scoring)),
        (5, Box::new(move || c5_sbca_soundness(&pup_space))),
        (6, Box::new(c6_fullsbcs_bounds)),
        (7, Box::new(c7_effectiveness)),
        (8, Box::new(c8_orbits)),
        (9, Box::new(c9_wilcoxon)),
    ];
    let mut failed = Vec::new();
    for (n, check) in criteria {
        let t = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(|| check())).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {n}: {verdict} ({:.1} s) {detail}", t.elapsed().as_secs_f64());
        if !ok {
            failed.push(n);
        }
    }
    println!("acceptance suite took {:.1} s", start.elapsed().as_secs_f64());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
