use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pupsbc::examples::{gen_positive, parse_examples, write_examples, CdpiExample};
use pupsbc::ground::ground_all;
use pupsbc::hypothesis::{build_space, Constraint, LanguageBias, Scheme};
use pupsbc::learner::{cdilp, flag_slow_enumerations, write_hypothesis, CdilpConfig, LearnerState};
use pupsbc::pipeline::{
    cmd_benchmark, cmd_pipeline, parse_hypothesis, read_csv, summarize, write_atomic, write_csv, RunConfig,
    Strategy, TrainingInstance,
};
use pupsbc::solver::{enumerate, for_each_solution, solve, SearchConfig};
use pupsbc::symmetry::{detect_generators, graph_group_order, partition_orbits, write_generators, AtomOrder};
use pupsbc::{instance_from_spec, PupInstance};

/// Learns symmetry-breaking constraints for the Partner Unit Problem and
/// benchmarks them.
#[derive(Parser)]
#[command(name = "pupsbc", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for example generation and the solver's value order.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver timeout; defaults to the config's solve_timeout_ms.
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
    /// Output directory; without it results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run configuration (key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Writes an instance as facts, e.g. `double-8` or `un-triple-9`.
    GenInstance { spec: String },
    /// Finds one solution.
    Solve {
        instance: String,
        /// Learned constraints to add.
        #[arg(long)]
        abk: Option<PathBuf>,
    },
    /// Counts (and optionally prints) solutions.
    Enumerate {
        instance: String,
        #[arg(long)]
        abk: Option<PathBuf>,
        #[arg(long)]
        limit: Option<u64>,
        /// Print every solution as facts.
        #[arg(long)]
        print: bool,
    },
    /// Writes the symmetry generators of an instance.
    DetectSym {
        instance: String,
        /// Also partition all solutions into orbits (small instances only).
        #[arg(long)]
        orbits: bool,
    },
    /// Generates training examples for an instance.
    GenExamples {
        instance: String,
        /// `enum` or `fullsbcs`; defaults to the config's strategy.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        max_cell_size: Option<usize>,
    },
    /// Learns constraints from example files.
    Learn {
        #[arg(required = true)]
        examples: Vec<PathBuf>,
        /// Generalization instances whose satisfiability must be kept.
        #[arg(long = "gen", value_delimiter = ',')]
        gen: Vec<String>,
        #[arg(long)]
        scheme: Option<Scheme>,
    },
    /// Runs the full pipeline described by --config.
    Pipeline,
    /// Benchmarks instances with and without learned constraints.
    Benchmark {
        #[arg(required = true)]
        instances: Vec<String>,
        #[arg(long)]
        abk: Option<PathBuf>,
        /// Solver seeds, e.g. `1..=5`; defaults to --seed or the config.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Summarizes a benchmark CSV, including the Wilcoxon test.
    Stats { csv: PathBuf },
}

/// A spec such as `double-8`, or a path to an instance fact file.
fn load_instance(arg: &str) -> Result<Arc<PupInstance>> {
    let path = Path::new(arg);
    let inst = if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
        PupInstance::parse_facts(&text, name)?
    } else {
        instance_from_spec(arg)?
    };
    Ok(Arc::new(inst))
}

fn load_abk(path: &Option<PathBuf>) -> Result<Option<Vec<Constraint>>> {
    path.as_ref()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_hypothesis(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .transpose()
}

struct Ctx {
    global: Global,
    config: RunConfig,
}

impl Ctx {
    fn timeout_ms(&self) -> u64 {
        self.global.timeout_ms.unwrap_or(self.config.solve_timeout_ms)
    }

    fn search_config(&self) -> SearchConfig {
        let cfg = SearchConfig::default().with_timeout_ms(self.timeout_ms());
        match self.global.seed {
            Some(seed) => cfg.randomized(seed),
            None => cfg,
        }
    }

    /// Writes `contents` to `out/name`, or to stdout without --out.
    fn emit(&self, name: &str, contents: &[u8]) -> Result<()> {
        match &self.global.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                write_atomic(&dir.join(name), contents)?;
            }
            None => std::io::stdout().write_all(contents)?,
        }
        Ok(())
    }
}

fn seed_list(text: &str) -> Result<Vec<u64>> {
    Ok(RunConfig::parse(&format!("seeds = {text}"))?.seeds)
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.global.config {
        Some(path) => RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => RunConfig::default(),
    };
    let ctx = Ctx {
        global: cli.global,
        config,
    };
    match cli.command {
        Command::GenInstance { spec } => {
            let inst = instance_from_spec(&spec)?;
            ctx.emit(&format!("{}.lp", inst.name()), inst.to_facts().as_bytes())?;
        }
        Command::Solve { instance, abk } => {
            let inst = load_instance(&instance)?;
            let ground = match load_abk(&abk)? {
                Some(rules) => ground_all(&rules, &inst)?,
                None => Vec::new(),
            };
            let res = solve(&inst, &ground, &ctx.search_config());
            if let Some(sol) = &res.solution {
                ctx.emit(&format!("{}.solution.lp", inst.name()), sol.to_facts().as_bytes())?;
            }
            let verdict = match res.verdict() {
                Some(true) => "sat",
                Some(false) => "unsat",
                None => "timeout",
            };
            println!(
                "{}",
                json!({"instance": inst.name(), "verdict": verdict, "stats": res.stats})
            );
        }
        Command::Enumerate {
            instance,
            abk,
            limit,
            print,
        } => {
            let inst = load_instance(&instance)?;
            let ground = match load_abk(&abk)? {
                Some(rules) => ground_all(&rules, &inst)?,
                None => Vec::new(),
            };
            let mut cfg = ctx.search_config();
            cfg.limit = limit;
            cfg.validate()?;
            let stats = for_each_solution(&inst, &ground, &cfg, |s| {
                if print {
                    println!("{}", s.to_facts());
                }
                std::ops::ControlFlow::Continue(())
            });
            println!(
                "{}",
                json!({
                    "instance": inst.name(),
                    "solutions": stats.solutions,
                    "truncated": stats.truncated(),
                    "stats": stats,
                })
            );
        }
        Command::DetectSym { instance, orbits } => {
            let inst = load_instance(&instance)?;
            let gens = detect_generators(&inst);
            ctx.emit(&format!("{}.sym", inst.name()), write_generators(&gens).as_bytes())?;
            if orbits {
                let all = enumerate(&inst, &[], &ctx.search_config());
                if all.truncated() {
                    bail!("enumeration of {} did not finish within the timeout", inst.name());
                }
                let ord = AtomOrder::new(&inst, &gens);
                let p = partition_orbits(&inst, &all.solutions, &gens, &ord)?;
                eprintln!(
                    "{}",
                    json!({
                        "instance": inst.name(),
                        "generators": gens.len(),
                        "graph_group_order": graph_group_order(&inst, &gens),
                        "unit_group": "Sym(U)",
                        "partition": p,
                        "dominated_fraction": p.dominated_fraction(),
                    })
                );
            }
        }
        Command::GenExamples {
            instance,
            strategy,
            n,
            cells,
            max_cell_size,
        } => {
            let inst = load_instance(&instance)?;
            let strategy = match strategy.as_deref() {
                None => ctx.config.strategy,
                Some("enum") => Strategy::ScalableEnum { n: n.unwrap_or(50) },
                Some("fullsbcs") => Strategy::ScalableFullsbcs {
                    cells: cells.unwrap_or(20),
                    max_cell_size: max_cell_size.unwrap_or(5),
                },
                Some(other) => bail!("unknown strategy `{other}`; use enum or fullsbcs"),
            };
            let mut check = ctx.config.clone();
            check.strategy = strategy;
            check.validate()?;
            let training = TrainingInstance::new(inst.clone());
            let examples = training.examples(strategy, ctx.global.seed.unwrap_or(0));
            log::info!("{} examples from {strategy}", examples.len());
            ctx.emit(&format!("{}.las", inst.name()), write_examples(&examples).as_bytes())?;
        }
        Command::Learn { examples, gen, scheme } => {
            let mut all: Vec<CdpiExample> = Vec::new();
            for path in &examples {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                all.extend(parse_examples(&text).with_context(|| format!("parsing {}", path.display()))?);
            }
            let gen_examples: Vec<CdpiExample> = gen
                .iter()
                .map(|s| load_instance(s).map(|i| gen_positive(&i)))
                .collect::<Result<_>>()?;
            let sbca_ids: BTreeSet<String> = flag_slow_enumerations(&gen_examples, ctx.config.sbca_threshold_ms);
            all.extend(gen_examples);
            let space = Arc::new(build_space(LanguageBias::pup()));
            let mut state = LearnerState::new(space, all, scheme.unwrap_or(ctx.config.scheme))?;
            state.sbca_example_ids = sbca_ids;
            let cfg = CdilpConfig {
                budget_ms: ctx.config.learn_timeout_ms,
                coverage_timeout_ms: ctx.global.timeout_ms.unwrap_or(ctx.config.coverage_timeout_ms),
                ..CdilpConfig::default()
            };
            let out = cdilp(&mut state, &cfg)?;
            ctx.emit("constraints.lp", write_hypothesis(&out.rules).as_bytes())?;
            let report = serde_json::to_string_pretty(&out.report)?;
            match &ctx.global.out {
                Some(dir) => write_atomic(&dir.join("report.json"), report.as_bytes())?,
                None => eprintln!("{report}"),
            }
        }
        Command::Pipeline => {
            if ctx.global.config.is_none() {
                bail!("pipeline needs --config FILE");
            }
            let mut cfg = ctx.config.clone();
            if let Some(ms) = ctx.global.timeout_ms {
                cfg.solve_timeout_ms = ms;
            }
            let out = ctx.global.out.clone().unwrap_or_else(|| PathBuf::from("pipeline-out"));
            let summary = cmd_pipeline(&cfg, &out)?;
            for s in &summary.seeds {
                println!(
                    "{}",
                    json!({
                        "seed": s.seed,
                        "status": s.status,
                        "learn_status": s.learn.as_ref().map(|l| l.status),
                        "hypothesis": s.learn.as_ref().map(|l| &l.hypothesis),
                    })
                );
            }
        }
        Command::Benchmark { instances, abk, seeds } => {
            let insts: Vec<Arc<PupInstance>> = instances.iter().map(|s| load_instance(s)).collect::<Result<_>>()?;
            let abk = load_abk(&abk)?;
            let seeds = match (seeds, ctx.global.seed) {
                (Some(text), _) => seed_list(&text)?,
                (None, Some(seed)) => vec![seed],
                (None, None) => ctx.config.bench_seeds.clone(),
            };
            let rows = cmd_benchmark(&insts, abk.as_deref(), &seeds, ctx.timeout_ms())?;
            let mut csv = Vec::new();
            write_csv(&rows, &mut csv)?;
            ctx.emit("bench.csv", &csv)?;
        }
        Command::Stats { csv } => {
            let file = fs::File::open(&csv).with_context(|| format!("reading {}", csv.display()))?;
            let rows = read_csv(file)?;
            println!("{}", serde_json::to_string_pretty(&summarize(&rows))?);
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
