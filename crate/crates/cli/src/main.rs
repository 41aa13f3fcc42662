// SPDX-License-Identifier: Apache-2.0

//! `relaxmatch`: relaxation advice for bipartite allocation instances.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 invalid input file,
//! 3 an enumeration cap was exceeded.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use relaxmatch_core::datagen::{generate, GeneratorProfile, Multiplicity, Profile};
use relaxmatch_core::experiments::{simulate_compliance, sweep_bound, write_csv, InstanceSource, SweepSpec};
use relaxmatch_core::io::{load_instance, save_instance, IoError, OracleBlock, ResultFile};
use relaxmatch_core::matching::guaranteed_agents;
use relaxmatch_core::model::{Aggregation, Bound, Guarantee, Instance, Shape};
use relaxmatch_core::oracle::{brute_force_optimum, GammaMethod, OracleCaps, OracleError};
use relaxmatch_core::rational::parse_rational;
use relaxmatch_core::solver::{
    solve_allocation, verify_result, Expansion, ExpansionSide, SearchMode, SolverConfig, VerifyOptions,
};

const SEED_ENV: &str = "RELAXMATCH_SEED";

#[derive(Parser, Debug)]
#[command(name = "relaxmatch", version, about = "Relaxation advice for bipartite allocation platforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the advised relaxation for an instance.
    Solve(SolveArgs),
    /// Print the agents guaranteed a match under the compatible pairs alone.
    Gamma {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Exhaustive optimum for a small instance.
    Oracle(OracleArgs),
    /// Matched fraction across a grid of cost bounds.
    Sweep(SweepArgs),
    /// Matched count when only some advised agents comply.
    Simulate(SimulateArgs),
    /// Generate a synthetic instance.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct Problem {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    guarantee: Guarantee,
    #[arg(long)]
    aggregation: Aggregation,
    /// Nonnegative decimal, fraction or `inf`.
    #[arg(long)]
    bound: Bound,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value = "binary")]
    search: SearchMode,
    /// Attach guarantee checks and a brute-force comparison.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 12)]
    subset_cap: usize,
    /// Result file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value_t = 12)]
    max_relaxable: usize,
    #[arg(long, default_value_t = 16)]
    max_vertices: usize,
    /// How Γ is computed: `fast` or `enumeration`.
    #[arg(long, default_value = "fast", value_parser = parse_gamma_method)]
    gamma: GammaMethod,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Instance file; mutually exclusive with --profile.
    #[arg(long, conflicts_with = "profile")]
    instance: Option<PathBuf>,
    /// Generate a fresh instance per replication.
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    resources: Option<usize>,
    #[arg(long, conflicts_with = "max_capacity")]
    max_demand: Option<u32>,
    #[arg(long)]
    max_capacity: Option<u32>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Comma-separated guarantees.
    #[arg(long, value_delimiter = ',', default_value = "snh-sb,snh-wb,wnh-wb")]
    guarantees: Vec<Guarantee>,
    #[arg(long, default_value = "total")]
    aggregation: Aggregation,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "binary")]
    search: SearchMode,
    /// Record solve times in the runtime_ms column.
    #[arg(long)]
    timing: bool,
    /// CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// `lo:hi:step` or a comma-separated list (may include `inf`).
    #[arg(long)]
    bounds: String,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// `lo:hi:step` or a comma-separated list of complying-agent counts.
    #[arg(long)]
    compliance: String,
    /// Bound for the advice itself.
    #[arg(long, default_value = "inf")]
    bound: Bound,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    profile: Profile,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    resources: Option<usize>,
    #[arg(long, conflicts_with = "max_capacity")]
    max_demand: Option<u32>,
    #[arg(long)]
    max_capacity: Option<u32>,
    /// Instance file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    guarantee: Guarantee,
    aggregation: Aggregation,
    bound: &'a Bound,
    oracle: OracleBlock,
}

fn parse_gamma_method(s: &str) -> Result<GammaMethod, String> {
    match s {
        "fast" => Ok(GammaMethod::Fast),
        "enumeration" => Ok(GammaMethod::Enumeration),
        other => Err(format!("unknown method {other:?} (expected fast|enumeration)")),
    }
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Invalid(anyhow::Error),
    Cap(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Invalid(e) | Failure::Cap(e) => e,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    load_instance(path).map_err(|e| match e {
        IoError::Io { .. } => Failure::Usage(e.into()),
        IoError::Parse(_) | IoError::Validation(_) => {
            Failure::Invalid(anyhow::Error::new(e).context(format!("reading {}", path.display())))
        }
    })
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    let mut out = output(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(anyhow::anyhow!("{SEED_ENV}={v:?} is not a 64-bit integer"))),
        Err(_) => Ok(flag),
    }
}

fn multiplicity(max_demand: Option<u32>, max_capacity: Option<u32>) -> Multiplicity {
    match (max_demand, max_capacity) {
        (Some(max), _) => Multiplicity::Demands { max },
        (_, Some(max)) => Multiplicity::Capacities { max },
        _ => Multiplicity::Unit,
    }
}

fn split_range(spec: &str) -> Option<(&str, &str, &str)> {
    let mut parts = spec.split(':');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), Some(c), None) => Some((a, b, c)),
        _ => None,
    }
}

fn parse_bounds(spec: &str) -> anyhow::Result<Vec<Bound>> {
    if let Some((lo, hi, step)) = split_range(spec) {
        let (lo, hi, step) = (parse_rational(lo)?, parse_rational(hi)?, parse_rational(step)?);
        anyhow::ensure!(step > num_zero(), "bound step must be positive");
        let mut out = Vec::new();
        let mut b = lo;
        while b <= hi {
            out.push(Bound::finite(b.clone()).context("bounds must be nonnegative")?);
            b += &step;
        }
        anyhow::ensure!(!out.is_empty(), "bound grid {spec:?} is empty");
        return Ok(out);
    }
    spec.split(',')
        .map(|s| s.parse::<Bound>().map_err(anyhow::Error::msg))
        .collect()
}

fn num_zero() -> relaxmatch_core::rational::Rational {
    relaxmatch_core::rational::Rational::from_integer(0.into())
}

fn parse_counts(spec: &str) -> anyhow::Result<Vec<usize>> {
    if let Some((lo, hi, step)) = split_range(spec) {
        let (lo, hi, step): (usize, usize, usize) = (lo.parse()?, hi.parse()?, step.parse()?);
        anyhow::ensure!(step > 0, "compliance step must be positive");
        return Ok((lo..=hi).step_by(step).collect());
    }
    spec.split(',').map(|s| Ok(s.trim().parse()?)).collect()
}

fn source(args: &SourceArgs) -> Result<InstanceSource, Failure> {
    match (&args.instance, args.profile) {
        (Some(path), _) => Ok(InstanceSource::Fixed(load(path)?)),
        (None, Some(profile)) => {
            let mut p = GeneratorProfile::new(profile, 0);
            p.agents = args.agents;
            p.resources = args.resources;
            p.multiplicity = multiplicity(args.max_demand, args.max_capacity);
            Ok(InstanceSource::Generated(p))
        }
        (None, None) => Err(Failure::Usage(anyhow::anyhow!("give --instance or --profile"))),
    }
}

fn spec_from(grid: &GridArgs) -> Result<SweepSpec, Failure> {
    Ok(SweepSpec {
        guarantees: grid.guarantees.clone(),
        aggregation: grid.aggregation,
        replications: grid.reps,
        seed: seed(grid.seed)?,
        search: grid.search,
        timing: grid.timing,
        ..SweepSpec::default()
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(args) => {
            let p = &args.problem;
            let inst = load(&p.instance)?;
            let cfg = SolverConfig::new(p.guarantee, p.aggregation, p.bound.clone()).with_search(args.search);
            let mut res = solve_allocation(&inst, &cfg).map_err(|e| Failure::Usage(e.into()))?;
            for w in &res.warnings {
                log::warn!("{w}");
            }
            info!(
                "relaxed {} pairs, allocation size {}, k_min {}",
                res.relaxation.len(),
                res.allocation_size,
                res.k_min
            );
            if args.verify {
                let opts = VerifyOptions {
                    subset_cap: args.subset_cap,
                    ..VerifyOptions::default()
                };
                res.guarantee_report = Some(verify_result(&inst, &cfg, &res, &opts));
            }
            emit(args.out.as_deref(), &ResultFile::from_solve(&inst, &cfg, &res).to_json())?;
        }
        Command::Gamma { instance } => {
            let inst = load(&instance)?;
            let names: Vec<&str> = match inst.shape() {
                Shape::OneToOne => guaranteed_agents(&inst.compatible_graph())
                    .iter()
                    .map(|x| inst.agent_id(x).0.as_str())
                    .collect(),
                shape => {
                    let side = if shape == Shape::ManyToOne {
                        ExpansionSide::Agents
                    } else {
                        ExpansionSide::Resources
                    };
                    let e = Expansion::new(&inst, side);
                    let gamma = guaranteed_agents(&e.expanded.compatible_graph());
                    // An agent is guaranteed when all of its units are.
                    (0..inst.agent_count())
                        .filter(|&x| {
                            (0..e.expanded.agent_count())
                                .filter(|&c| e.agent_origin(c) == x)
                                .all(|c| gamma.contains(c))
                        })
                        .map(|x| inst.agent_id(x).0.as_str())
                        .collect()
                }
            };
            let mut text = String::new();
            for n in names {
                text.push_str(n);
                text.push('\n');
            }
            emit(None, &text)?;
        }
        Command::Oracle(args) => {
            let p = &args.problem;
            let inst = load(&p.instance)?;
            let cfg = SolverConfig::new(p.guarantee, p.aggregation, p.bound.clone());
            let caps = OracleCaps {
                max_relaxable: args.max_relaxable,
                max_vertices: args.max_vertices,
                gamma: args.gamma,
            };
            let expanded = match inst.shape() {
                Shape::OneToOne => None,
                Shape::ManyToOne => Some(Expansion::new(&inst, ExpansionSide::Agents).expanded),
                Shape::OneToMany => Some(Expansion::new(&inst, ExpansionSide::Resources).expanded),
            };
            let target = expanded.as_ref().unwrap_or(&inst);
            let verdict = brute_force_optimum(target, &cfg, &caps).map_err(|e| match e {
                OracleError::NotOneToOne(_) => Failure::Usage(e.into()),
                _ => Failure::Cap(e.into()),
            })?;
            let block = OracleBlock::from_verdict(target, &verdict);
            let doc = OracleOutput {
                guarantee: p.guarantee,
                aggregation: p.aggregation,
                bound: &p.bound,
                oracle: block,
            };
            emit(None, &format!("{}\n", serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)?))?;
        }
        Command::Sweep(args) => {
            let src = source(&args.source)?;
            let mut spec = spec_from(&args.grid)?;
            spec.bounds = parse_bounds(&args.bounds)?;
            let rows = sweep_bound(&src, &spec).map_err(|e| Failure::Usage(e.into()))?;
            write_csv(&rows, output(args.grid.out.as_deref())?).map_err(anyhow::Error::from)?;
        }
        Command::Simulate(args) => {
            let src = source(&args.source)?;
            let mut spec = spec_from(&args.grid)?;
            spec.compliance = parse_counts(&args.compliance)?;
            spec.compliance_bound = args.bound.clone();
            let rows = simulate_compliance(&src, &spec).map_err(|e| Failure::Usage(e.into()))?;
            write_csv(&rows, output(args.grid.out.as_deref())?).map_err(anyhow::Error::from)?;
        }
        Command::Gen(args) => {
            let mut p = GeneratorProfile::new(args.profile, seed(args.seed)?);
            p.agents = args.agents;
            p.resources = args.resources;
            p.multiplicity = multiplicity(args.max_demand, args.max_capacity);
            let inst = generate(&p);
            match &args.out {
                Some(path) => save_instance(&inst, path).map_err(|e| Failure::Usage(e.into()))?,
                None => emit(None, &relaxmatch_core::io::instance_to_json(&inst))?,
            }
        }
    }
    Ok(())
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !text.contains(&msg) {
            if !text.is_empty() {
                text.push_str(": ");
            }
            text.push_str(&msg);
        }
    }
    text
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", describe(f.error()));
            ExitCode::from(f.code())
        }
    }
}
