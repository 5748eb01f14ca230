use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hopper_core::annealing::{anneal_restarts, AnnealError, AnnealParams};
use hopper_core::feasibility::check_feasibility;
use hopper_core::insertion::{build_initial, BuildReport, InsertionParams, SeedStrategy, TruckStrategy};
use hopper_core::io::{self, FormatError, PlanSummary, RunDoc, RunSummary};
use hopper_core::model::Instance;
use hopper_core::oracle::{solve_exact, OracleError, OracleLimits, OracleMode};
use hopper_core::par::Execution;
use hopper_core::plan::Plan;
use serde::Deserialize;

const EXIT_VALIDATION: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMITS: u8 = 3;

/// Failure carrying the exit status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn validation(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_VALIDATION, error: error.into() }
    }
    fn infeasible(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_INFEASIBLE, error: error.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self::validation(error)
    }
}

type CliResult = Result<(), Failure>;

#[derive(Parser, Debug)]
#[command(name = "hopperplan", version, about = "Plan feed deliveries with multi-hopper trucks")]
struct Cli {
    /// JSON file with default insertion, annealing and exact-search settings.
    #[arg(long, global = true, env = "HOPPERPLAN_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a plan by insertion, then improve it by annealing.
    Plan {
        instance: PathBuf,
        #[command(flatten)]
        construct: ConstructArgs,
        #[command(flatten)]
        anneal: AnnealArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Construct a plan by insertion only.
    Construct {
        instance: PathBuf,
        #[command(flatten)]
        construct: ConstructArgs,
        /// Plan file to write; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Improve an existing feasible plan by annealing.
    Improve {
        instance: PathBuf,
        plan: PathBuf,
        #[command(flatten)]
        anneal: AnnealArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve a small single-day instance exactly.
    Exact {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ExactMode::MinDistance)]
        mode: ExactMode,
        #[arg(long)]
        max_customers: Option<usize>,
        #[arg(long)]
        max_trucks: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a plan against an instance and list every violation.
    Check { instance: PathBuf, plan: PathBuf },
    /// Write the sampled trace of a run file as delimited text.
    TraceExport {
        run: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = ',')]
        separator: char,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExactMode {
    MinDistance,
    Lexicographic,
}

#[derive(Args, Debug, Default)]
struct ConstructArgs {
    #[arg(long)]
    seed_strategy: Option<SeedStrategy>,
    #[arg(long)]
    truck_strategy: Option<TruckStrategy>,
    /// Seed for the random construction strategies.
    #[arg(long)]
    construct_seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
struct AnnealArgs {
    /// Seed of the first annealing run; restarts use the following seeds.
    #[arg(long)]
    anneal_seed: Option<u64>,
    #[arg(long)]
    iterations: Option<u64>,
    /// Wall-clock limit per annealing run, seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    initial_temp: Option<f64>,
    #[arg(long)]
    cooling: Option<f64>,
    /// Independent annealing runs; the best one is kept.
    #[arg(long)]
    restarts: Option<usize>,
    /// Run restarts one after another on this thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug, Default)]
struct OutArgs {
    /// Plan file to write; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Run file (parameters, summary, trace) to write.
    #[arg(long)]
    run_out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    insertion: InsertionParams,
    anneal: AnnealParams,
    restarts: usize,
    oracle: OracleLimits,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            insertion: InsertionParams::default(),
            anneal: AnnealParams::default(),
            restarts: 1,
            oracle: OracleLimits::default(),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Failure::validation(anyhow!("config {}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading instance {}", path.display()))?;
    io::parse_instance(&text).map_err(|e| format_failure(path, e))
}

fn read_plan(path: &Path) -> Result<Plan, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
    io::parse_plan(&text).map(|d| d.plan()).map_err(|e| format_failure(path, e))
}

fn format_failure(path: &Path, e: FormatError) -> Failure {
    Failure::validation(anyhow!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => match std::io::stdout().lock().write_all(contents.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn insertion_params(cfg: &Config, args: &ConstructArgs) -> InsertionParams {
    let mut p = cfg.insertion;
    if let Some(s) = args.seed_strategy {
        p.seed_strategy = s;
    }
    if let Some(t) = args.truck_strategy {
        p.truck_strategy = t;
    }
    if let Some(seed) = args.construct_seed {
        p.rng_seed = seed;
    }
    p
}

fn anneal_params(cfg: &Config, args: &AnnealArgs) -> AnnealParams {
    let mut p = cfg.anneal.clone();
    if let Some(seed) = args.anneal_seed {
        p.rng_seed = seed;
    }
    if let Some(n) = args.iterations {
        p.max_iterations = n;
    }
    if let Some(t) = args.time_limit {
        p.max_wall_time_secs = t;
    }
    if args.initial_temp.is_some() {
        p.initial_temp = args.initial_temp;
    }
    if let Some(c) = args.cooling {
        p.cooling_factor = c;
    }
    p
}

fn print_summary(label: &str, plan: &Plan, inst: &Instance) {
    let s = PlanSummary::of(plan, inst);
    eprintln!(
        "{label}: {} days, {} journeys, {} stops, {:.3} km, {:.3} of {:.3} t delivered, optimized cost {:.2} EUR",
        s.days, s.journeys, s.stops, s.distance_km, s.objective.delivered, s.total_ordered, s.cost.total_optimized
    );
}

fn report_build(report: &BuildReport) {
    for o in &report.unserved {
        eprintln!("unserved: order {} ({:.3} t left)", o.order, o.remaining);
    }
    for o in &report.unservable {
        eprintln!("unservable: order {} cannot be reached within any truck's daily budget", o);
    }
    for o in &report.late {
        eprintln!("late: order {} delivered after its deadline", o);
    }
}

fn construct(inst: &Instance, params: &InsertionParams) -> (Plan, BuildReport) {
    eprintln!(
        "construct: seed strategy {}, truck strategy {}, construct seed {}",
        params.seed_strategy, params.truck_strategy, params.rng_seed
    );
    let (plan, report) = build_initial(inst, params);
    print_summary("constructed", &plan, inst);
    report_build(&report);
    (plan, report)
}

fn improve(
    inst: &Instance,
    initial: &Plan,
    params: &AnnealParams,
    restarts: usize,
    exec: Execution,
    insertion: Option<(InsertionParams, BuildReport)>,
    out: &OutArgs,
) -> CliResult {
    let seeds: Vec<u64> = (0..restarts.max(1) as u64).map(|k| params.rng_seed.wrapping_add(k)).collect();
    eprintln!("anneal: seeds {:?}, {} iterations each", seeds, params.max_iterations);
    let (seed, outcome) = anneal_restarts(initial, inst, params, &seeds, exec).map_err(|e| match e {
        AnnealError::InfeasibleInitial(v) => {
            for x in &v {
                eprintln!("violation: {x}");
            }
            Failure::infeasible(anyhow!("initial plan is infeasible ({} violations)", v.len()))
        }
        other => Failure::validation(other),
    })?;
    print_summary("improved", &outcome.best, inst);
    eprintln!(
        "best run seed {seed}: {} iterations, improvement {:.2}%, stop: {:?}",
        outcome.iterations,
        outcome.improvement_pct(),
        outcome.stop
    );
    emit(out.out.as_deref(), &io::plan_to_json(&outcome.best, inst))?;
    if let Some(run_path) = &out.run_out {
        let (insertion, build) = insertion.map_or((None, None), |(p, r)| (Some(p), Some(r)));
        let run = RunDoc {
            format_version: io::FORMAT_VERSION,
            instance: inst.name().to_string(),
            insertion,
            build,
            anneal: AnnealParams { rng_seed: seed, ..params.clone() },
            summary: RunSummary::of(&outcome),
            trace: outcome.trace.clone(),
            plan_file: out.out.as_ref().map(|p| p.display().to_string()),
        };
        write_atomic(run_path, &io::run_to_json(&run))?;
    }
    Ok(())
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn run(cli: Cli) -> CliResult {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Plan { instance, construct: c, anneal: a, out } => {
            let inst = read_instance(&instance)?;
            let ip = insertion_params(&cfg, &c);
            let (plan, report) = construct(&inst, &ip);
            if !report.is_complete() {
                emit(out.out.as_deref(), &io::plan_to_json(&plan, &inst))?;
                return Err(Failure::infeasible(anyhow!(
                    "construction could not deliver every order on time; annealing skipped"
                )));
            }
            let ap = anneal_params(&cfg, &a);
            improve(&inst, &plan, &ap, a.restarts.unwrap_or(cfg.restarts), execution(a.sequential), Some((ip, report)), &out)
        }
        Command::Construct { instance, construct: c, out } => {
            let inst = read_instance(&instance)?;
            let (plan, report) = construct(&inst, &insertion_params(&cfg, &c));
            emit(out.as_deref(), &io::plan_to_json(&plan, &inst))?;
            if report.is_complete() {
                Ok(())
            } else {
                Err(Failure::infeasible(anyhow!("construction could not deliver every order on time")))
            }
        }
        Command::Improve { instance, plan, anneal: a, out } => {
            let inst = read_instance(&instance)?;
            let initial = read_plan(&plan)?;
            let ap = anneal_params(&cfg, &a);
            improve(&inst, &initial, &ap, a.restarts.unwrap_or(cfg.restarts), execution(a.sequential), None, &out)
        }
        Command::Exact { instance, mode, max_customers, max_trucks, out } => {
            let inst = read_instance(&instance)?;
            let mut limits = cfg.oracle;
            if let Some(n) = max_customers {
                limits.max_customers = n;
            }
            if let Some(n) = max_trucks {
                limits.max_trucks = n;
            }
            let mode = match mode {
                ExactMode::MinDistance => OracleMode::MinDistance,
                ExactMode::Lexicographic => OracleMode::Lexicographic,
            };
            let sol = solve_exact(&inst, &limits, mode).map_err(|e| match e {
                OracleError::NoFeasiblePlan => Failure::infeasible(e),
                _ => Failure { code: EXIT_LIMITS, error: e.into() },
            })?;
            print_summary("exact", &sol.plan, &inst);
            eprintln!("optimum {:.6} over {} partitions", sol.value, sol.partitions);
            emit(out.as_deref(), &io::plan_to_json(&sol.plan, &inst))?;
            Ok(())
        }
        Command::Check { instance, plan } => {
            let inst = read_instance(&instance)?;
            let plan = read_plan(&plan)?;
            let violations = check_feasibility(&plan, &inst).map_err(Failure::validation)?;
            print_summary("plan", &plan, &inst);
            for v in &violations {
                println!("{v}");
            }
            if violations.is_empty() {
                println!("feasible");
                Ok(())
            } else {
                Err(Failure::infeasible(anyhow!("{} violations", violations.len())))
            }
        }
        Command::TraceExport { run, out, separator } => {
            let text = fs::read_to_string(&run).with_context(|| format!("reading run {}", run.display()))?;
            let doc = io::parse_run(&text).map_err(|e| format_failure(&run, e))?;
            emit(out.as_deref(), &doc.trace.to_delimited(separator))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
