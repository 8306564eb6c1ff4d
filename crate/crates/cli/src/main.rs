//! `pokerrt` command-line front end.
//!
//! Machine-readable output goes to stdout, diagnostics to stderr. Exit codes:
//! 0 on success, 1 when planning fails, 2 on usage or configuration errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pokerrt::baselines::{check_pick_and_place, GraspSpec, PushAction};
use pokerrt::bench::{
    mix_seed, records_to_jsonl, run_benchmark, run_trial_traced, BenchSummary, Execution,
    NoiseModel, PlannerChoice, DEFAULT_TRIALS,
};
use pokerrt::dynamics::PokeAction;
use pokerrt::planner::{Plan, PlanStats, Planner, PlannerConfig, Primitive, DEFAULT_MAX_TIME};
use pokerrt::render::{render_svg, RenderStyle};
use pokerrt::scenarios::{
    builtin_description, builtin_scenario, parse_scenario, serialize_scenario, BUILTIN_IDS,
};
use pokerrt::Scenario;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "pokerrt", version, about = "Kinodynamic poke planning for planar objects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect the built-in scenarios or scenario files.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Plan once and print the plan as JSON.
    Plan(PlanArgs),
    /// Run seeded noisy-execution trials and print a summary.
    Bench(BenchArgs),
    /// Draw a scenario, optionally with a search tree, plan and executed trace.
    Render(RenderArgs),
}

#[derive(Subcommand, Debug)]
enum ScenarioCommand {
    /// Print the built-in scenario ids with a short description.
    List,
    /// Print a human-readable summary of a scenario.
    Show(ScenarioArg),
    /// Write a scenario document to stdout or --out.
    Export {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ScenarioArg {
    /// Built-in id (S1..S6) or path to a scenario document.
    #[arg(long)]
    scenario: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PlannerArg {
    Poke,
    Push,
    #[value(name = "pick_place")]
    PickPlace,
}

impl From<PlannerArg> for PlannerChoice {
    fn from(p: PlannerArg) -> Self {
        match p {
            PlannerArg::Poke => PlannerChoice::Poke,
            PlannerArg::Push => PlannerChoice::Push,
            PlannerArg::PickPlace => PlannerChoice::PickPlace,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct PlannerArgs {
    #[arg(long, default_value = "poke")]
    planner: PlannerArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Planning budget per call, seconds.
    #[arg(long, default_value_t = DEFAULT_MAX_TIME)]
    timeout: f64,
    /// Deterministic iteration budget; replaces the wall-clock budget.
    #[arg(long)]
    iterations: Option<u64>,
}

impl PlannerArgs {
    fn config(&self, seed: u64) -> Result<PlannerConfig, String> {
        let cfg = PlannerConfig {
            max_time: self.timeout,
            max_iterations: self.iterations,
            rng_seed: seed,
            ..PlannerConfig::default()
        };
        cfg.validate().map_err(|e| format!("invalid_config: {e}"))?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct NoiseArgs {
    /// Standard deviation of the multiplicative speed error.
    #[arg(long)]
    noise_v: Option<f64>,
    /// Standard deviation of the strike direction error, radians.
    #[arg(long)]
    noise_dir: Option<f64>,
}

impl NoiseArgs {
    fn model(&self) -> Result<NoiseModel, String> {
        let mut noise = NoiseModel::default();
        if let Some(v) = self.noise_v {
            noise.sigma_v = v;
        }
        if let Some(d) = self.noise_dir {
            noise.sigma_dir = d;
        }
        if !noise.is_valid() || !noise.sigma_v.is_finite() || !noise.sigma_dir.is_finite() {
            return Err("invalid_config: noise standard deviations must be finite and non-negative".into());
        }
        Ok(noise)
    }
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[command(flatten)]
    planner: PlannerArgs,
    /// Write the plan here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[command(flatten)]
    planner: PlannerArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Write per-trial records here, one JSON object per line.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trials; 1 runs them sequentially.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct StyleArgs {
    #[arg(long)]
    obstacle_fill: Option<String>,
    #[arg(long)]
    object_fill: Option<String>,
    #[arg(long)]
    tree_stroke: Option<String>,
    #[arg(long)]
    path_stroke: Option<String>,
    #[arg(long)]
    goal_fill: Option<String>,
    /// Comma-separated fills, one per robot.
    #[arg(long, value_delimiter = ',')]
    reach_fills: Option<Vec<String>>,
    #[arg(long)]
    pixels_per_meter: Option<f64>,
}

impl StyleArgs {
    fn style(&self) -> Result<RenderStyle, String> {
        let mut style = RenderStyle::default();
        let set = |slot: &mut String, v: &Option<String>| {
            if let Some(v) = v {
                *slot = v.clone();
            }
        };
        set(&mut style.obstacle_fill, &self.obstacle_fill);
        set(&mut style.object_fill, &self.object_fill);
        set(&mut style.tree_stroke, &self.tree_stroke);
        set(&mut style.execution_path_stroke, &self.path_stroke);
        set(&mut style.goal_fill, &self.goal_fill);
        if let Some(f) = &self.reach_fills {
            style.reachable_region_fills = f.clone();
        }
        if let Some(s) = self.pixels_per_meter {
            if !(s.is_finite() && s > 0.0) {
                return Err("invalid_config: --pixels-per-meter must be positive".into());
            }
            style.pixels_per_meter = s;
        }
        Ok(style)
    }
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Plan first and draw the search tree and plan path.
    #[arg(long)]
    with_plan: bool,
    /// Also run one noisy execution and draw the executed trace.
    #[arg(long)]
    execute: bool,
    #[command(flatten)]
    planner: PlannerArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    style: StyleArgs,
    /// SVG destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed command: exit code plus a one-line reason for stderr.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        usage(message)
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn load_scenario(arg: &str) -> Result<Scenario, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("unreadable_file: {arg}: {e}")))?;
        return parse_scenario(&text).map_err(|e| usage(format!("{arg}: {e}")));
    }
    builtin_scenario(arg).map_err(|e| usage(e.to_string()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("unwritable_file: {}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| usage(format!("stdout: {e}")))
        }
    }
}

fn scenario_cmd(cmd: ScenarioCommand) -> CmdResult {
    match cmd {
        ScenarioCommand::List => {
            let mut text = String::new();
            for id in BUILTIN_IDS {
                text.push_str(&format!("{id}\t{}\n", builtin_description(id).unwrap_or("")));
            }
            write_output(None, &text)?;
        }
        ScenarioCommand::Show(arg) => {
            let s = load_scenario(&arg.scenario)?;
            write_output(None, &format!("{s}\n"))?;
        }
        ScenarioCommand::Export { scenario, out } => {
            let s = load_scenario(&scenario.scenario)?;
            write_output(out.as_deref(), &serialize_scenario(&s))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PlanReport<'a, A> {
    scenario_id: &'a str,
    planner: PlannerChoice,
    seed: u64,
    success: bool,
    failure_reason: Option<String>,
    stats: Option<PlanStats>,
    plan: Option<&'a Plan<A>>,
}

fn run_planner<A: Primitive>(
    scenario: &Scenario,
    choice: PlannerChoice,
    args: &PlanArgs,
) -> CmdResult {
    let cfg = args.planner.config(args.planner.seed)?;
    let mut planner = Planner::<A>::new(scenario, cfg);
    let result = planner.plan();
    let stats = planner.stats();
    eprintln!(
        "{} iterations, {} nodes, {:.3} s",
        stats.iterations, stats.nodes, stats.planning_time
    );
    let report = PlanReport {
        scenario_id: scenario.id(),
        planner: choice,
        seed: args.planner.seed,
        success: result.is_ok(),
        failure_reason: result.as_ref().err().map(ToString::to_string),
        stats: Some(stats),
        plan: result.as_ref().ok(),
    };
    emit_plan_report(&report, args.out.as_deref())?;
    if let Err(e) = result {
        eprintln!("planning failed: {e}");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn emit_plan_report<A: Serialize>(report: &PlanReport<'_, A>, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).expect("plan reports always serialize");
    text.push('\n');
    write_output(out, &text)
}

fn plan_cmd(args: PlanArgs) -> CmdResult {
    let scenario = load_scenario(&args.scenario.scenario)?;
    let choice = PlannerChoice::from(args.planner.planner);
    match choice {
        PlannerChoice::Poke => run_planner::<PokeAction>(&scenario, choice, &args),
        PlannerChoice::Push => run_planner::<PushAction>(&scenario, choice, &args),
        PlannerChoice::PickPlace => {
            args.planner.config(args.planner.seed)?;
            let result = check_pick_and_place(&scenario, &GraspSpec::default());
            let report = PlanReport::<PokeAction> {
                scenario_id: scenario.id(),
                planner: choice,
                seed: args.planner.seed,
                success: result.is_ok(),
                failure_reason: result.err().map(|e| e.to_string()),
                stats: None,
                plan: None,
            };
            emit_plan_report(&report, args.out.as_deref())?;
            match result {
                Ok(()) => Ok(ExitCode::SUCCESS),
                Err(e) => {
                    eprintln!("pick-and-place infeasible: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn summary_csv(summary: &BenchSummary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    w.write_record([
        "scenario_id",
        "planner",
        "n_trials",
        "successes",
        "success_rate",
        "task_time_mean",
        "task_time_std",
        "task_time_median",
        "planning_time_mean",
        "total_replans",
        "timeout",
        "fell_off_surface",
        "max_replans_exceeded",
        "invalid_start",
    ])
    .and_then(|()| {
        w.write_record([
            summary.scenario_id.clone(),
            summary.planner.to_string(),
            summary.n_trials.to_string(),
            summary.successes.to_string(),
            summary.success_rate.to_string(),
            opt(summary.task_time_mean),
            opt(summary.task_time_std),
            opt(summary.task_time_median),
            summary.planning_time_mean.to_string(),
            summary.total_replans.to_string(),
            summary.failures.timeout.to_string(),
            summary.failures.fell_off_surface.to_string(),
            summary.failures.max_replans_exceeded.to_string(),
            summary.failures.invalid_start.to_string(),
        ])
    })
    .expect("writing to memory cannot fail");
    String::from_utf8(w.into_inner().expect("writing to memory cannot fail")).expect("csv output is utf-8")
}

fn bench_cmd(args: BenchArgs) -> CmdResult {
    let scenario = load_scenario(&args.scenario.scenario)?;
    let cfg = args.planner.config(0)?;
    let noise = args.noise.model()?;
    if args.jobs == 0 {
        return Err(usage("invalid_config: --jobs must be at least 1"));
    }
    let choice = PlannerChoice::from(args.planner.planner);
    let started = Instant::now();
    let report = if args.jobs == 1 {
        run_benchmark(&scenario, choice, &cfg, &noise, args.trials, args.planner.seed, Execution::Sequential)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
        pool.install(|| {
            run_benchmark(&scenario, choice, &cfg, &noise, args.trials, args.planner.seed, Execution::Parallel)
        })
    };
    eprintln!(
        "{} trials of {} on {} in {:.1} s",
        args.trials,
        choice,
        scenario.id(),
        started.elapsed().as_secs_f64()
    );
    if let Some(out) = &args.out {
        write_output(Some(out), &records_to_jsonl(&report.records))?;
    }
    let text = match args.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&report.summary).expect("summaries always serialize");
            t.push('\n');
            t
        }
        Format::Csv => summary_csv(&report.summary),
    };
    write_output(None, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn render_planned<A: Primitive>(
    scenario: &Scenario,
    choice: PlannerChoice,
    args: &RenderArgs,
    style: &RenderStyle,
) -> CmdResult {
    // The trial's initial plan uses the same derived seed, so the drawn plan
    // is the one the executed trace starts from.
    let cfg = args.planner.config(mix_seed(args.planner.seed, 0))?;
    let noise = args.noise.model()?;
    let mut planner = Planner::<A>::new(scenario, cfg.clone());
    let result = planner.plan();
    let trace = if args.execute && result.is_ok() {
        let (record, trace) = run_trial_traced(scenario, choice, &cfg, &noise, args.planner.seed);
        eprintln!(
            "execution: success={} pokes={} replans={}",
            record.success, record.num_pokes, record.num_replans
        );
        Some(trace.poses)
    } else {
        None
    };
    let svg = render_svg(scenario, Some(planner.tree()), result.as_ref().ok(), trace.as_deref(), style);
    write_output(args.out.as_deref(), &svg)?;
    match result {
        Ok(_) => Ok(ExitCode::SUCCESS),
        Err(e) => {
            eprintln!("planning failed: {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn render_cmd(args: RenderArgs) -> CmdResult {
    let scenario = load_scenario(&args.scenario.scenario)?;
    let style = args.style.style()?;
    let choice = PlannerChoice::from(args.planner.planner);
    if !(args.with_plan || args.execute) {
        let svg = render_svg::<PokeAction>(&scenario, None, None, None, &style);
        write_output(args.out.as_deref(), &svg)?;
        return Ok(ExitCode::SUCCESS);
    }
    match choice {
        PlannerChoice::Poke => render_planned::<PokeAction>(&scenario, choice, &args, &style),
        PlannerChoice::Push => render_planned::<PushAction>(&scenario, choice, &args, &style),
        PlannerChoice::PickPlace => Err(usage("invalid_config: pick_place has no tree or plan to render")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Scenario(cmd) => scenario_cmd(cmd),
        Command::Plan(args) => plan_cmd(args),
        Command::Bench(args) => bench_cmd(args),
        Command::Render(args) => render_cmd(args),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
