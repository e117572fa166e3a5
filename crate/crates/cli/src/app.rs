//! Subcommands and exit codes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tampic::baseline::{solve_single_tasking, Setting};
use tampic::compat::{check_assignment_feasibility, Incompatibility, Verdict};
use tampic::compile::{compile, decode, CompileOptions, EncodingMode, HardWeightMode};
use tampic::gen::{generate, GenConfig};
use tampic::greedy::solve_greedy;
use tampic::ground::{ground_instance, CapId, CirId, GroundError, GroundOptions, GroundWorld};
use tampic::maxsat::{evaluate, read_model, write_wcnf, Budget};
use tampic::model::{
    apply_delta, instance_from_json, parse_atom, parse_instance, serialize_instance, Instance,
};
use tampic::oracle::{solve_oracle, OracleOptions, DEFAULT_MAX_CAPS};
use tampic::stamr::{solve_stamr, StamrResult, Status};

use crate::bench::{parse_values, run_bench, sidecar, BenchConfig, Method, Param};
use crate::plot::plot_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCOMPATIBLE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

pub const ENV_WORKERS: &str = "TAMPIC_WORKERS";
pub const ENV_MAX_NODES: &str = "TAMPIC_MAX_NODES";

#[derive(Debug, Parser)]
#[command(
    name = "tampic",
    version,
    about = "Multi-robot task allocation under physical constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile an instance to DIMACS WCNF plus a variable map.
    Compile {
        instance: PathBuf,
        /// WCNF output file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Variable map file (default: OUTPUT with `.map` appended).
        #[arg(long)]
        map: Option<PathBuf>,
        #[command(flatten)]
        encoding: EncodingArgs,
    },
    /// Optimal allocation.
    Solve {
        instance: PathBuf,
        /// Decode an external solver's model instead of solving.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        encoding: EncodingArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Greedy allocation, highest utility first.
    Greedy {
        instance: PathBuf,
        /// Write the per-task trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        encoding: EncodingArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Optimal single-tasking allocation.
    Baseline {
        instance: PathBuf,
        /// 1: all tasks; 2: only tasks requiring nothing but capabilities.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        setting: u8,
        #[command(flatten)]
        encoding: EncodingArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Exhaustive search over activation sets.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_CAPS)]
        max_caps: usize,
        /// Evaluate all 2^k sets instead of pruning incompatible supersets.
        #[arg(long)]
        full_scan: bool,
        /// Stop as soon as every task is fulfilled.
        #[arg(long)]
        stop_at_total: bool,
    },
    /// Check an assignment file (ACTIVATED: and CLAIMED: lines).
    Check {
        instance: PathBuf,
        assignment: PathBuf,
    },
    /// Generate a random instance.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the resolved generator configuration as JSON.
        #[arg(long)]
        emit_config: Option<PathBuf>,
    },
    /// Print the ground world.
    DumpGround { instance: PathBuf },
    /// Run a parameter sweep and write a CSV.
    Bench(BenchArgs),
    /// Chart a bench CSV as SVG files.
    Plot {
        csv: PathBuf,
        /// Output prefix (default: the CSV path without extension).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EncodingArg {
    Plain,
    Acyclic,
}

#[derive(Debug, Args)]
struct EncodingArgs {
    /// Clause encoding (default: acyclic).
    #[arg(long, value_enum)]
    encoding: Option<EncodingArg>,
    /// Same as `--encoding acyclic`.
    #[arg(long, conflicts_with = "encoding")]
    acyclic: bool,
    /// Make hard clauses soft with weight alpha.
    #[arg(long)]
    soft_alpha: bool,
    /// Levels per atom inside a CIR cycle.
    #[arg(long)]
    level_bound: Option<usize>,
}

impl EncodingArgs {
    fn options(&self) -> CompileOptions {
        CompileOptions {
            encoding: match self.encoding {
                Some(EncodingArg::Plain) => EncodingMode::Plain,
                _ => EncodingMode::Acyclic,
            },
            hard_weights: if self.soft_alpha {
                HardWeightMode::SoftAlpha
            } else {
                HardWeightMode::Top
            },
            level_bound: self.level_bound,
        }
    }
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Decision limit for each solver call.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Time limit in milliseconds for each solver call.
    #[arg(long)]
    max_ms: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.max_nodes.or_else(env_max_nodes),
            max_time: self.max_ms.map(Duration::from_millis),
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    /// JSON generator configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tasks: Option<usize>,
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long)]
    cirs: Option<usize>,
    /// Non-robot objects.
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long)]
    setting: Option<u8>,
}

impl GenArgs {
    fn apply(&self, cfg: &mut GenConfig) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.tasks {
            cfg.n_tasks = v;
        }
        if let Some(v) = self.robots {
            cfg.n_robots = v;
        }
        if let Some(v) = self.cirs {
            cfg.n_cirs = v;
        }
        if let Some(v) = self.objects {
            cfg.n_objects = Some(v);
        }
        if let Some(v) = self.setting {
            cfg.setting = v;
        }
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON sweep configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Swept parameter (tasks, robots, cirs, objects, setting) and values
    /// (`2,4,6`, `0..6` or `0..=6`).
    #[arg(long, num_args = 2, value_names = ["PARAM", "VALUES"])]
    vary: Option<Vec<String>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    first_seed: Option<u64>,
    /// Comma-separated subset of stamr, greedy, baseline-s1, baseline-s2,
    /// oracle.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    tasks: Option<usize>,
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long)]
    cirs: Option<usize>,
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long)]
    setting: Option<u8>,
    #[arg(long)]
    oracle_cap: Option<usize>,
    /// Decision limit for each solver call.
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Leave wall_time_ms blank so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// CSV output file (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// JSON sidecar (default: OUTPUT with `.json` appended).
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Also chart the results under this prefix.
    #[arg(long)]
    plot: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn env_max_nodes() -> Option<u64> {
    std::env::var(ENV_MAX_NODES).ok()?.parse().ok()
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read_text(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        instance_from_json(&text)
    } else {
        parse_instance(&text)
    };
    parsed.map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_world(path: &Path) -> Result<GroundWorld, Failure> {
    let inst = load_instance(path)?;
    let i_prime = apply_delta(&inst)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    ground_instance(&inst, &i_prime, GroundOptions::default()).map_err(|e| match e {
        GroundError::TooLarge { .. } => Failure::new(EXIT_RESOURCE, e.to_string()),
        GroundError::Model(_) => Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())),
    })
}

fn list(items: Vec<String>) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(",")
    }
}

fn report_line(world: &GroundWorld, utility: u64, activated: &[CapId], tasks: &[usize]) -> String {
    format!(
        "utility {utility}/{}; activated: {}; tasks: {}",
        world.total_utility(),
        list(activated.iter().map(|c| world.cap_name(*c)).collect()),
        list(tasks.iter().map(|t| world.tasks[*t].id.clone()).collect()),
    )
}

fn fired_line(world: &GroundWorld, fired: &[CirId]) -> String {
    format!(
        "fired: {}",
        list(fired.iter().map(|q| world.cir_name(*q)).collect())
    )
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::BudgetExceeded => "budget exceeded",
    }
}

fn print_result(out: &mut dyn Write, world: &GroundWorld, r: &StamrResult) -> Outcome {
    let a = &r.assignment;
    let _ = writeln!(
        out,
        "{}",
        report_line(world, a.utility, &a.activated, &a.tasks)
    );
    let _ = writeln!(out, "{}", fired_line(world, &a.fired));
    let _ = writeln!(
        out,
        "status: {}; vars {}; clauses {}",
        status_name(r.status),
        r.num_vars,
        r.num_clauses
    );
    Ok(if r.status == Status::BudgetExceeded {
        EXIT_BUDGET
    } else {
        EXIT_OK
    })
}

fn compile_err(e: tampic::compile::CompileError) -> Failure {
    Failure::new(EXIT_RESOURCE, e.to_string())
}

fn cmd_compile(
    out: &mut dyn Write,
    err: &mut dyn Write,
    instance: &Path,
    output: Option<&Path>,
    map: Option<&Path>,
    options: CompileOptions,
) -> Outcome {
    let world = load_world(instance)?;
    let compiled = compile(&world, options).map_err(compile_err)?;
    let wcnf = write_wcnf(&compiled.to_wcnf().map_err(compile_err)?);
    let map_text = compiled.vars.map_file(&world);
    match output {
        Some(path) => {
            write_text(path, &wcnf)?;
            let map_path = map
                .map(Path::to_path_buf)
                .unwrap_or_else(|| with_suffix(path, ".map"));
            write_text(&map_path, &map_text)?;
        }
        None => {
            let _ = out.write_all(wcnf.as_bytes());
            if let Some(path) = map {
                write_text(path, &map_text)?;
            }
        }
    }
    let stats = compiled.stats();
    let groups: Vec<String> = stats.hard.iter().map(|(g, n)| format!("{g} {n}")).collect();
    let _ = writeln!(
        err,
        "vars {}; clauses {}; hard: {}; soft {}",
        compiled.vars.len(),
        compiled.num_clauses(),
        groups.join(", "),
        stats.soft
    );
    Ok(EXIT_OK)
}

fn cmd_solve(
    out: &mut dyn Write,
    instance: &Path,
    model: Option<&Path>,
    options: CompileOptions,
    budget: Budget,
) -> Outcome {
    let world = load_world(instance)?;
    let Some(model_path) = model else {
        let r = solve_stamr(&world, options, budget).map_err(compile_err)?;
        return print_result(out, &world, &r);
    };
    let compiled = compile(&world, options).map_err(compile_err)?;
    let wcnf = compiled.to_wcnf().map_err(compile_err)?;
    let text = read_text(model_path)?;
    let model = read_model(&text, wcnf.num_vars)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", model_path.display())))?;
    let (hard_ok, violated) =
        evaluate(&wcnf, &model).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    if !hard_ok {
        let _ = writeln!(out, "model violates hard clauses");
        return Ok(EXIT_INCOMPATIBLE);
    }
    let a = decode(&world, &compiled.vars, &model);
    let _ = writeln!(
        out,
        "{}",
        report_line(&world, a.utility, &a.activated, &a.tasks)
    );
    let _ = writeln!(out, "{}", fired_line(&world, &a.fired));
    let _ = writeln!(
        out,
        "status: external model; violated soft weight {violated}"
    );
    Ok(EXIT_OK)
}

fn cmd_greedy(
    out: &mut dyn Write,
    instance: &Path,
    trace: Option<&Path>,
    options: CompileOptions,
    budget: Budget,
) -> Outcome {
    let world = load_world(instance)?;
    let r = solve_greedy(&world, options, budget).map_err(compile_err)?;
    if let Some(path) = trace {
        let mut text = r.trace.join("\n");
        text.push('\n');
        write_text(path, &text)?;
    }
    let mut tasks = r.fulfilled.clone();
    tasks.sort_unstable();
    let _ = writeln!(
        out,
        "{}",
        report_line(&world, r.utility, &r.activated, &tasks)
    );
    Ok(if r.budget_exceeded {
        EXIT_BUDGET
    } else {
        EXIT_OK
    })
}

fn cmd_baseline(
    out: &mut dyn Write,
    instance: &Path,
    setting: u8,
    options: CompileOptions,
    budget: Budget,
) -> Outcome {
    let world = load_world(instance)?;
    let setting = Setting::from_number(setting)
        .ok_or_else(|| Failure::new(EXIT_USAGE, "setting must be 1 or 2"))?;
    let r = solve_single_tasking(&world, setting, options, budget).map_err(compile_err)?;
    print_result(out, &world, &r)
}

fn cmd_oracle(out: &mut dyn Write, instance: &Path, opts: OracleOptions) -> Outcome {
    let world = load_world(instance)?;
    let r = solve_oracle(&world, opts).map_err(|e| Failure::new(EXIT_RESOURCE, e.to_string()))?;
    match &r.witness {
        Some(w) => {
            let _ = writeln!(out, "{}", report_line(&world, r.utility, w, &r.tasks));
        }
        None => {
            let _ = writeln!(
                out,
                "utility 0/{}; no compatible activation set",
                world.total_utility()
            );
        }
    }
    let _ = writeln!(out, "compatible sets: {}", r.compatible_sets);
    Ok(EXIT_OK)
}

/// Splits on whitespace outside parentheses.
fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for ch in text.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ => {}
        }
        if ch.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if !ch.is_whitespace() {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Parses `ACTIVATED:` and `CLAIMED:` lines; `#` starts a comment.
fn parse_assignment(world: &GroundWorld, text: &str) -> Result<(Vec<CapId>, Vec<String>), String> {
    let mut caps = Vec::new();
    let mut claimed = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `ACTIVATED:` or `CLAIMED:`", n + 1))?;
        match key.trim() {
            "ACTIVATED" => {
                for tok in tokens(rest) {
                    let atom = parse_atom(&tok).map_err(|e| format!("line {}: {e}", n + 1))?;
                    let cap = world
                        .find_capability(&atom)
                        .ok_or_else(|| format!("line {}: unknown capability `{tok}`", n + 1))?;
                    caps.push(cap);
                }
            }
            "CLAIMED" => claimed.extend(tokens(rest)),
            other => return Err(format!("line {}: unknown section `{other}`", n + 1)),
        }
    }
    caps.sort_unstable();
    caps.dedup();
    Ok((caps, claimed))
}

fn cmd_check(out: &mut dyn Write, instance: &Path, assignment: &Path) -> Outcome {
    let world = load_world(instance)?;
    let text = read_text(assignment)?;
    let (caps, claimed) = parse_assignment(&world, &text)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", assignment.display())))?;
    let report = check_assignment_feasibility(&world, &caps, &claimed);
    let verdict = match &report.verdict {
        Verdict::Compatible => "compatible".to_string(),
        Verdict::Incompatible(Incompatibility::MultipleSources { atom, sources }) => format!(
            "incompatible: {} has sources {}",
            world.atom_name(*atom),
            sources
                .iter()
                .map(|g| world.generator_name(*g))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Verdict::Incompatible(Incompatibility::NegativeViolated { cap, atom }) => format!(
            "incompatible: {} requires {} unconstrained",
            world.cap_name(*cap),
            world.atom_name(*atom)
        ),
    };
    let _ = writeln!(out, "verdict: {verdict}");
    if !report.invalid_claims.is_empty() {
        let _ = writeln!(
            out,
            "unfulfilled claims: {}",
            report.invalid_claims.join(",")
        );
    }
    let utility = if report.verdict.is_compatible() {
        report.utility
    } else {
        0
    };
    let _ = writeln!(out, "utility {utility}/{}", world.total_utility());
    Ok(if report.is_feasible() {
        EXIT_OK
    } else {
        EXIT_INCOMPATIBLE
    })
}

fn cmd_gen(
    out: &mut dyn Write,
    args: &GenArgs,
    output: Option<&Path>,
    emit_config: Option<&Path>,
) -> Outcome {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str::<GenConfig>(&read_text(path)?)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?,
        None => GenConfig::default(),
    };
    args.apply(&mut cfg);
    let inst = generate(&cfg).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let text = serialize_instance(&inst);
    match output {
        Some(path) => write_text(path, &text)?,
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    if let Some(path) = emit_config {
        let mut json = serde_json::to_string_pretty(&cfg).expect("serializable");
        json.push('\n');
        write_text(path, &json)?;
    }
    Ok(EXIT_OK)
}

fn bench_config(args: &BenchArgs) -> Result<BenchConfig, Failure> {
    let usage = |m: String| Failure::new(EXIT_USAGE, m);
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str::<BenchConfig>(&read_text(path)?)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?,
        None => BenchConfig::default(),
    };
    if let Some(n) = std::env::var(ENV_WORKERS).ok().and_then(|v| v.parse().ok()) {
        cfg.workers = Some(n);
    }
    if let Some(n) = env_max_nodes() {
        cfg.max_nodes = Some(n);
    }
    if let Some(v) = &args.vary {
        cfg.vary = v[0].parse().map_err(usage)?;
        cfg.values = parse_values(&v[1]).map_err(usage)?;
    }
    if let Some(m) = &args.methods {
        cfg.methods = m
            .iter()
            .map(|s| s.parse::<Method>())
            .collect::<Result<_, _>>()
            .map_err(usage)?;
    }
    let b = &mut cfg.base;
    if let Some(v) = args.tasks {
        b.n_tasks = v;
    }
    if let Some(v) = args.robots {
        b.n_robots = v;
    }
    if let Some(v) = args.cirs {
        b.n_cirs = v;
    }
    if let Some(v) = args.objects {
        b.n_objects = Some(v);
    }
    if let Some(v) = args.setting {
        b.setting = v;
    }
    if let Some(v) = args.runs {
        cfg.runs = v;
    }
    if let Some(v) = args.first_seed {
        cfg.first_seed = v;
    }
    if let Some(v) = args.oracle_cap {
        cfg.oracle_cap = v;
    }
    if let Some(v) = args.max_nodes {
        cfg.max_nodes = Some(v);
    }
    if let Some(v) = args.workers {
        cfg.workers = Some(v);
    }
    if args.no_timing {
        cfg.timing = false;
    }
    if cfg.vary == Param::Setting && cfg.values.iter().any(|&v| v != 1 && v != 2) {
        return Err(usage("setting values must be 1 or 2".to_string()));
    }
    Ok(cfg)
}

fn cmd_bench(out: &mut dyn Write, err: &mut dyn Write, args: &BenchArgs) -> Outcome {
    let cfg = bench_config(args)?;
    let report = run_bench(&cfg).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if report.budget_exceeded > 0 {
        let _ = writeln!(
            err,
            "warning: {} solver calls hit the decision budget; their best models were used",
            report.budget_exceeded
        );
    }
    let csv = report.to_csv();
    let meta = sidecar(&cfg, &report);
    match &args.output {
        Some(path) => {
            write_text(path, &csv)?;
            let side = args
                .sidecar
                .clone()
                .unwrap_or_else(|| with_suffix(path, ".json"));
            write_text(&side, &meta)?;
        }
        None => {
            let _ = out.write_all(csv.as_bytes());
            if let Some(side) = &args.sidecar {
                write_text(side, &meta)?;
            }
        }
    }
    if let Some(prefix) = &args.plot {
        plot_csv(&csv, prefix).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    }
    Ok(EXIT_OK)
}

fn cmd_plot(out: &mut dyn Write, csv: &Path, output: Option<&Path>) -> Outcome {
    let text = read_text(csv)?;
    let prefix = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| csv.with_extension(""));
    let files = plot_csv(&text, &prefix).map_err(|e| Failure::new(EXIT_INPUT, e))?;
    for f in files {
        let _ = writeln!(out, "{}", f.display());
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Compile {
            instance,
            output,
            map,
            encoding,
        } => cmd_compile(
            out,
            err,
            &instance,
            output.as_deref(),
            map.as_deref(),
            encoding.options(),
        ),
        Command::Solve {
            instance,
            model,
            encoding,
            budget,
        } => cmd_solve(
            out,
            &instance,
            model.as_deref(),
            encoding.options(),
            budget.budget(),
        ),
        Command::Greedy {
            instance,
            trace,
            encoding,
            budget,
        } => cmd_greedy(
            out,
            &instance,
            trace.as_deref(),
            encoding.options(),
            budget.budget(),
        ),
        Command::Baseline {
            instance,
            setting,
            encoding,
            budget,
        } => cmd_baseline(out, &instance, setting, encoding.options(), budget.budget()),
        Command::Oracle {
            instance,
            max_caps,
            full_scan,
            stop_at_total,
        } => cmd_oracle(
            out,
            &instance,
            OracleOptions {
                max_caps,
                full_scan,
                stop_at_total,
            },
        ),
        Command::Check {
            instance,
            assignment,
        } => cmd_check(out, &instance, &assignment),
        Command::Gen {
            gen,
            output,
            emit_config,
        } => cmd_gen(out, &gen, output.as_deref(), emit_config.as_deref()),
        Command::DumpGround { instance } => {
            let world = load_world(&instance)?;
            let _ = out.write_all(world.dump().as_bytes());
            Ok(EXIT_OK)
        }
        Command::Bench(args) => cmd_bench(out, err, &args),
        Command::Plot { csv, output } => cmd_plot(out, &csv, output.as_deref()),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
