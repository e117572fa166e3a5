//! Parameter sweeps over generated instances.
//!
//! Every point of a sweep runs the same seeds. Each job generates and grounds
//! one instance, then runs the requested methods on it; only the solving
//! phase is timed. The reference optimum for the solution ratio is the
//! oracle's utility when the oracle ran, and otherwise the proven STAMR
//! optimum. A ratio over an optimum of zero is 1.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use tampic::baseline::{solve_single_tasking, Setting};
use tampic::compile::CompileOptions;
use tampic::gen::{generate, GenConfig, GenError};
use tampic::greedy::solve_greedy;
use tampic::ground::{ground, GroundWorld};
use tampic::maxsat::Budget;
use tampic::oracle::{solve_oracle, OracleOptions, DEFAULT_MAX_CAPS};
use tampic::stamr::{solve_stamr, Status};

pub const CSV_HEADER: [&str; 10] = [
    "seed",
    "varied_param",
    "varied_value",
    "method",
    "utility",
    "oracle_utility",
    "solution_ratio",
    "wall_time_ms",
    "clause_count",
    "var_count",
];

pub const DEFAULT_MAX_NODES: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Stamr,
    Greedy,
    BaselineS1,
    BaselineS2,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Stamr,
        Method::Greedy,
        Method::BaselineS1,
        Method::BaselineS2,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Stamr => "stamr",
            Method::Greedy => "greedy",
            Method::BaselineS1 => "baseline-s1",
            Method::BaselineS2 => "baseline-s2",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

/// Generator parameter varied across the points of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Param {
    Tasks,
    Robots,
    Cirs,
    Objects,
    Setting,
}

impl Param {
    pub const ALL: [Param; 5] = [
        Param::Tasks,
        Param::Robots,
        Param::Cirs,
        Param::Objects,
        Param::Setting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Tasks => "tasks",
            Param::Robots => "robots",
            Param::Cirs => "cirs",
            Param::Objects => "objects",
            Param::Setting => "setting",
        }
    }

    fn apply(self, cfg: &mut GenConfig, value: usize) {
        match self {
            Param::Tasks => cfg.n_tasks = value,
            Param::Robots => cfg.n_robots = value,
            Param::Cirs => cfg.n_cirs = value,
            Param::Objects => cfg.n_objects = Some(value),
            Param::Setting => cfg.setting = value.min(u8::MAX as usize) as u8,
        }
    }

    fn current(self, cfg: &GenConfig) -> usize {
        match self {
            Param::Tasks => cfg.n_tasks,
            Param::Robots => cfg.n_robots,
            Param::Cirs => cfg.n_cirs,
            Param::Objects => cfg.objects(),
            Param::Setting => cfg.setting as usize,
        }
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown sweep parameter '{s}'"))
    }
}

/// Parses `2,4,6`, `0..6` (exclusive) or `0..=6` (inclusive).
pub fn parse_values(text: &str) -> Result<Vec<usize>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad sweep value '{s}'"))
    };
    if let Some((a, b)) = text.split_once("..=") {
        return Ok((num(a)?..=num(b)?).collect());
    }
    if let Some((a, b)) = text.split_once("..") {
        return Ok((num(a)?..num(b)?).collect());
    }
    text.split(',').map(num).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// Fixed generator settings; `seed` is replaced per run.
    pub base: GenConfig,
    pub vary: Param,
    /// Empty means a single point at the base value.
    pub values: Vec<usize>,
    pub runs: usize,
    pub first_seed: u64,
    pub methods: Vec<Method>,
    pub oracle_cap: usize,
    /// Decision budget per solver call.
    pub max_nodes: Option<u64>,
    pub timing: bool,
    /// Worker threads; `None` lets the pool decide.
    pub workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            base: GenConfig {
                n_tasks: 10,
                n_robots: 10,
                ..GenConfig::default()
            },
            vary: Param::Tasks,
            values: Vec::new(),
            runs: 100,
            first_seed: 0,
            methods: Method::ALL.to_vec(),
            oracle_cap: DEFAULT_MAX_CAPS,
            max_nodes: Some(DEFAULT_MAX_NODES),
            timing: true,
            workers: None,
        }
    }
}

impl BenchConfig {
    pub fn points(&self) -> Vec<usize> {
        if self.values.is_empty() {
            vec![self.vary.current(&self.base)]
        } else {
            self.values.clone()
        }
    }

    /// Generator configuration of one run.
    pub fn gen_config(&self, value: usize, seed: u64) -> GenConfig {
        let mut cfg = self.base.clone();
        self.vary.apply(&mut cfg, value);
        cfg.seed = seed;
        cfg
    }

    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.max_nodes,
            max_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    /// `None` on aggregate rows.
    pub seed: Option<u64>,
    pub varied_param: Param,
    pub varied_value: usize,
    pub method: Method,
    pub utility: Option<f64>,
    pub oracle_utility: Option<f64>,
    pub solution_ratio: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub clause_count: Option<f64>,
    pub var_count: Option<f64>,
}

impl BenchRecord {
    pub fn is_aggregate(&self) -> bool {
        self.seed.is_none()
    }

    fn csv_row(&self) -> Vec<String> {
        let agg = self.is_aggregate();
        let count = |v: Option<f64>| match v {
            None => String::new(),
            Some(x) if agg => format!("{x:.3}"),
            Some(x) => format!("{x}"),
        };
        let fixed =
            |v: Option<f64>, digits: usize| v.map(|x| format!("{x:.digits$}")).unwrap_or_default();
        vec![
            self.seed.map_or("mean".to_string(), |s| s.to_string()),
            self.varied_param.name().to_string(),
            self.varied_value.to_string(),
            self.method.to_string(),
            count(self.utility),
            count(self.oracle_utility),
            fixed(self.solution_ratio, 6),
            fixed(self.wall_time_ms, 3),
            count(self.clause_count),
            count(self.var_count),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Per-seed rows followed, for each point, by one aggregate row per
    /// method.
    pub records: Vec<BenchRecord>,
    pub warnings: Vec<String>,
    /// Solver calls that ran out of budget; their best model was used.
    pub budget_exceeded: usize,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.records {
            w.write_record(r.csv_row()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii csv")
    }

    pub fn aggregates(&self) -> impl Iterator<Item = &BenchRecord> {
        self.records.iter().filter(|r| r.is_aggregate())
    }

    pub fn aggregate(&self, value: usize, method: Method) -> Option<&BenchRecord> {
        self.aggregates()
            .find(|r| r.varied_value == value && r.method == method)
    }
}

#[derive(Debug)]
pub enum BenchError {
    Gen(GenError),
    Other(String),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Gen(e) => e.fmt(f),
            BenchError::Other(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for BenchError {}

struct Outcome {
    method: Method,
    utility: Option<u64>,
    time_ms: Option<f64>,
    clauses: Option<usize>,
    vars: Option<usize>,
    budget_exceeded: bool,
}

struct JobResult {
    outcomes: Vec<Outcome>,
    oracle: Option<u64>,
    reference: Option<u64>,
    warnings: Vec<String>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1000.0)
}

fn run_job(cfg: &BenchConfig, world: &GroundWorld, label: &str) -> Result<JobResult, BenchError> {
    let options = CompileOptions::default();
    let budget = cfg.budget();
    let err = |e: &dyn fmt::Display| BenchError::Other(format!("{label}: {e}"));
    let mut outcomes = Vec::new();
    let mut warnings = Vec::new();
    let mut oracle = None;
    let mut stamr_optimum = None;

    let needs_stamr =
        cfg.methods.contains(&Method::Stamr) || !cfg.methods.contains(&Method::Oracle);
    for &method in &cfg.methods {
        let outcome = match method {
            Method::Stamr => {
                let (r, ms) = timed(|| solve_stamr(world, options, budget));
                let r = r.map_err(|e| err(&e))?;
                if r.status != Status::BudgetExceeded {
                    stamr_optimum = Some(r.utility());
                }
                Outcome {
                    method,
                    utility: Some(r.utility()),
                    time_ms: Some(ms),
                    clauses: Some(r.num_clauses),
                    vars: Some(r.num_vars),
                    budget_exceeded: r.status == Status::BudgetExceeded,
                }
            }
            Method::Greedy => {
                let (r, ms) = timed(|| solve_greedy(world, options, budget));
                let r = r.map_err(|e| err(&e))?;
                Outcome {
                    method,
                    utility: Some(r.utility),
                    time_ms: Some(ms),
                    clauses: Some(r.num_clauses),
                    vars: Some(r.num_vars),
                    budget_exceeded: r.budget_exceeded,
                }
            }
            Method::BaselineS1 | Method::BaselineS2 => {
                let setting = if method == Method::BaselineS1 {
                    Setting::All
                } else {
                    Setting::CapabilityOnly
                };
                let (r, ms) = timed(|| solve_single_tasking(world, setting, options, budget));
                let r = r.map_err(|e| err(&e))?;
                Outcome {
                    method,
                    utility: Some(r.utility()),
                    time_ms: Some(ms),
                    clauses: Some(r.num_clauses),
                    vars: Some(r.num_vars),
                    budget_exceeded: r.status == Status::BudgetExceeded,
                }
            }
            Method::Oracle => {
                let opts = OracleOptions {
                    max_caps: cfg.oracle_cap,
                    ..OracleOptions::default()
                };
                let (r, ms) = timed(|| solve_oracle(world, opts));
                match r {
                    Ok(r) => {
                        oracle = Some(r.utility);
                        Outcome {
                            method,
                            utility: Some(r.utility),
                            time_ms: Some(ms),
                            clauses: None,
                            vars: None,
                            budget_exceeded: false,
                        }
                    }
                    Err(e) => {
                        warnings.push(format!("{label}: oracle skipped: {e}"));
                        Outcome {
                            method,
                            utility: None,
                            time_ms: None,
                            clauses: None,
                            vars: None,
                            budget_exceeded: false,
                        }
                    }
                }
            }
        };
        outcomes.push(outcome);
    }
    if oracle.is_none() && stamr_optimum.is_none() && needs_stamr {
        let r = solve_stamr(world, options, budget).map_err(|e| err(&e))?;
        if r.status != Status::BudgetExceeded {
            stamr_optimum = Some(r.utility());
        }
    }
    if oracle.is_none() && stamr_optimum.is_none() {
        warnings.push(format!("{label}: no reference optimum; ratios left blank"));
    }
    Ok(JobResult {
        outcomes,
        oracle,
        reference: oracle.or(stamr_optimum),
        warnings,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Runs the sweep. Output order is independent of the number of workers.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let points = cfg.points();
    let mut methods = cfg.methods.clone();
    methods.sort_unstable();
    methods.dedup();
    let cfg = BenchConfig {
        methods,
        ..cfg.clone()
    };
    for &value in &points {
        cfg.gen_config(value, cfg.first_seed)
            .check()
            .map_err(BenchError::Gen)?;
    }
    let jobs: Vec<(usize, u64)> = points
        .iter()
        .flat_map(|&v| (0..cfg.runs as u64).map(move |i| (v, cfg.first_seed + i)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(value, seed)| {
                let label = format!("{}={value} seed {seed}", cfg.vary.name());
                let inst = generate(&cfg.gen_config(value, seed)).map_err(BenchError::Gen)?;
                let world =
                    ground(&inst).map_err(|e| BenchError::Other(format!("{label}: {e}")))?;
                run_job(&cfg, &world, &label)
            })
            .collect::<Result<Vec<JobResult>, BenchError>>()
    };
    let results = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BenchError::Other(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let mut report = BenchReport {
        records: Vec::new(),
        warnings: Vec::new(),
        budget_exceeded: 0,
    };
    let mut results = results.into_iter();
    for &value in &points {
        let mut rows = Vec::new();
        for i in 0..cfg.runs as u64 {
            let job = results.next().expect("one result per job");
            report.warnings.extend(job.warnings);
            for o in job.outcomes {
                report.budget_exceeded += usize::from(o.budget_exceeded);
                let ratio = match (o.utility, job.reference) {
                    (Some(_), Some(0)) => Some(1.0),
                    (Some(u), Some(r)) => Some(u as f64 / r as f64),
                    _ => None,
                };
                rows.push(BenchRecord {
                    seed: Some(cfg.first_seed + i),
                    varied_param: cfg.vary,
                    varied_value: value,
                    method: o.method,
                    utility: o.utility.map(|u| u as f64),
                    oracle_utility: job.oracle.map(|u| u as f64),
                    solution_ratio: ratio,
                    wall_time_ms: o.time_ms.filter(|_| cfg.timing),
                    clause_count: o.clauses.map(|c| c as f64),
                    var_count: o.vars.map(|c| c as f64),
                });
            }
        }
        let mut aggregates = Vec::new();
        for &method in &cfg.methods {
            let of = |f: fn(&BenchRecord) -> Option<f64>| {
                mean(rows.iter().filter(|r| r.method == method).filter_map(f))
            };
            aggregates.push(BenchRecord {
                seed: None,
                varied_param: cfg.vary,
                varied_value: value,
                method,
                utility: of(|r| r.utility),
                oracle_utility: of(|r| r.oracle_utility),
                solution_ratio: of(|r| r.solution_ratio),
                wall_time_ms: of(|r| r.wall_time_ms),
                clause_count: of(|r| r.clause_count),
                var_count: of(|r| r.var_count),
            });
        }
        report.records.extend(rows);
        report.records.extend(aggregates);
    }
    Ok(report)
}

/// JSON sidecar: the resolved configuration plus run metadata.
pub fn sidecar(cfg: &BenchConfig, report: &BenchReport) -> String {
    let value = serde_json::json!({
        "config": cfg,
        "domain_constants": cfg
            .points()
            .iter()
            .map(|&v| {
                let g = cfg.gen_config(v, cfg.first_seed);
                g.objects() + g.n_robots
            })
            .collect::<Vec<_>>(),
        "budget_exceeded": report.budget_exceeded,
        "warnings": report.warnings,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchConfig {
        BenchConfig {
            base: GenConfig {
                n_tasks: 3,
                n_robots: 3,
                ..GenConfig::default()
            },
            runs: 4,
            timing: false,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn values_parse() {
        assert_eq!(parse_values("2,4,6").unwrap(), vec![2, 4, 6]);
        assert_eq!(parse_values("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_values("0..=3").unwrap(), vec![0, 1, 2, 3]);
        assert!(parse_values("a..3").is_err());
    }

    #[test]
    fn one_row_per_seed_and_method_plus_means() {
        let cfg = BenchConfig {
            values: vec![2, 3],
            ..tiny()
        };
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.records.len(), 2 * (4 * 5 + 5));
        assert_eq!(report.aggregates().count(), 10);
        let csv = report.to_csv();
        assert!(csv.starts_with(&CSV_HEADER.join(",")));
        assert_eq!(csv.lines().count(), 1 + 50);
    }

    #[test]
    fn single_method_gives_runs_plus_one_rows() {
        let cfg = BenchConfig {
            methods: vec![Method::Stamr],
            runs: 100,
            ..tiny()
        };
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.records.len(), 101);
        let mean = report.aggregate(3, Method::Stamr).unwrap();
        assert_eq!(mean.solution_ratio, Some(1.0));
    }

    #[test]
    fn ratios_follow_the_oracle() {
        let report = run_bench(&tiny()).unwrap();
        for r in report.records.iter().filter(|r| !r.is_aggregate()) {
            let (Some(u), Some(o)) = (r.utility, r.oracle_utility) else {
                continue;
            };
            let expected = if o == 0.0 { 1.0 } else { u / o };
            assert_eq!(r.solution_ratio, Some(expected));
            assert!(u <= o);
        }
    }

    #[test]
    fn output_independent_of_workers() {
        let one = run_bench(&BenchConfig {
            workers: Some(1),
            ..tiny()
        })
        .unwrap();
        let three = run_bench(&BenchConfig {
            workers: Some(3),
            ..tiny()
        })
        .unwrap();
        assert_eq!(one.to_csv(), three.to_csv());
    }

    #[test]
    fn oracle_above_cap_is_blank_with_warning() {
        let cfg = BenchConfig {
            oracle_cap: 0,
            runs: 2,
            ..tiny()
        };
        let report = run_bench(&cfg).unwrap();
        let oracle_rows: Vec<_> = report
            .records
            .iter()
            .filter(|r| r.method == Method::Oracle && !r.is_aggregate())
            .collect();
        assert!(oracle_rows.iter().all(|r| r.utility.is_none()));
        assert_eq!(report.warnings.len(), 2);
        let stamr = report.aggregate(3, Method::Stamr).unwrap();
        assert_eq!(stamr.solution_ratio, Some(1.0));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = BenchConfig {
            values: vec![1, 2],
            vary: Param::Cirs,
            ..BenchConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<BenchConfig>(&text).unwrap(), cfg);
    }
}
