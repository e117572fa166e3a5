use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tampic::maxsat::{read_wcnf, solve, Budget, SolveOutcome};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn tampic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tampic"))
        .args(args)
        .env_remove("TAMPIC_WORKERS")
        .env_remove("TAMPIC_MAX_NODES")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_prints_the_running_example_optimum() {
    let o = tampic(&["solve", path(&fixture("running_example.tampic"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(
        out.lines().next().unwrap(),
        "utility 4/4; activated: C_StrongPush(r1,o1); tasks: t1,t2"
    );
    assert!(out.lines().nth(1).unwrap().contains("q1[X=o2,Y=o1]"));
}

#[test]
fn check_exit_codes() {
    let o = tampic(&[
        "check",
        path(&fixture("push_only.tampic")),
        path(&fixture("push_only.assign")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("verdict: incompatible"));
    let o = tampic(&[
        "check",
        path(&fixture("running_example.tampic")),
        path(&fixture("running_example.assign")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "verdict: compatible\nutility 4/4\n");
}

#[test]
fn unfulfilled_claim_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.assign");
    std::fs::write(
        &a,
        "ACTIVATED: C_Push(r1,o2)  # leaves o1 in place\nCLAIMED: t1\n",
    )
    .unwrap();
    let o = tampic(&["check", path(&fixture("running_example.tampic")), path(&a)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("unfulfilled claims: t1"));
}

#[test]
fn resource_and_budget_exit_codes() {
    let site = fixture("site_clearing.tampic");
    assert_eq!(tampic(&["oracle", path(&site)]).status.code(), Some(4));
    let o = tampic(&["oracle", path(&site), "--max-caps", "24"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("utility 16/16;"));
    assert_eq!(
        tampic(&["solve", path(&site), "--max-nodes", "1"])
            .status
            .code(),
        Some(5)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_tampic"))
        .args(["baseline", path(&site)])
        .env("TAMPIC_MAX_NODES", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(tampic(&["solve"]).status.code(), Some(1));
    assert_eq!(
        tampic(&["bench", "--vary", "colour", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(tampic(&["--version"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tampic");
    std::fs::write(&bad, "OBJECTS: a\nPREDICATES: F/1\n").unwrap();
    let o = tampic(&["solve", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn compile_writes_wcnf_and_map_and_external_model_decodes() {
    let dir = tempfile::tempdir().unwrap();
    let wcnf = dir.path().join("re.wcnf");
    let re = fixture("running_example.tampic");
    let o = tampic(&["compile", path(&re), "-o", path(&wcnf)]);
    assert_eq!(o.status.code(), Some(0));
    let map = std::fs::read_to_string(dir.path().join("re.wcnf.map")).unwrap();
    assert!(map.contains("C_StrongPush(r1,o1)"));
    let problem = read_wcnf(&std::fs::read_to_string(&wcnf).unwrap()).unwrap();
    let SolveOutcome::Optimal { model, cost } = solve(&problem, Budget::unlimited()) else {
        panic!("not optimal");
    };
    assert_eq!(cost, 0);
    let lits: Vec<String> = model
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if *v {
                format!("{}", i + 1)
            } else {
                format!("-{}", i + 1)
            }
        })
        .collect();
    let model_file = dir.path().join("re.model");
    std::fs::write(
        &model_file,
        format!("s OPTIMUM FOUND\nv {}\n", lits.join(" ")),
    )
    .unwrap();
    let o = tampic(&["solve", path(&re), "--model", path(&model_file)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("utility 4/4; activated: C_StrongPush(r1,o1); tasks: t1,t2\n"));

    let plain = tampic(&["compile", path(&re), "--encoding", "plain"]);
    let acyclic = tampic(&["compile", path(&re), "--acyclic"]);
    assert!(stdout(&plain).starts_with("p wcnf "));
    assert_ne!(plain.stdout, acyclic.stdout);
}

#[test]
fn greedy_trace_lists_tasks_by_utility() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let o = tampic(&[
        "greedy",
        path(&fixture("running_example.tampic")),
        "--trace",
        path(&trace),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    let first: Vec<&str> = text.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(first, ["t2", "t1"]);
}

#[test]
fn baseline_settings_on_site_clearing() {
    let site = fixture("site_clearing.tampic");
    let s1 = stdout(&tampic(&["baseline", path(&site), "--setting", "1"]));
    assert!(s1.starts_with("utility 14/16;"), "{s1}");
    assert!(s1.lines().nth(2).unwrap().starts_with("status: optimal"));
}

#[test]
fn gen_output_solves_and_config_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("g.tampic");
    let cfg = dir.path().join("g.json");
    let a = tampic(&[
        "gen",
        "--seed",
        "11",
        "--tasks",
        "4",
        "--robots",
        "3",
        "--setting",
        "2",
        "-o",
        path(&inst),
        "--emit-config",
        path(&cfg),
    ]);
    assert_eq!(a.status.code(), Some(0));
    let again = tampic(&["gen", "--config", path(&cfg)]);
    assert_eq!(stdout(&again), std::fs::read_to_string(&inst).unwrap());
    assert_eq!(tampic(&["solve", path(&inst)]).status.code(), Some(0));
    assert_eq!(tampic(&["dump-ground", path(&inst)]).status.code(), Some(0));
}

#[test]
fn bench_csv_header_is_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = tampic(&[
        "bench",
        "--vary",
        "robots",
        "2..=3",
        "--runs",
        "2",
        "--tasks",
        "3",
        "--no-timing",
        "-o",
        path(&csv),
        "--plot",
        path(&dir.path().join("b")),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "seed,varied_param,varied_value,method,utility,oracle_utility,solution_ratio,wall_time_ms,clause_count,var_count"
    );
    assert_eq!(text.lines().count(), 1 + 2 * (2 * 5 + 5));
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.csv.json")).unwrap())
            .unwrap();
    assert_eq!(side["config"]["runs"], 2);
    assert!(dir.path().join("b_ratio.svg").exists());
    assert!(dir.path().join("b_time.svg").exists());
}

#[test]
fn worker_count_does_not_change_bench_output() {
    let args = [
        "bench",
        "--vary",
        "cirs",
        "0..2",
        "--runs",
        "3",
        "--tasks",
        "3",
        "--robots",
        "3",
        "--no-timing",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_tampic"))
        .args(args)
        .env("TAMPIC_WORKERS", "1")
        .output()
        .unwrap();
    let three = tampic(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
}
