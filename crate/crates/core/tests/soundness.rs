//! The compiled optimum agrees with exhaustive search over capability sets.

use tampic::compat::check_assignment_feasibility;
use tampic::compile::{compile, CompileOptions, EncodingMode};
use tampic::fuzz::{random_instance, FuzzConfig};
use tampic::ground::ground;
use tampic::maxsat::{evaluate, solve, Budget, SolveOutcome};
use tampic::oracle::{solve_oracle, OracleOptions};
use tampic::stamr::{solve_stamr, Status};

fn plain() -> CompileOptions {
    CompileOptions {
        encoding: EncodingMode::Plain,
        ..Default::default()
    }
}

#[test]
fn optimum_matches_oracle_on_random_corpus() {
    let mut checked = 0;
    for seed in 0..400u64 {
        let w = ground(&random_instance(seed, &FuzzConfig::small())).unwrap();
        let Ok(o) = solve_oracle(&w, OracleOptions::default()) else {
            continue;
        };
        let r = solve_stamr(&w, CompileOptions::default(), Budget::unlimited()).unwrap();
        assert_eq!(r.utility(), o.utility, "seed {seed}");
        match r.status {
            Status::Optimal => {
                let claimed = r.assignment.task_ids(&w);
                let report = check_assignment_feasibility(&w, &r.assignment.activated, &claimed);
                assert!(report.is_feasible(), "seed {seed}: {report:?}");
                assert_eq!(report.utility, r.utility());
            }
            Status::Infeasible => assert_eq!(o.witness, None, "seed {seed}"),
            Status::BudgetExceeded => unreachable!(),
        }
        let p = solve_stamr(&w, plain(), Budget::unlimited()).unwrap();
        assert!(p.utility() >= o.utility, "seed {seed}");
        checked += 1;
    }
    assert!(
        checked >= 100,
        "only {checked} instances within the oracle cap"
    );
}

#[test]
fn oracle_witness_extends_to_model_of_equal_weight() {
    for seed in 0..200u64 {
        let w = ground(&random_instance(seed, &FuzzConfig::small())).unwrap();
        let Ok(o) = solve_oracle(&w, OracleOptions::default()) else {
            continue;
        };
        let Some(witness) = o.witness else { continue };
        let c = compile(&w, CompileOptions::default()).unwrap();
        let mut pins: Vec<i32> = w
            .cap_ids()
            .map(|cap| {
                let v = c.vars.cap(cap);
                if witness.contains(&cap) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        for &t in &o.tasks {
            pins.push(c.vars.task(t).unwrap());
        }
        let mut pinned = c.clone();
        pinned.pin(&pins).unwrap();
        let p = pinned.to_wcnf().unwrap();
        match solve(&p, Budget::unlimited()) {
            SolveOutcome::Optimal { model, cost } => {
                assert_eq!(evaluate(&p, &model).unwrap(), (true, cost));
                assert_eq!(w.total_utility() - cost, o.utility, "seed {seed}");
            }
            other => panic!("seed {seed}: {other:?}"),
        }
    }
}
