//! Greedy allocation: tasks one at a time, highest utility first.
//!
//! Each iteration compiles a single task on top of the decisions of earlier
//! iterations, which are carried over as pinned unit clauses. When the task
//! is achievable, the constrained atoms and active generators of the model
//! are pinned true and the generators they exclude are pinned false.

use std::collections::BTreeSet;

use crate::compile::{compile_restricted, decode, CompileError, CompileOptions, VarKind};
use crate::ground::{CapId, GroundWorld};
use crate::maxsat::{solve, Budget, SolveOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyResult {
    /// Fulfilled tasks in processing order.
    pub fulfilled: Vec<usize>,
    pub activated: Vec<CapId>,
    pub utility: u64,
    /// One line per processed task.
    pub trace: Vec<String>,
    /// Variables and clauses summed over all iterations.
    pub num_vars: usize,
    pub num_clauses: usize,
    /// Some iteration ran out of budget before deciding its task.
    pub budget_exceeded: bool,
}

/// Task indices by utility (descending), ties by id.
pub fn task_order(world: &GroundWorld) -> Vec<usize> {
    let mut order: Vec<usize> = (0..world.tasks.len()).collect();
    order.sort_by(|a, b| {
        let (ta, tb) = (&world.tasks[*a], &world.tasks[*b]);
        tb.utility.cmp(&ta.utility).then_with(|| ta.id.cmp(&tb.id))
    });
    order
}

pub fn solve_greedy(
    world: &GroundWorld,
    options: CompileOptions,
    budget: Budget,
) -> Result<GreedyResult, CompileError> {
    let mut pins: BTreeSet<i32> = BTreeSet::new();
    let mut result = GreedyResult {
        fulfilled: Vec::new(),
        activated: Vec::new(),
        utility: 0,
        trace: Vec::new(),
        num_vars: 0,
        num_clauses: 0,
        budget_exceeded: false,
    };
    for t in task_order(world) {
        let task = &world.tasks[t];
        let pin_list: Vec<i32> = pins.iter().copied().collect();
        let compiled = compile_restricted(world, &[t], &pin_list, options)?;
        let wcnf = compiled.to_wcnf()?;
        result.num_vars += wcnf.num_vars;
        result.num_clauses += wcnf.clauses.len();
        let model = match solve(&wcnf, budget) {
            SolveOutcome::Optimal { model, cost: 0 } => Some(model),
            SolveOutcome::BudgetExceeded {
                best: Some((model, 0)),
            } => Some(model),
            SolveOutcome::BudgetExceeded { .. } => {
                result.budget_exceeded = true;
                None
            }
            _ => None,
        };
        let Some(model) = model else {
            result
                .trace
                .push(format!("{} ({}): not fulfilled", task.id, task.utility));
            continue;
        };
        let vars = &compiled.vars;
        let before: BTreeSet<CapId> = result.activated.iter().copied().collect();
        for v in 1..=vars.len() {
            if !model[v - 1] {
                continue;
            }
            match vars.kind(v) {
                VarKind::Atom(a) => {
                    pins.insert(v as i32);
                    for g in world.generators_of(a) {
                        if let Some(gv) = vars.generator(*g) {
                            if !model[gv as usize - 1] {
                                pins.insert(-gv);
                            }
                        }
                    }
                }
                VarKind::Cap(_) | VarKind::Cir(_) => {
                    pins.insert(v as i32);
                }
                _ => {}
            }
        }
        let assignment = decode(world, vars, &model);
        let added: Vec<String> = assignment
            .activated
            .iter()
            .filter(|c| !before.contains(c))
            .map(|c| world.cap_name(*c))
            .collect();
        result.activated = assignment.activated;
        result.fulfilled.push(t);
        result.utility += task.utility;
        result.trace.push(if added.is_empty() {
            format!("{} ({}): fulfilled", task.id, task.utility)
        } else {
            format!(
                "{} ({}): fulfilled; activated {}",
                task.id,
                task.utility,
                added.join(", ")
            )
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::{check_assignment_feasibility, closure, fulfilled_tasks};
    use crate::fuzz::{random_instance, FuzzConfig};
    use crate::ground::ground;
    use crate::model::parse_instance;
    use crate::oracle::{solve_oracle, OracleOptions};

    const RUNNING: &str = include_str!("../../../fixtures/running_example.tampic");

    #[test]
    fn running_example_trace() {
        let w = ground(&parse_instance(RUNNING).unwrap()).unwrap();
        let r = solve_greedy(&w, CompileOptions::default(), Budget::unlimited()).unwrap();
        assert_eq!(r.utility, 4);
        assert_eq!(
            r.trace,
            vec![
                "t2 (3): fulfilled; activated C_StrongPush(r1,o1)",
                "t1 (1): fulfilled"
            ]
        );
    }

    #[test]
    fn order_is_utility_then_id() {
        let doc = "PREDICATES: P/0\nTASKS:\n b: {P} @ 2\n a: {P} @ 2\n c: {P} @ 5\n";
        let w = ground(&parse_instance(doc).unwrap()).unwrap();
        let ids: Vec<&str> = task_order(&w)
            .iter()
            .map(|t| w.tasks[*t].id.as_str())
            .collect();
        assert_eq!(ids, vec!["c", "a", "b"]);
    }

    #[test]
    fn greedy_is_feasible_and_bounded_by_oracle() {
        for seed in 0..250u64 {
            let w = ground(&random_instance(seed, &FuzzConfig::small())).unwrap();
            let r = solve_greedy(&w, CompileOptions::default(), Budget::unlimited()).unwrap();
            let ids: Vec<String> = r.fulfilled.iter().map(|t| w.tasks[*t].id.clone()).collect();
            let report = check_assignment_feasibility(&w, &r.activated, &ids);
            if r.fulfilled.is_empty() {
                assert_eq!(r.utility, 0);
            } else {
                assert!(report.is_feasible(), "seed {seed}: {report:?}");
                assert_eq!(report.utility, r.utility, "seed {seed}");
                let cl = closure(&w, &r.activated);
                assert!(
                    fulfilled_tasks(&w, &cl).len() >= r.fulfilled.len(),
                    "seed {seed}"
                );
            }
            if let Ok(o) = solve_oracle(&w, OracleOptions::default()) {
                assert!(r.utility <= o.utility, "seed {seed}");
            }
        }
    }
}
