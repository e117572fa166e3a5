//! End-to-end optimal allocation: compile, solve, decode.

use crate::compile::{compile, Assignment, ClauseStats, CompileError, CompileOptions, Compiled};
use crate::ground::GroundWorld;
use crate::maxsat::{solve_with_stats, Budget, SolveOutcome, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// Hard clauses unsatisfiable: not even the empty activation is
    /// compatible with I′.
    Infeasible,
    /// Budget ran out; the assignment is the best one found, if any.
    BudgetExceeded,
}

#[derive(Debug, Clone)]
pub struct StamrResult {
    pub status: Status,
    pub assignment: Assignment,
    /// Weight of the falsified soft clauses in the returned model.
    pub cost: Option<u64>,
    pub num_vars: usize,
    pub num_clauses: usize,
    pub clause_stats: ClauseStats,
    pub solver: SolveStats,
}

impl StamrResult {
    pub fn utility(&self) -> u64 {
        self.assignment.utility
    }
}

/// Solves a compiled problem and decodes the model.
pub fn solve_compiled(
    world: &GroundWorld,
    compiled: &Compiled,
    budget: Budget,
) -> Result<StamrResult, CompileError> {
    let wcnf = compiled.to_wcnf()?;
    let (outcome, solver) = solve_with_stats(&wcnf, budget);
    let (status, model) = match outcome {
        SolveOutcome::Optimal { model, cost } => (Status::Optimal, Some((model, cost))),
        SolveOutcome::Infeasible => (Status::Infeasible, None),
        SolveOutcome::BudgetExceeded { best } => (Status::BudgetExceeded, best),
    };
    let (assignment, cost) = match model {
        Some((m, cost)) => (
            crate::compile::decode(world, &compiled.vars, &m),
            Some(cost),
        ),
        None => (Assignment::default(), None),
    };
    Ok(StamrResult {
        status,
        assignment,
        cost,
        num_vars: wcnf.num_vars,
        num_clauses: wcnf.clauses.len(),
        clause_stats: compiled.stats(),
        solver,
    })
}

/// Optimal allocation of the whole world.
pub fn solve_stamr(
    world: &GroundWorld,
    options: CompileOptions,
    budget: Budget,
) -> Result<StamrResult, CompileError> {
    let compiled = compile(world, options)?;
    solve_compiled(world, &compiled, budget)
}
