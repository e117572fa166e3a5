//! Optimal single-tasking allocation, as a restriction of the same encoding.
//!
//! Each robot owns at most one task. An active capability requires its robot
//! to own some task, a task instantiation requiring a capability requires
//! that robot to own the task, a fulfilled task needs an owner, and an owner
//! must activate at least one of its capabilities.
//!
//! In [`Setting::CapabilityOnly`] tasks with any atom requirement are dropped
//! before solving.
//!
//! Robots that are interchangeable in the ground world are ordered by the
//! slot of the task they own, with idle robots last. This removes only
//! symmetric copies of solutions, so the optimum is unchanged.

use crate::compile::{compile_restricted, ClauseGroup, CompileError, CompileOptions, VarKind};
use crate::ground::GroundWorld;
use crate::maxsat::Budget;
use crate::stamr::{solve_compiled, StamrResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    /// Every task is considered.
    All,
    /// Only tasks whose requirements are all capability activations.
    CapabilityOnly,
}

impl Setting {
    pub fn from_number(n: u8) -> Option<Setting> {
        match n {
            1 => Some(Setting::All),
            2 => Some(Setting::CapabilityOnly),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Setting::All => 1,
            Setting::CapabilityOnly => 2,
        }
    }
}

/// Tasks considered under `setting`.
pub fn considered_tasks(world: &GroundWorld, setting: Setting) -> Vec<usize> {
    (0..world.tasks.len())
        .filter(|&t| setting == Setting::All || !world.tasks[t].has_atom_requirement)
        .collect()
}

/// Robot indices grouped into classes of pairwise interchangeable robots,
/// in robot order.
pub fn interchangeable_robots(world: &GroundWorld) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for r in 0..world.robots.len() {
        let rep = classes
            .iter_mut()
            .find(|c| world.swap_is_symmetry(&world.robots[c[0]], &world.robots[r]));
        match rep {
            Some(c) => c.push(r),
            None => classes.push(vec![r]),
        }
    }
    classes
}

pub fn solve_single_tasking(
    world: &GroundWorld,
    setting: Setting,
    options: CompileOptions,
    budget: Budget,
) -> Result<StamrResult, CompileError> {
    solve_with(world, setting, options, budget, true)
}

fn solve_with(
    world: &GroundWorld,
    setting: Setting,
    options: CompileOptions,
    budget: Budget,
    break_symmetry: bool,
) -> Result<StamrResult, CompileError> {
    let tasks = considered_tasks(world, setting);
    let mut c = compile_restricted(world, &tasks, &[], options)?;
    let robot_of = |name: &str| {
        world
            .robots
            .binary_search_by(|r| r.as_str().cmp(name))
            .unwrap()
    };

    let mut own = vec![Vec::new(); world.robots.len()];
    for (r, row) in own.iter_mut().enumerate() {
        for &t in &tasks {
            row.push(c.add_var(VarKind::Own { robot: r, task: t }));
        }
    }
    let slot = |t: usize| tasks.binary_search(&t).unwrap();

    for row in &own {
        for i in 0..row.len() {
            for j in i + 1..row.len() {
                c.add_hard(ClauseGroup::Ownership, vec![-row[i], -row[j]]);
            }
        }
    }
    let mut caps_of = vec![Vec::new(); world.robots.len()];
    for cap in world.cap_ids() {
        let r = robot_of(&world.capability(cap).robot);
        let v = c.vars.cap(cap);
        caps_of[r].push(v);
        let mut clause = vec![-v];
        clause.extend(own[r].iter().copied());
        c.add_hard(ClauseGroup::Ownership, clause);
    }
    for &t in &tasks {
        for inst in &world.tasks[t].instantiations {
            let iv = c.vars.task_inst(t, inst.index).unwrap();
            for &cap in &inst.required_caps {
                let r = robot_of(&world.capability(cap).robot);
                c.add_hard(ClauseGroup::Ownership, vec![-iv, own[r][slot(t)]]);
            }
        }
        let mut clause = vec![-c.vars.task(t).unwrap()];
        clause.extend(own.iter().map(|row| row[slot(t)]));
        c.add_hard(ClauseGroup::Ownership, clause);
    }
    for (r, row) in own.iter().enumerate() {
        for &o in row {
            let mut clause = vec![-o];
            clause.extend(caps_of[r].iter().copied());
            c.add_hard(ClauseGroup::Ownership, clause);
        }
    }
    if break_symmetry {
        for class in interchangeable_robots(world) {
            for pair in class.windows(2) {
                let (a, b) = (&own[pair[0]], &own[pair[1]]);
                for j in 0..b.len() {
                    let mut clause = vec![-b[j]];
                    clause.extend(a[..=j].iter().copied());
                    c.add_hard(ClauseGroup::Symmetry, clause);
                }
            }
        }
    }
    solve_compiled(world, &c, budget)
}
