//! Compilation of a ground world into Weighted MAX-SAT.
//!
//! Every ground atom, capability, CIR instance, task instantiation and task
//! gets a Boolean variable. Hard clauses encode I′, CIR firing (both
//! directions), capability effects, task requirements, support (every
//! constrained atom needs a generator) and mutual exclusion of generators
//! sharing an atom. Each task contributes a soft unit clause weighted by its
//! utility.
//!
//! In [`EncodingMode::Acyclic`], atoms in a cyclic part of the CIR
//! dependency graph also get unary levels, and a fired CIR must conclude at
//! a strictly higher level than each antecedent in the same cycle. This
//! rules out models where atoms justify each other in a loop. When the
//! dependency graph has no cycles both modes emit the same clauses.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::ground::{AtomId, CapId, CirId, Generator, GroundWorld};
use crate::maxsat::{WClause, Wcnf};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum EncodingMode {
    /// Support and mutual-exclusion clauses only.
    Plain,
    /// Adds level ordering inside cycles of the CIR dependency graph.
    #[default]
    Acyclic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum HardWeightMode {
    /// Hard clauses carry the `top` weight, which is α.
    #[default]
    Top,
    /// Hard clauses are soft clauses of weight α; `top` exceeds the total
    /// weight so no clause is hard for the solver.
    SoftAlpha,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CompileOptions {
    pub encoding: EncodingMode,
    pub hard_weights: HardWeightMode,
    /// Number of levels per atom in a cycle; defaults to the size of the
    /// atom's strongly connected component.
    pub level_bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("clause weights overflow 64 bits")]
    WeightOverflow,
    #[error("variable {0} pinned both true and false")]
    ContradictoryPins(u32),
    #[error("pinned literal {0} does not name a variable")]
    PinOutOfRange(i32),
    #[error("unknown task index {0}")]
    UnknownTask(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Atom(AtomId),
    Cap(CapId),
    Cir(CirId),
    /// Instantiation `index` (1-based) of task `task`.
    TaskInst {
        task: usize,
        index: usize,
    },
    Task(usize),
    /// The atom's level is at least `j`.
    Level {
        atom: AtomId,
        j: usize,
    },
    /// Robot `robot` (index into `GroundWorld::robots`) is assigned to task
    /// `task`.
    Own {
        robot: usize,
        task: usize,
    },
}

impl VarKind {
    pub fn label(&self) -> &'static str {
        match self {
            VarKind::Atom(_) => "atom",
            VarKind::Cap(_) => "cap",
            VarKind::Cir(_) => "cir",
            VarKind::TaskInst { .. } => "task-inst",
            VarKind::Task(_) => "task",
            VarKind::Level { .. } => "level",
            VarKind::Own { .. } => "own",
        }
    }
}

/// Mapping between solver variables (1-based) and ground entities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarTable {
    kinds: Vec<VarKind>,
    n_atoms: usize,
    n_caps: usize,
    n_cirs: usize,
    task_inst_base: Vec<Option<usize>>,
    task_var: Vec<Option<usize>>,
    index: HashMap<VarKind, usize>,
}

impl VarTable {
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, var: usize) -> VarKind {
        self.kinds[var - 1]
    }

    pub fn atom(&self, a: AtomId) -> i32 {
        debug_assert!(a.index() < self.n_atoms);
        a.0 as i32 + 1
    }

    pub fn cap(&self, c: CapId) -> i32 {
        debug_assert!(c.index() < self.n_caps);
        (self.n_atoms + c.index()) as i32 + 1
    }

    pub fn cir(&self, q: CirId) -> i32 {
        debug_assert!(q.index() < self.n_cirs);
        (self.n_atoms + self.n_caps + q.index()) as i32 + 1
    }

    /// Variable of a generator; `Init` has none.
    pub fn generator(&self, g: Generator) -> Option<i32> {
        match g {
            Generator::Init => None,
            Generator::Capability(c) => Some(self.cap(c)),
            Generator::Cir(q) => Some(self.cir(q)),
        }
    }

    pub fn task(&self, task: usize) -> Option<i32> {
        self.task_var.get(task).copied().flatten().map(|v| v as i32)
    }

    pub fn task_inst(&self, task: usize, index: usize) -> Option<i32> {
        self.task_inst_base
            .get(task)
            .copied()
            .flatten()
            .map(|b| (b + index - 1) as i32)
    }

    pub fn lookup(&self, kind: VarKind) -> Option<i32> {
        self.index.get(&kind).map(|v| *v as i32)
    }

    fn push(&mut self, kind: VarKind) -> usize {
        self.kinds.push(kind);
        let v = self.kinds.len();
        self.index.insert(kind, v);
        v
    }

    /// Display name of a variable's entity.
    pub fn name(&self, world: &GroundWorld, var: usize) -> String {
        match self.kind(var) {
            VarKind::Atom(a) => world.atom_name(a),
            VarKind::Cap(c) => world.cap_name(c),
            VarKind::Cir(q) => world.cir_name(q),
            VarKind::TaskInst { task, index } => format!("{}#{index}", world.tasks[task].id),
            VarKind::Task(t) => world.tasks[t].id.clone(),
            VarKind::Level { atom, j } => format!("{}>={j}", world.atom_name(atom)),
            VarKind::Own { robot, task } => {
                format!("{}:{}", world.robots[robot], world.tasks[task].id)
            }
        }
    }

    /// Sidecar map: one `<var> <kind> <name>` line per variable.
    pub fn map_file(&self, world: &GroundWorld) -> String {
        let mut out = String::new();
        for v in 1..=self.len() {
            writeln!(out, "{v} {} {}", self.kind(v).label(), self.name(world, v)).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClauseGroup {
    Init,
    Cir,
    Capability,
    Task,
    Support,
    Mutex,
    Level,
    Ownership,
    Symmetry,
    Pin,
}

impl fmt::Display for ClauseGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseGroup::Init => "init",
            ClauseGroup::Cir => "cir",
            ClauseGroup::Capability => "capability",
            ClauseGroup::Task => "task",
            ClauseGroup::Support => "support",
            ClauseGroup::Mutex => "mutex",
            ClauseGroup::Level => "level",
            ClauseGroup::Ownership => "ownership",
            ClauseGroup::Symmetry => "symmetry",
            ClauseGroup::Pin => "pin",
        })
    }
}

/// Hard clause counts per group, plus the number of soft clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseStats {
    pub hard: BTreeMap<ClauseGroup, usize>,
    pub soft: usize,
}

impl ClauseStats {
    pub fn get(&self, group: ClauseGroup) -> usize {
        self.hard.get(&group).copied().unwrap_or(0)
    }

    pub fn total_hard(&self) -> usize {
        self.hard.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    group: ClauseGroup,
    /// `None` for hard clauses.
    soft_weight: Option<u64>,
    lits: Vec<i32>,
}

/// A compiled problem: clauses in emission order plus the variable table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compiled {
    pub vars: VarTable,
    pub options: CompileOptions,
    /// Indices of the tasks with soft clauses.
    pub tasks: Vec<usize>,
    entries: Vec<Entry>,
    utility_sum: u64,
}

impl Compiled {
    /// The hard-clause weight: one more than the total task utility.
    pub fn alpha(&self) -> u64 {
        self.utility_sum + 1
    }

    pub fn stats(&self) -> ClauseStats {
        let mut s = ClauseStats::default();
        for e in &self.entries {
            if e.soft_weight.is_some() {
                s.soft += 1;
            } else {
                *s.hard.entry(e.group).or_insert(0) += 1;
            }
        }
        s
    }

    pub fn num_clauses(&self) -> usize {
        self.entries.len()
    }

    pub fn add_var(&mut self, kind: VarKind) -> i32 {
        self.vars.push(kind) as i32
    }

    pub fn add_hard(&mut self, group: ClauseGroup, lits: Vec<i32>) {
        self.entries.push(Entry {
            group,
            soft_weight: None,
            lits,
        });
    }

    /// Adds a hard unit clause for each literal.
    pub fn pin(&mut self, lits: &[i32]) -> Result<(), CompileError> {
        let mut seen: HashMap<u32, bool> = HashMap::new();
        for &l in lits {
            let v = l.unsigned_abs();
            if l == 0 || v as usize > self.vars.len() {
                return Err(CompileError::PinOutOfRange(l));
            }
            if let Some(prev) = seen.insert(v, l > 0) {
                if prev != (l > 0) {
                    return Err(CompileError::ContradictoryPins(v));
                }
            }
        }
        for &l in lits {
            self.add_hard(ClauseGroup::Pin, vec![l]);
        }
        Ok(())
    }

    pub fn to_wcnf(&self) -> Result<Wcnf, CompileError> {
        let alpha = self.alpha();
        let (hard_weight, top) = match self.options.hard_weights {
            HardWeightMode::Top => (alpha, alpha),
            HardWeightMode::SoftAlpha => {
                let n_hard = self
                    .entries
                    .iter()
                    .filter(|e| e.soft_weight.is_none())
                    .count();
                let total = alpha
                    .checked_mul(n_hard as u64)
                    .and_then(|h| h.checked_add(self.utility_sum))
                    .and_then(|t| t.checked_add(1))
                    .ok_or(CompileError::WeightOverflow)?;
                (alpha, total)
            }
        };
        Ok(Wcnf {
            num_vars: self.vars.len(),
            top,
            clauses: self
                .entries
                .iter()
                .map(|e| WClause {
                    weight: e.soft_weight.unwrap_or(hard_weight),
                    lits: e.lits.clone(),
                })
                .collect(),
        })
    }
}

/// Decoded solution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub activated: Vec<CapId>,
    pub fired: Vec<CirId>,
    /// Indices of tasks whose variable is true.
    pub tasks: Vec<usize>,
    pub utility: u64,
}

impl Assignment {
    pub fn task_ids(&self, world: &GroundWorld) -> Vec<String> {
        self.tasks
            .iter()
            .map(|t| world.tasks[*t].id.clone())
            .collect()
    }
}

/// Reads capabilities, CIR instances and tasks off a model.
pub fn decode(world: &GroundWorld, vars: &VarTable, model: &[bool]) -> Assignment {
    let mut a = Assignment::default();
    for v in 1..=vars.len().min(model.len()) {
        if !model[v - 1] {
            continue;
        }
        match vars.kind(v) {
            VarKind::Cap(c) => a.activated.push(c),
            VarKind::Cir(q) => a.fired.push(q),
            VarKind::Task(t) => {
                a.tasks.push(t);
                a.utility += world.tasks[t].utility;
            }
            _ => {}
        }
    }
    a
}

/// Strongly connected components of the atom dependency graph (antecedent
/// to consequent over all ground CIRs). Returns the component index of each
/// atom and the component sizes.
fn atom_sccs(world: &GroundWorld) -> (Vec<usize>, Vec<usize>) {
    let n = world.num_atoms();
    let succ: Vec<Vec<usize>> = world
        .atom_ids()
        .map(|a| {
            world
                .cirs_with_antecedent(a)
                .iter()
                .map(|q| world.cir(*q).consequent.index())
                .collect()
        })
        .collect();
    const NONE: usize = usize::MAX;
    let mut index = vec![NONE; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![NONE; n];
    let mut sizes = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != NONE {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&(v, i)) = call.last() {
            if i < succ[v].len() {
                let w = succ[v][i];
                call.last_mut().unwrap().1 += 1;
                if index[w] == NONE {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let c = sizes.len();
                    let mut size = 0;
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = c;
                        size += 1;
                        if w == v {
                            break;
                        }
                    }
                    sizes.push(size);
                }
            }
        }
    }
    (comp, sizes)
}

/// Whether the CIR dependency graph over ground atoms has a cycle.
pub fn has_cyclic_dependencies(world: &GroundWorld) -> bool {
    atom_sccs(world).1.iter().any(|s| *s > 1)
}

/// Compiles the whole world.
pub fn compile(world: &GroundWorld, options: CompileOptions) -> Result<Compiled, CompileError> {
    let all: Vec<usize> = (0..world.tasks.len()).collect();
    compile_restricted(world, &all, &[], options)
}

/// Compiles with soft clauses only for `tasks` and a hard unit clause per
/// pinned literal.
pub fn compile_restricted(
    world: &GroundWorld,
    tasks: &[usize],
    pins: &[i32],
    options: CompileOptions,
) -> Result<Compiled, CompileError> {
    let mut tasks: Vec<usize> = tasks.to_vec();
    tasks.sort_unstable();
    tasks.dedup();
    if let Some(&t) = tasks.iter().find(|t| **t >= world.tasks.len()) {
        return Err(CompileError::UnknownTask(t));
    }
    let mut utility_sum = 0u64;
    for &t in &tasks {
        utility_sum = utility_sum
            .checked_add(world.tasks[t].utility)
            .ok_or(CompileError::WeightOverflow)?;
    }
    utility_sum
        .checked_add(1)
        .ok_or(CompileError::WeightOverflow)?;

    let mut vars = VarTable {
        kinds: Vec::new(),
        n_atoms: world.num_atoms(),
        n_caps: world.capabilities.len(),
        n_cirs: world.cirs.len(),
        task_inst_base: vec![None; world.tasks.len()],
        task_var: vec![None; world.tasks.len()],
        index: HashMap::new(),
    };
    for a in world.atom_ids() {
        vars.push(VarKind::Atom(a));
    }
    for c in world.cap_ids() {
        vars.push(VarKind::Cap(c));
    }
    for q in world.cir_ids() {
        vars.push(VarKind::Cir(q));
    }
    for &t in &tasks {
        vars.task_inst_base[t] = Some(vars.len() + 1);
        for inst in &world.tasks[t].instantiations {
            vars.push(VarKind::TaskInst {
                task: t,
                index: inst.index,
            });
        }
    }
    for &t in &tasks {
        vars.task_var[t] = Some(vars.push(VarKind::Task(t)));
    }

    let mut c = Compiled {
        vars,
        options,
        tasks: tasks.clone(),
        entries: Vec::new(),
        utility_sum,
    };
    let vt = c.vars.clone();

    for &a in &world.init {
        c.add_hard(ClauseGroup::Init, vec![vt.atom(a)]);
    }

    for q in world.cir_ids() {
        let g = world.cir(q);
        let v = vt.cir(q);
        for &a in &g.antecedents {
            c.add_hard(ClauseGroup::Cir, vec![-v, vt.atom(a)]);
        }
        c.add_hard(ClauseGroup::Cir, vec![-v, vt.atom(g.consequent)]);
        let mut passive: Vec<i32> = g.antecedents.iter().map(|a| -vt.atom(*a)).collect();
        passive.push(v);
        c.add_hard(ClauseGroup::Cir, passive);
    }

    for cap in world.cap_ids() {
        let gc = world.capability(cap);
        let v = vt.cap(cap);
        for &a in &gc.constrains {
            c.add_hard(ClauseGroup::Capability, vec![-v, vt.atom(a)]);
        }
        for &b in &gc.requires_unconstrained {
            c.add_hard(ClauseGroup::Capability, vec![-v, -vt.atom(b)]);
        }
    }

    for &t in &tasks {
        let task = &world.tasks[t];
        let tv = vt.task(t).unwrap();
        c.entries.push(Entry {
            group: ClauseGroup::Task,
            soft_weight: Some(task.utility),
            lits: vec![tv],
        });
        for inst in &task.instantiations {
            let iv = vt.task_inst(t, inst.index).unwrap();
            for &a in &inst.required_atoms {
                c.add_hard(ClauseGroup::Task, vec![-iv, vt.atom(a)]);
            }
            for &cap in &inst.required_caps {
                c.add_hard(ClauseGroup::Task, vec![-iv, vt.cap(cap)]);
            }
        }
        let mut pick = vec![-tv];
        pick.extend(
            task.instantiations
                .iter()
                .map(|i| vt.task_inst(t, i.index).unwrap()),
        );
        c.add_hard(ClauseGroup::Task, pick);
    }

    for a in world.atom_ids() {
        if world.is_init(a) {
            continue;
        }
        let mut clause = vec![-vt.atom(a)];
        clause.extend(
            world
                .generators_of(a)
                .iter()
                .filter_map(|g| vt.generator(*g)),
        );
        c.add_hard(ClauseGroup::Support, clause);
    }

    let mut units: HashSet<i32> = HashSet::new();
    let mut pairs: HashSet<(i32, i32)> = HashSet::new();
    for a in world.atom_ids() {
        let gens: Vec<i32> = world
            .generators_of(a)
            .iter()
            .filter_map(|g| vt.generator(*g))
            .collect();
        if world.is_init(a) {
            for g in gens {
                if units.insert(g) {
                    c.add_hard(ClauseGroup::Mutex, vec![-g]);
                }
            }
        } else {
            for i in 0..gens.len() {
                for j in i + 1..gens.len() {
                    let (x, y) = (gens[i].min(gens[j]), gens[i].max(gens[j]));
                    if pairs.insert((x, y)) {
                        c.add_hard(ClauseGroup::Mutex, vec![-x, -y]);
                    }
                }
            }
        }
    }

    if options.encoding == EncodingMode::Acyclic {
        add_levels(world, &mut c, options.level_bound);
    }

    c.pin(pins)?;
    Ok(c)
}

fn add_levels(world: &GroundWorld, c: &mut Compiled, bound: Option<usize>) {
    let (comp, sizes) = atom_sccs(world);
    let levels = |a: AtomId| bound.unwrap_or(sizes[comp[a.index()]]);
    let mut level_var: HashMap<(AtomId, usize), i32> = HashMap::new();
    for a in world.atom_ids() {
        if sizes[comp[a.index()]] < 2 {
            continue;
        }
        for j in 1..levels(a) {
            let v = c.add_var(VarKind::Level { atom: a, j });
            level_var.insert((a, j), v);
        }
    }
    for a in world.atom_ids() {
        if sizes[comp[a.index()]] < 2 {
            continue;
        }
        for j in 1..levels(a).saturating_sub(1) {
            c.add_hard(
                ClauseGroup::Level,
                vec![-level_var[&(a, j + 1)], level_var[&(a, j)]],
            );
        }
    }
    let vt = c.vars.clone();
    for q in world.cir_ids() {
        let g = world.cir(q);
        let f = g.consequent;
        if sizes[comp[f.index()]] < 2 {
            continue;
        }
        let v = vt.cir(q);
        let depth = levels(f);
        for &b in &g.antecedents {
            if comp[b.index()] != comp[f.index()] {
                continue;
            }
            // level(f) > level(b), in unary: level(b) >= j implies
            // level(f) >= j + 1.
            for j in 0..depth {
                let mut clause = vec![-v];
                if j > 0 {
                    clause.push(-level_var[&(b, j)]);
                }
                if j + 1 < depth {
                    clause.push(level_var[&(f, j + 1)]);
                }
                c.add_hard(ClauseGroup::Level, clause);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ground;
    use crate::maxsat::{evaluate, solve, write_wcnf, Budget, SolveOutcome};
    use crate::model::{parse_atom, parse_instance};

    const RUNNING: &str = include_str!("../../../fixtures/running_example.tampic");

    fn world() -> GroundWorld {
        ground(&parse_instance(RUNNING).unwrap()).unwrap()
    }

    fn names(w: &GroundWorld, c: &Compiled, lits: &[i32]) -> Vec<String> {
        lits.iter()
            .map(|l| {
                let n = c.vars.name(w, l.unsigned_abs() as usize);
                if *l < 0 {
                    format!("!{n}")
                } else {
                    n
                }
            })
            .collect()
    }

    fn clause_set(w: &GroundWorld, c: &Compiled) -> Vec<(Option<u64>, Vec<String>)> {
        c.entries
            .iter()
            .map(|e| {
                let mut n = names(w, c, &e.lits);
                n.sort();
                (e.soft_weight, n)
            })
            .collect()
    }

    fn has(set: &[(Option<u64>, Vec<String>)], weight: Option<u64>, lits: &[&str]) -> bool {
        let mut want: Vec<String> = lits.iter().map(|s| s.to_string()).collect();
        want.sort();
        set.iter().any(|(w, l)| *w == weight && *l == want)
    }

    #[test]
    fn running_example_alpha_and_task_clauses() {
        let w = world();
        let c = compile(&w, CompileOptions::default()).unwrap();
        assert_eq!(c.alpha(), 5);
        let set = clause_set(&w, &c);
        assert!(has(&set, Some(1), &["t1"]));
        assert!(has(&set, Some(3), &["t2"]));
        assert!(has(&set, None, &["!t1#1", "F_Pos(o1)"]));
        assert!(has(&set, None, &["!t1", "t1#1"]));
    }

    #[test]
    fn running_example_cir_and_support_clauses() {
        let w = world();
        let c = compile(&w, CompileOptions::default()).unwrap();
        let set = clause_set(&w, &c);
        assert!(has(
            &set,
            None,
            &["!F_On(o2,o1)", "!F_Pos(o1)", "q1[X=o2,Y=o1]"]
        ));
        assert!(has(&set, None, &["!q1[X=o2,Y=o1]", "F_Pos(o2)"]));
        assert!(has(
            &set,
            None,
            &[
                "!F_Pos(o2)",
                "C_Push(r1,o2)",
                "C_StrongPush(r1,o2)",
                "q1[X=o2,Y=o1]"
            ]
        ));
        assert!(has(&set, None, &["F_On(o2,o1)"]));
        assert!(has(&set, None, &["!C_StrongPush(r1,o1)", "!F_On(o1,o2)"]));
    }

    #[test]
    fn running_example_levels_only_on_position_cycle() {
        // q1 links F_Pos(o1) and F_Pos(o2) in both directions
        let w = world();
        assert!(has_cyclic_dependencies(&w));
        let plain = compile(
            &w,
            CompileOptions {
                encoding: EncodingMode::Plain,
                ..Default::default()
            },
        )
        .unwrap();
        let acyclic = compile(&w, CompileOptions::default()).unwrap();
        assert_eq!(plain.stats().get(ClauseGroup::Level), 0);
        // one level variable per cycle atom; two clauses per cycle edge
        assert_eq!(acyclic.vars.len(), plain.vars.len() + 2);
        assert_eq!(acyclic.stats().get(ClauseGroup::Level), 4);
        let mut without_levels = acyclic.stats();
        without_levels.hard.remove(&ClauseGroup::Level);
        assert_eq!(without_levels, plain.stats());
    }

    #[test]
    fn running_example_optimum_decodes() {
        let w = world();
        let c = compile(&w, CompileOptions::default()).unwrap();
        let p = c.to_wcnf().unwrap();
        let SolveOutcome::Optimal { model, cost } = solve(&p, Budget::unlimited()) else {
            panic!()
        };
        assert_eq!(cost, 0);
        let a = decode(&w, &c.vars, &model);
        let caps: Vec<String> = a.activated.iter().map(|x| w.cap_name(*x)).collect();
        assert_eq!(caps, vec!["C_StrongPush(r1,o1)"]);
        assert_eq!(a.task_ids(&w), vec!["t1", "t2"]);
        assert_eq!(a.utility, 4);
        let all_false = vec![false; p.num_vars];
        assert!(!evaluate(&p, &all_false).unwrap().0);
        assert_eq!(decode(&w, &c.vars, &all_false), Assignment::default());
    }

    #[test]
    fn soft_alpha_mode_has_same_optimum() {
        let w = world();
        let c = compile(
            &w,
            CompileOptions {
                hard_weights: HardWeightMode::SoftAlpha,
                ..Default::default()
            },
        )
        .unwrap();
        let p = c.to_wcnf().unwrap();
        assert_eq!(p.hard_clauses().count(), 0);
        let SolveOutcome::Optimal { model, cost } = solve(&p, Budget::unlimited()) else {
            panic!()
        };
        assert_eq!(cost, 0);
        assert_eq!(decode(&w, &c.vars, &model).utility, 4);
    }

    #[test]
    fn pins_add_units_and_reject_contradictions() {
        let w = world();
        let base = compile(&w, CompileOptions::default()).unwrap();
        let pos = base
            .vars
            .atom(w.find_atom(&parse_atom("F_Pos(o1)").unwrap()).unwrap());
        let push = base.vars.cap(
            w.find_capability(&parse_atom("C_Push(r1,o1)").unwrap())
                .unwrap(),
        );
        let all: Vec<usize> = (0..w.tasks.len()).collect();
        let c = compile_restricted(&w, &all, &[pos, -push], CompileOptions::default()).unwrap();
        assert_eq!(c.stats().get(ClauseGroup::Pin), 2);
        assert_eq!(c.num_clauses(), base.num_clauses() + 2);
        assert_eq!(
            compile_restricted(&w, &all, &[pos, -pos], CompileOptions::default()),
            Err(CompileError::ContradictoryPins(pos as u32))
        );
    }

    #[test]
    fn map_file_lists_every_variable() {
        let w = world();
        let c = compile(&w, CompileOptions::default()).unwrap();
        let map = c.vars.map_file(&w);
        assert_eq!(map.lines().count(), c.vars.len());
        assert!(map.lines().any(|l| l.ends_with(" cap C_StrongPush(r1,o1)")));
        assert!(map.lines().any(|l| l.ends_with(" task-inst t1#1")));
    }

    #[test]
    fn compilation_is_deterministic() {
        let a = write_wcnf(
            &compile(&world(), CompileOptions::default())
                .unwrap()
                .to_wcnf()
                .unwrap(),
        );
        let b = write_wcnf(
            &compile(&world(), CompileOptions::default())
                .unwrap()
                .to_wcnf()
                .unwrap(),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn utility_overflow_detected() {
        let doc = "PREDICATES: P/0\nTASKS:\n a: {P} @ 9223372036854775807\n b: {P} @ 9223372036854775807\n c: {P} @ 9\n";
        let w = ground(&parse_instance(doc).unwrap()).unwrap();
        assert_eq!(
            compile(&w, CompileOptions::default()),
            Err(CompileError::WeightOverflow)
        );
    }

    #[test]
    fn circular_support_needs_levels() {
        // P(a) and Q(a) imply each other; nothing generates either.
        let doc = "PREDICATES: P/1 Q/1\nOBJECTS: a\nCIRS:\n q1: {P(X)} -> Q(X)\n q2: {Q(X)} -> P(X)\nTASKS:\n t: {P(a)} @ 2\n";
        let w = ground(&parse_instance(doc).unwrap()).unwrap();
        assert!(has_cyclic_dependencies(&w));
        let solve_mode = |encoding| {
            let c = compile(
                &w,
                CompileOptions {
                    encoding,
                    ..Default::default()
                },
            )
            .unwrap();
            match solve(&c.to_wcnf().unwrap(), Budget::unlimited()) {
                SolveOutcome::Optimal { model, .. } => decode(&w, &c.vars, &model).utility,
                o => panic!("{o:?}"),
            }
        };
        assert_eq!(solve_mode(EncodingMode::Plain), 2);
        assert_eq!(solve_mode(EncodingMode::Acyclic), 0);
    }
}
