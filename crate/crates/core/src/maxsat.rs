//! Weighted MAX-SAT problems, DIMACS WCNF I/O and an exact
//! branch-and-bound solver.
//!
//! A clause is hard when its weight reaches `top`. The solver minimises the
//! total weight of falsified soft clauses subject to every hard clause.
//! Hard clauses propagate through two watched literals; soft clauses are only
//! counted, and the bound is the weight of soft clauses already falsified.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WClause {
    pub weight: u64,
    /// DIMACS literals: `v` or `-v` for variable `v >= 1`.
    pub lits: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wcnf {
    pub num_vars: usize,
    pub top: u64,
    pub clauses: Vec<WClause>,
}

impl Wcnf {
    pub fn is_hard(&self, clause: &WClause) -> bool {
        clause.weight >= self.top
    }

    pub fn hard_clauses(&self) -> impl Iterator<Item = &WClause> {
        self.clauses.iter().filter(|c| self.is_hard(c))
    }

    pub fn soft_clauses(&self) -> impl Iterator<Item = &WClause> {
        self.clauses.iter().filter(|c| !self.is_hard(c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WcnfError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: literal {lit} out of range 1..={num_vars}")]
    LiteralOutOfRange {
        line: usize,
        lit: i64,
        num_vars: usize,
    },
    #[error("line {line}: weight {weight} exceeds top {top}")]
    WeightExceedsTop { line: usize, weight: u64, top: u64 },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("model has {found} values, problem has {expected} variables")]
    ModelLength { expected: usize, found: usize },
}

/// Writes the classic `p wcnf` format.
pub fn write_wcnf(problem: &Wcnf) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "p wcnf {} {} {}",
        problem.num_vars,
        problem.clauses.len(),
        problem.top
    )
    .unwrap();
    for c in &problem.clauses {
        write!(out, "{}", c.weight).unwrap();
        for l in &c.lits {
            write!(out, " {l}").unwrap();
        }
        out.push_str(" 0\n");
    }
    out
}

/// Reads the classic `p wcnf` format. Lines starting with `c` are comments;
/// a clause may span several lines and ends at literal `0`.
pub fn read_wcnf(text: &str) -> Result<Wcnf, WcnfError> {
    let mut header: Option<(usize, usize, u64)> = None;
    let mut clauses = Vec::new();
    let mut current: Option<(u64, Vec<i32>, usize)> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(WcnfError::MalformedHeader("duplicate header".into()));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 5 || parts[0] != "p" || parts[1] != "wcnf" {
                return Err(WcnfError::MalformedHeader(trimmed.to_string()));
            }
            let num = |s: &str| -> Result<u64, WcnfError> {
                s.parse()
                    .map_err(|_| WcnfError::MalformedHeader(trimmed.to_string()))
            };
            let (n, m, top) = (num(parts[2])?, num(parts[3])?, num(parts[4])?);
            if top == 0 || n > i32::MAX as u64 {
                return Err(WcnfError::MalformedHeader(trimmed.to_string()));
            }
            header = Some((n as usize, m as usize, top));
            continue;
        }
        let Some((num_vars, _, top)) = header else {
            return Err(WcnfError::MalformedHeader("clause before header".into()));
        };
        for tok in trimmed.split_whitespace() {
            let value: i64 = tok.parse().map_err(|_| WcnfError::Parse {
                line: line_no,
                msg: format!("bad token `{tok}`"),
            })?;
            match current.as_mut() {
                None => {
                    if value <= 0 {
                        return Err(WcnfError::Parse {
                            line: line_no,
                            msg: format!("weight must be positive, found {value}"),
                        });
                    }
                    let weight = value as u64;
                    if weight > top {
                        return Err(WcnfError::WeightExceedsTop {
                            line: line_no,
                            weight,
                            top,
                        });
                    }
                    current = Some((weight, Vec::new(), line_no));
                }
                Some((weight, lits, _)) => {
                    if value == 0 {
                        clauses.push(WClause {
                            weight: *weight,
                            lits: std::mem::take(lits),
                        });
                        current = None;
                    } else {
                        if value.unsigned_abs() > num_vars as u64 {
                            return Err(WcnfError::LiteralOutOfRange {
                                line: line_no,
                                lit: value,
                                num_vars,
                            });
                        }
                        lits.push(value as i32);
                    }
                }
            }
        }
    }
    let Some((num_vars, declared, top)) = header else {
        return Err(WcnfError::MalformedHeader("missing header".into()));
    };
    if let Some((_, _, line)) = current {
        return Err(WcnfError::Parse {
            line,
            msg: "clause not terminated by 0".into(),
        });
    }
    if clauses.len() != declared {
        return Err(WcnfError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    Ok(Wcnf {
        num_vars,
        top,
        clauses,
    })
}

/// Reads a model as signed integers (an optional leading `v` per line is
/// ignored, as is `0`). Variables not mentioned are false.
pub fn read_model(text: &str, num_vars: usize) -> Result<Vec<bool>, WcnfError> {
    let mut model = vec![false; num_vars];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('c') || line.starts_with('s') || line.starts_with('o') {
            continue;
        }
        let body = line.strip_prefix('v').unwrap_or(line);
        for tok in body.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| WcnfError::Parse {
                line: i + 1,
                msg: format!("bad literal `{tok}`"),
            })?;
            if v == 0 {
                continue;
            }
            if v.unsigned_abs() > num_vars as u64 {
                return Err(WcnfError::LiteralOutOfRange {
                    line: i + 1,
                    lit: v,
                    num_vars,
                });
            }
            model[v.unsigned_abs() as usize - 1] = v > 0;
        }
    }
    Ok(model)
}

fn lit_true(model: &[bool], lit: i32) -> bool {
    model[lit.unsigned_abs() as usize - 1] == (lit > 0)
}

/// Returns whether all hard clauses hold and the weight of falsified soft
/// clauses.
pub fn evaluate(problem: &Wcnf, model: &[bool]) -> Result<(bool, u64), WcnfError> {
    if model.len() != problem.num_vars {
        return Err(WcnfError::ModelLength {
            expected: problem.num_vars,
            found: model.len(),
        });
    }
    let mut hard_ok = true;
    let mut violated = 0u64;
    for c in &problem.clauses {
        if c.lits.iter().any(|l| lit_true(model, *l)) {
            continue;
        }
        if problem.is_hard(c) {
            hard_ok = false;
        } else {
            violated = violated.saturating_add(c.weight);
        }
    }
    Ok((hard_ok, violated))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Optimal {
        model: Vec<bool>,
        cost: u64,
    },
    Infeasible,
    /// The search stopped early; `best` is the best hard-feasible model found.
    BudgetExceeded {
        best: Option<(Vec<bool>, u64)>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub incumbents: u64,
}

const UNASSIGNED: i8 = 0;
const NO_REASON: usize = usize::MAX;
const FIRST_REDUCE: usize = if cfg!(test) { 16 } else { 2000 };
const REDUCE_STEP: usize = if cfg!(test) { 8 } else { 500 };
#[cfg(test)]
thread_local! {
    static REDUCTIONS: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}
const RESTART_UNIT: u64 = if cfg!(test) { 4 } else { 64 };

#[inline]
fn lit_index(lit: i32) -> usize {
    let v = lit.unsigned_abs() as usize - 1;
    2 * v + usize::from(lit < 0)
}

#[inline]
fn var_of(lit: i32) -> usize {
    lit.unsigned_abs() as usize - 1
}

/// Max-heap of variables by activity, ties by lowest index.
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

impl VarHeap {
    const ABSENT: usize = usize::MAX;

    fn new(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![Self::ABSENT; n],
        }
    }

    #[inline]
    fn above(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != Self::ABSENT
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::above(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && Self::above(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::above(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = i;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v] = self.heap.len() - 1;
        self.sift_up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top] = Self::ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v], act);
        }
    }
}

/// Luby sequence value for restart `i` (0-based).
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) / 2;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

struct Solver {
    n: usize,
    value: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<usize>,
    trail: Vec<i32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    /// Hard clauses followed by learned ones.
    clauses: Vec<Vec<i32>>,
    num_hard: usize,
    /// Number of distinct decision levels in each learned clause.
    lbd: Vec<usize>,
    watches: Vec<Vec<usize>>,
    hard_units: Vec<i32>,
    base_cost: u64,
    soft_lits: Vec<Vec<i32>>,
    soft_w: Vec<u64>,
    soft_false: Vec<usize>,
    /// Soft clauses losing a literal when the indexed literal becomes false.
    soft_occ: Vec<Vec<usize>>,
    lb: u64,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    /// Fixed polarity for variables in soft clauses.
    soft_polarity: Vec<Option<bool>>,
    saved: Vec<bool>,
    seen: Vec<bool>,
}

enum Prepared {
    Ready(Box<Solver>),
    Infeasible,
}

enum Conflict {
    Clause(usize),
    Bound,
}

impl Solver {
    fn prepare(problem: &Wcnf) -> Prepared {
        let n = problem.num_vars;
        let mut clauses = Vec::new();
        let mut hard_units = Vec::new();
        let mut soft_lits = Vec::new();
        let mut soft_w = Vec::new();
        let mut soft_occ = vec![Vec::new(); 2 * n];
        let mut base_cost = 0u64;
        let mut pos_weight = vec![0u64; n];
        let mut neg_weight = vec![0u64; n];
        for c in &problem.clauses {
            let mut lits = c.lits.clone();
            lits.sort_unstable_by_key(|l| (l.unsigned_abs(), *l));
            lits.dedup();
            if lits.windows(2).any(|w| w[0] == -w[1]) {
                continue;
            }
            if problem.is_hard(c) {
                match lits.len() {
                    0 => return Prepared::Infeasible,
                    1 => hard_units.push(lits[0]),
                    _ => clauses.push(lits),
                }
            } else if lits.is_empty() {
                base_cost = base_cost.saturating_add(c.weight);
            } else {
                let id = soft_w.len();
                for &l in &lits {
                    soft_occ[lit_index(l)].push(id);
                    let v = var_of(l);
                    if l > 0 {
                        pos_weight[v] = pos_weight[v].saturating_add(c.weight);
                    } else {
                        neg_weight[v] = neg_weight[v].saturating_add(c.weight);
                    }
                }
                soft_w.push(c.weight);
                soft_lits.push(lits);
            }
        }
        let mut watches = vec![Vec::new(); 2 * n];
        for (i, c) in clauses.iter().enumerate() {
            watches[lit_index(c[0])].push(i);
            watches[lit_index(c[1])].push(i);
        }
        let participation: Vec<u64> = (0..n)
            .map(|v| pos_weight[v].saturating_add(neg_weight[v]))
            .collect();
        let max_part = participation.iter().copied().max().unwrap_or(0).max(1) as f64;
        let activity: Vec<f64> = participation.iter().map(|&p| p as f64 / max_part).collect();
        let soft_polarity = (0..n)
            .map(|v| (participation[v] > 0).then_some(pos_weight[v] >= neg_weight[v]))
            .collect();
        let mut heap = VarHeap::new(n);
        for v in 0..n {
            heap.insert(v, &activity);
        }
        Prepared::Ready(Box::new(Solver {
            n,
            value: vec![UNASSIGNED; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            num_hard: clauses.len(),
            lbd: Vec::new(),
            clauses,
            watches,
            hard_units,
            base_cost,
            soft_false: vec![0; soft_w.len()],
            soft_lits,
            soft_w,
            soft_occ,
            lb: base_cost,
            activity,
            var_inc: 1.0,
            heap,
            soft_polarity,
            saved: vec![false; n],
            seen: vec![false; n],
        }))
    }

    #[inline]
    fn lit_value(&self, lit: i32) -> i8 {
        let v = self.value[var_of(lit)];
        if lit > 0 {
            v
        } else {
            -v
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Assigns `lit` true. Returns false if it is already false.
    fn assign(&mut self, lit: i32, reason: usize) -> bool {
        match self.lit_value(lit) {
            1 => true,
            -1 => false,
            _ => {
                let v = var_of(lit);
                self.value[v] = if lit > 0 { 1 } else { -1 };
                self.level[v] = self.decision_level();
                self.reason[v] = reason;
                self.trail.push(lit);
                for &s in &self.soft_occ[lit_index(-lit)] {
                    self.soft_false[s] += 1;
                    if self.soft_false[s] == self.soft_lits[s].len() {
                        self.lb = self.lb.saturating_add(self.soft_w[s]);
                    }
                }
                true
            }
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let lit = self.trail.pop().unwrap();
            for &s in &self.soft_occ[lit_index(-lit)] {
                if self.soft_false[s] == self.soft_lits[s].len() {
                    self.lb -= self.soft_w[s];
                }
                self.soft_false[s] -= 1;
            }
            let v = var_of(lit);
            self.value[v] = UNASSIGNED;
            self.saved[v] = lit > 0;
            self.heap.insert(v, &self.activity);
        }
        self.qhead = self.qhead.min(len);
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() > level {
            let len = self.trail_lim[level];
            self.undo_to(len);
            self.trail_lim.truncate(level);
        }
    }

    /// Unit propagation over hard and learned clauses.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let false_lit = -self.trail[self.qhead];
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[lit_index(false_lit)]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                let first_val = {
                    let v = self.value[var_of(first)];
                    if first > 0 {
                        v
                    } else {
                        -v
                    }
                };
                if first_val == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.value[var_of(l)];
                    let lv = if l > 0 { v } else { -v };
                    if lv != -1 {
                        clause.swap(1, k);
                        self.watches[lit_index(clause[1])].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if first_val == -1 {
                    conflict = Some(ci);
                    break;
                }
                self.assign(first, ci);
                i += 1;
            }
            self.watches[lit_index(false_lit)] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn root(&mut self) -> bool {
        let units = std::mem::take(&mut self.hard_units);
        for &u in &units {
            if !self.assign(u, NO_REASON) {
                return false;
            }
        }
        self.hard_units = units;
        self.propagate().is_none()
    }

    fn model(&self) -> Vec<bool> {
        self.value.iter().map(|v| *v == 1).collect()
    }

    fn pick_branch(&mut self) -> Option<i32> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.value[v] == UNASSIGNED {
                let positive = self.soft_polarity[v].unwrap_or(self.saved[v]);
                let lit = v as i32 + 1;
                return Some(if positive { lit } else { -lit });
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    /// Falsified soft clauses whose weight, with the base cost, reaches
    /// `bound`, preferring those falsified at low decision levels. Returns
    /// the union of their literals, all currently false.
    fn bound_clause(&self, bound: u64) -> Vec<i32> {
        let mut violated: Vec<(usize, usize)> = (0..self.soft_w.len())
            .filter(|&s| self.soft_false[s] == self.soft_lits[s].len())
            .map(|s| {
                let lvl = self.soft_lits[s]
                    .iter()
                    .map(|l| self.level[var_of(*l)])
                    .max()
                    .unwrap_or(0);
                (lvl, s)
            })
            .collect();
        violated.sort_unstable();
        let mut acc = self.base_cost;
        let mut lits = Vec::new();
        for (_, s) in violated {
            if acc >= bound {
                break;
            }
            acc = acc.saturating_add(self.soft_w[s]);
            lits.extend(self.soft_lits[s].iter().copied());
        }
        lits.sort_unstable();
        lits.dedup();
        lits
    }

    /// Learns from a clause whose literals are all false and backjumps.
    /// Returns false when the clause is falsified at level 0.
    fn learn(&mut self, conflict: Vec<i32>) -> bool {
        let top = conflict
            .iter()
            .map(|l| self.level[var_of(*l)])
            .max()
            .unwrap_or(0);
        if top == 0 {
            return false;
        }
        self.cancel_until(top);
        let dl = top;
        let mut learnt = vec![0i32];
        let mut path = 0usize;
        let mut idx = self.trail.len();
        let mut lits = conflict;
        let mut p: Option<i32> = None;
        loop {
            for &q in &lits {
                if Some(q) == p {
                    continue;
                }
                let v = var_of(q);
                if self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                self.bump(v);
                if self.level[v] == dl {
                    path += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if self.seen[var_of(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            let v = var_of(lit);
            self.seen[v] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            lits = self.clauses[self.reason[v]].clone();
        }
        learnt[0] = -p.unwrap();
        for l in &learnt[1..] {
            self.seen[var_of(*l)] = false;
        }
        self.var_inc /= 0.95;

        let mut back = 0;
        if learnt.len() > 1 {
            let (k, lvl) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, l)| (k, self.level[var_of(*l)]))
                .max_by_key(|&(k, lvl)| (lvl, std::cmp::Reverse(k)))
                .unwrap();
            learnt.swap(1, k);
            back = lvl;
        }
        self.cancel_until(back);
        if learnt.len() == 1 {
            self.assign(learnt[0], NO_REASON);
        } else {
            let ci = self.clauses.len();
            self.watches[lit_index(learnt[0])].push(ci);
            self.watches[lit_index(learnt[1])].push(ci);
            let asserting = learnt[0];
            let mut levels: Vec<usize> = learnt.iter().map(|l| self.level[var_of(*l)]).collect();
            levels.sort_unstable();
            levels.dedup();
            self.lbd.push(levels.len());
            self.clauses.push(learnt);
            self.assign(asserting, ci);
        }
        true
    }

    /// Drops the less useful half of the learned clauses with more than
    /// two levels. Only called at decision level 0, where no reason clause is
    /// consulted again.
    fn reduce(&mut self) {
        #[cfg(test)]
        REDUCTIONS.with(|c| c.set(c.get() + 1));
        let mut ranked: Vec<usize> = (0..self.lbd.len()).filter(|&i| self.lbd[i] > 2).collect();
        ranked.sort_by_key(|&i| {
            (
                std::cmp::Reverse(self.lbd[i]),
                std::cmp::Reverse(self.clauses[self.num_hard + i].len()),
                i,
            )
        });
        let mut drop = vec![false; self.lbd.len()];
        for &i in &ranked[..ranked.len() / 2] {
            drop[i] = true;
        }
        let mut kept = 0;
        for (i, &dropped) in drop.iter().enumerate() {
            if !dropped {
                self.clauses.swap(self.num_hard + kept, self.num_hard + i);
                self.lbd[kept] = self.lbd[i];
                kept += 1;
            }
        }
        self.clauses.truncate(self.num_hard + kept);
        self.lbd.truncate(kept);
        for w in &mut self.watches {
            w.clear();
        }
        for (i, c) in self.clauses.iter().enumerate() {
            self.watches[lit_index(c[0])].push(i);
            self.watches[lit_index(c[1])].push(i);
        }
        for r in &mut self.reason {
            *r = NO_REASON;
        }
        // rebuilt watches may sit on literals false at level 0
        self.qhead = 0;
    }

    /// Greedy dive with every free variable false first.
    fn seed(&mut self) -> Option<(Vec<bool>, u64)> {
        let start = self.trail.len();
        let mut result = None;
        loop {
            let Some(v) = (0..self.n).find(|&v| self.value[v] == UNASSIGNED) else {
                result = Some((self.model(), self.lb));
                break;
            };
            let mark = self.trail.len();
            let neg = -(v as i32 + 1);
            if self.assign(neg, NO_REASON) && self.propagate().is_none() {
                continue;
            }
            self.undo_to(mark);
            if !(self.assign(-neg, NO_REASON) && self.propagate().is_none()) {
                break;
            }
        }
        self.undo_to(start);
        self.qhead = start;
        result
    }
}

/// Solves `problem` to optimality within `budget`.
pub fn solve(problem: &Wcnf, budget: Budget) -> SolveOutcome {
    solve_with_stats(problem, budget).0
}

/// Like [`solve`], also reporting search statistics.
///
/// Conflicts on hard clauses and bound conflicts (falsified soft weight
/// reaching the incumbent cost) are both analysed into learned clauses, which
/// stay valid for the rest of the search since the incumbent cost only
/// decreases. Search ends when a conflict reaches decision level 0.
pub fn solve_with_stats(problem: &Wcnf, budget: Budget) -> (SolveOutcome, SolveStats) {
    let mut stats = SolveStats::default();
    let mut s = match Solver::prepare(problem) {
        Prepared::Ready(s) => s,
        Prepared::Infeasible => return (SolveOutcome::Infeasible, stats),
    };
    if !s.root() {
        return (SolveOutcome::Infeasible, stats);
    }
    let start = Instant::now();
    let mut best: Option<(Vec<bool>, u64)> = s.seed();
    if best.is_some() {
        stats.incumbents += 1;
    }
    let mut restarts = 0u64;
    let mut conflicts_left = RESTART_UNIT * luby(0);
    let mut reduce_at = FIRST_REDUCE;
    loop {
        if best.as_ref().is_some_and(|b| b.1 <= s.base_cost) {
            break;
        }
        let bound = best.as_ref().map_or(u64::MAX, |b| b.1);
        let conflict = match s.propagate() {
            Some(ci) => Some(Conflict::Clause(ci)),
            None if s.lb >= bound => Some(Conflict::Bound),
            None => None,
        };
        if let Some(conflict) = conflict {
            let lits = match conflict {
                Conflict::Clause(ci) => s.clauses[ci].clone(),
                Conflict::Bound => s.bound_clause(bound),
            };
            if !s.learn(lits) {
                break;
            }
            conflicts_left = conflicts_left.saturating_sub(1);
            if conflicts_left == 0 {
                restarts += 1;
                conflicts_left = RESTART_UNIT * luby(restarts);
                s.cancel_until(0);
                if s.lbd.len() >= reduce_at {
                    s.reduce();
                    reduce_at += REDUCE_STEP;
                }
            }
            continue;
        }
        match s.pick_branch() {
            Some(lit) => {
                stats.nodes += 1;
                let over_nodes = budget.max_nodes.is_some_and(|m| stats.nodes > m);
                let over_time =
                    stats.nodes % 256 == 0 && budget.max_time.is_some_and(|t| start.elapsed() >= t);
                if over_nodes || over_time {
                    return (SolveOutcome::BudgetExceeded { best }, stats);
                }
                s.trail_lim.push(s.trail.len());
                s.assign(lit, NO_REASON);
            }
            None => {
                best = Some((s.model(), s.lb));
                stats.incumbents += 1;
            }
        }
    }
    let outcome = match best {
        Some((model, cost)) => SolveOutcome::Optimal { model, cost },
        None => SolveOutcome::Infeasible,
    };
    (outcome, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn brute_force(p: &Wcnf) -> Option<u64> {
        let mut best: Option<u64> = None;
        for m in 0..1u64 << p.num_vars {
            let model: Vec<bool> = (0..p.num_vars).map(|i| m >> i & 1 == 1).collect();
            let (ok, cost) = evaluate(p, &model).unwrap();
            if ok && best.is_none_or(|b| cost < b) {
                best = Some(cost);
            }
        }
        best
    }

    fn random_wcnf(seed: u64) -> Wcnf {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = rng.random_range(1..=20usize);
        let m = rng.random_range(0..=3 * n);
        let top = 1000;
        let clauses = (0..m)
            .map(|_| {
                let len = rng.random_range(1..=4usize.min(n + 1));
                let lits = (0..len)
                    .map(|_| {
                        let v = rng.random_range(1..=n as i32);
                        if rng.random_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect();
                let weight = if rng.random_bool(0.4) {
                    top
                } else {
                    rng.random_range(1..=30)
                };
                WClause { weight, lits }
            })
            .collect();
        Wcnf {
            num_vars: n,
            top,
            clauses,
        }
    }

    #[test]
    fn matches_exhaustive_enumeration_on_random_problems() {
        for seed in 0..500 {
            let p = random_wcnf(seed);
            let expected = brute_force(&p);
            match solve(&p, Budget::unlimited()) {
                SolveOutcome::Optimal { model, cost } => {
                    assert_eq!(Some(cost), expected, "seed {seed}");
                    assert_eq!(evaluate(&p, &model).unwrap(), (true, cost));
                }
                SolveOutcome::Infeasible => assert_eq!(expected, None, "seed {seed}"),
                other => panic!("seed {seed}: {other:?}"),
            }
        }
    }

    fn dense_wcnf(seed: u64) -> Wcnf {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = 18;
        let top = 10_000;
        let mut clauses = Vec::new();
        for _ in 0..60 {
            let lits = (0..3)
                .map(|_| {
                    let v = rng.random_range(1..=n as i32);
                    if rng.random_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            clauses.push(WClause { weight: top, lits });
        }
        for v in 1..=n as i32 {
            clauses.push(WClause {
                weight: rng.random_range(1..=9),
                lits: vec![v],
            });
        }
        Wcnf {
            num_vars: n,
            top,
            clauses,
        }
    }

    #[test]
    fn learned_clause_reduction_keeps_exactness() {
        let before = REDUCTIONS.with(|c| c.get());
        for seed in 0..40 {
            let p = dense_wcnf(seed);
            let expected = brute_force(&p);
            match solve(&p, Budget::unlimited()) {
                SolveOutcome::Optimal { model, cost } => {
                    assert_eq!(Some(cost), expected, "seed {seed}");
                    assert_eq!(evaluate(&p, &model).unwrap(), (true, cost));
                }
                SolveOutcome::Infeasible => assert_eq!(expected, None, "seed {seed}"),
                other => panic!("seed {seed}: {other:?}"),
            }
        }
        assert!(REDUCTIONS.with(|c| c.get()) > before);
    }

    #[test]
    fn zero_soft_clauses_cost_zero() {
        let p = read_wcnf("p wcnf 2 2 10\n10 1 2 0\n10 -1 0\n").unwrap();
        match solve(&p, Budget::unlimited()) {
            SolveOutcome::Optimal { model, cost } => {
                assert_eq!(cost, 0);
                assert_eq!(model, vec![false, true]);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn contradictory_hard_units_infeasible() {
        let p = read_wcnf("p wcnf 1 3 10\n10 1 0\n10 -1 0\n3 1 0\n").unwrap();
        assert_eq!(solve(&p, Budget::unlimited()), SolveOutcome::Infeasible);
    }

    #[test]
    fn clause_parses_with_weight_and_literals() {
        let p = read_wcnf("c comment\np wcnf 7 1 9\n5 -3 7 0\n").unwrap();
        assert_eq!(
            p.clauses,
            vec![WClause {
                weight: 5,
                lits: vec![-3, 7]
            }]
        );
    }

    #[test]
    fn read_errors() {
        assert!(matches!(
            read_wcnf("p wcnf 3 2 10\n1 1 0\n"),
            Err(WcnfError::ClauseCount {
                declared: 2,
                found: 1
            })
        ));
        assert!(matches!(
            read_wcnf("p cnf 3 1\n1 1 0\n"),
            Err(WcnfError::MalformedHeader(_))
        ));
        assert!(matches!(
            read_wcnf("p wcnf 3 1 10\n1 4 0\n"),
            Err(WcnfError::LiteralOutOfRange { lit: 4, .. })
        ));
        assert!(matches!(
            read_wcnf("p wcnf 3 1 10\n11 1 0\n"),
            Err(WcnfError::WeightExceedsTop { weight: 11, .. })
        ));
        assert!(matches!(
            read_wcnf("p wcnf 3 1 10\n1 1\n"),
            Err(WcnfError::Parse { .. })
        ));
    }

    #[test]
    fn model_reading_accepts_v_lines() {
        let m = read_model("s OPTIMUM FOUND\nv 1 -2\nv 3 0\n", 4).unwrap();
        assert_eq!(m, vec![true, false, true, false]);
        assert!(read_model("v 5", 4).is_err());
    }

    #[test]
    fn evaluate_checks_length() {
        let p = read_wcnf("p wcnf 2 1 10\n1 1 0\n").unwrap();
        assert!(evaluate(&p, &[true]).is_err());
        assert_eq!(evaluate(&p, &[false, false]).unwrap(), (true, 1));
    }

    #[test]
    fn node_budget_returns_feasible_incumbent() {
        let mut clauses = Vec::new();
        for v in 1..=24 {
            clauses.push(WClause {
                weight: v as u64,
                lits: vec![v],
            });
            if v > 1 {
                clauses.push(WClause {
                    weight: 1000,
                    lits: vec![-v, -(v - 1)],
                });
            }
        }
        let p = Wcnf {
            num_vars: 24,
            top: 1000,
            clauses,
        };
        match solve(
            &p,
            Budget {
                max_nodes: Some(5),
                max_time: None,
            },
        ) {
            SolveOutcome::BudgetExceeded { best: Some((m, c)) } => {
                assert_eq!(evaluate(&p, &m).unwrap(), (true, c));
            }
            o => panic!("{o:?}"),
        }
    }

    proptest! {
        #[test]
        fn write_read_round_trip(seed in any::<u64>()) {
            let p = random_wcnf(seed);
            let text = write_wcnf(&p);
            let q = read_wcnf(&text).unwrap();
            prop_assert_eq!(&q, &p);
            prop_assert_eq!(write_wcnf(&q), text);
        }
    }
}
