//! Exhaustive reference solver over sets of activated capabilities.
//!
//! Incompatibility is inherited by supersets, so a depth-first search that
//! only extends compatible sets visits exactly the compatible sets, in
//! lexicographic order of their sorted capability ids.

use thiserror::Error;

use crate::compat::{closure, fulfilled_tasks, verdict};
use crate::ground::{CapId, GroundWorld};

pub const DEFAULT_MAX_CAPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Refuse worlds with more ground capabilities than this.
    pub max_caps: usize,
    /// Check all 2^k subsets instead of the pruned search.
    pub full_scan: bool,
    /// Stop once every task is fulfilled.
    pub stop_at_total: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_caps: DEFAULT_MAX_CAPS,
            full_scan: false,
            stop_at_total: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{count} ground capabilities exceed the oracle cap of {cap}")]
    TooManyCapabilities { count: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub utility: u64,
    /// Best compatible set: highest utility, then fewest capabilities, then
    /// lexicographically smallest. `None` when no set (not even the empty
    /// one) is compatible.
    pub witness: Option<Vec<CapId>>,
    /// Tasks fulfilled by the witness.
    pub tasks: Vec<usize>,
    /// Number of compatible sets examined.
    pub compatible_sets: u64,
}

struct Search<'a> {
    world: &'a GroundWorld,
    best: Option<(u64, Vec<CapId>, Vec<usize>)>,
    compatible_sets: u64,
    total: u64,
    stop_at_total: bool,
}

impl Search<'_> {
    /// Evaluates `set`; returns whether it is compatible.
    fn visit(&mut self, set: &[CapId]) -> bool {
        let cl = closure(self.world, set);
        if !verdict(self.world, &cl).is_compatible() {
            return false;
        }
        self.compatible_sets += 1;
        let tasks = fulfilled_tasks(self.world, &cl);
        let utility: u64 = tasks.iter().map(|t| self.world.tasks[*t].utility).sum();
        let better = match &self.best {
            None => true,
            Some((u, w, _)) => {
                utility > *u || (utility == *u && (set.len(), set) < (w.len(), w.as_slice()))
            }
        };
        if better {
            self.best = Some((utility, set.to_vec(), tasks));
        }
        true
    }

    fn done(&self) -> bool {
        self.stop_at_total && self.best.as_ref().is_some_and(|b| b.0 == self.total)
    }

    fn dfs(&mut self, set: &mut Vec<CapId>, next: usize) {
        for j in next..self.world.capabilities.len() {
            if self.done() {
                return;
            }
            set.push(CapId(j as u32));
            if self.visit(set) {
                self.dfs(set, j + 1);
            }
            set.pop();
        }
    }
}

/// Finds a maximum-utility compatible set of capabilities.
pub fn solve_oracle(
    world: &GroundWorld,
    options: OracleOptions,
) -> Result<OracleResult, OracleError> {
    let k = world.capabilities.len();
    if k > options.max_caps {
        return Err(OracleError::TooManyCapabilities {
            count: k,
            cap: options.max_caps,
        });
    }
    let mut search = Search {
        world,
        best: None,
        compatible_sets: 0,
        total: world.total_utility(),
        stop_at_total: options.stop_at_total,
    };
    if options.full_scan {
        for mask in 0..1u64 << k {
            let set: Vec<CapId> = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| CapId(i as u32))
                .collect();
            search.visit(&set);
        }
    } else if search.visit(&[]) {
        search.dfs(&mut Vec::new(), 0);
    }
    let compatible_sets = search.compatible_sets;
    Ok(match search.best {
        Some((utility, witness, tasks)) => OracleResult {
            utility,
            witness: Some(witness),
            tasks,
            compatible_sets,
        },
        None => OracleResult {
            utility: 0,
            witness: None,
            tasks: Vec::new(),
            compatible_sets,
        },
    })
}
