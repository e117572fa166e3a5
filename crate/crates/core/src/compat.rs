//! Constraint closure and compatibility of activated capability sets.
//!
//! The closure of a set of activated capabilities is the least set of atoms
//! containing I′ and every atom those capabilities constrain, and closed
//! under the ground CIRs. The set is compatible when every closed atom has
//! exactly one source and no activated capability requires an atom that
//! ends up constrained.

use std::collections::VecDeque;

use crate::ground::{AtomId, CapId, Generator, GroundWorld};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Incompatibility {
    /// A constrained atom has more than one active generator.
    MultipleSources {
        atom: AtomId,
        sources: Vec<Generator>,
    },
    /// An activated capability requires `atom` to be unconstrained.
    NegativeViolated { cap: CapId, atom: AtomId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Compatible,
    Incompatible(Incompatibility),
}

impl Verdict {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Verdict::Compatible)
    }
}

/// Result of closing a set of activated capabilities.
#[derive(Debug, Clone)]
pub struct Closure {
    constrained: Vec<bool>,
    active: Vec<bool>,
    sources: Vec<Vec<Generator>>,
}

impl Closure {
    pub fn is_constrained(&self, atom: AtomId) -> bool {
        self.constrained[atom.index()]
    }

    pub fn is_active(&self, cap: CapId) -> bool {
        self.active[cap.index()]
    }

    pub fn constrained_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.constrained
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| AtomId(i as u32))
    }

    /// Active generators of `atom`, in generator order.
    pub fn sources(&self, atom: AtomId) -> &[Generator] {
        &self.sources[atom.index()]
    }
}

/// Least fixpoint of I′, the effects of `activated` and the ground CIRs.
pub fn closure(world: &GroundWorld, activated: &[CapId]) -> Closure {
    let n = world.num_atoms();
    let mut constrained = vec![false; n];
    let mut active = vec![false; world.capabilities.len()];
    let mut queue = VecDeque::new();
    let mark = |a: AtomId, constrained: &mut Vec<bool>, queue: &mut VecDeque<AtomId>| {
        if !constrained[a.index()] {
            constrained[a.index()] = true;
            queue.push_back(a);
        }
    };
    for &a in &world.init {
        mark(a, &mut constrained, &mut queue);
    }
    for &c in activated {
        active[c.index()] = true;
        for &a in &world.capability(c).constrains {
            mark(a, &mut constrained, &mut queue);
        }
    }
    let mut missing: Vec<usize> = world.cirs.iter().map(|q| q.antecedents.len()).collect();
    let mut fired = vec![false; world.cirs.len()];
    while let Some(a) = queue.pop_front() {
        for &q in world.cirs_with_antecedent(a) {
            missing[q.index()] -= 1;
            if missing[q.index()] == 0 {
                fired[q.index()] = true;
                mark(world.cir(q).consequent, &mut constrained, &mut queue);
            }
        }
    }
    let sources = world
        .atom_ids()
        .map(|a| {
            if !constrained[a.index()] {
                return Vec::new();
            }
            world
                .generators_of(a)
                .iter()
                .copied()
                .filter(|g| match g {
                    Generator::Init => true,
                    Generator::Capability(c) => active[c.index()],
                    Generator::Cir(q) => fired[q.index()],
                })
                .collect()
        })
        .collect();
    Closure {
        constrained,
        active,
        sources,
    }
}

/// Compatibility verdict for a closure. Duplicate sources are reported
/// before violated requirements; within each kind, the lowest id first.
pub fn verdict(world: &GroundWorld, closure: &Closure) -> Verdict {
    for a in world.atom_ids() {
        let s = closure.sources(a);
        if s.len() > 1 {
            return Verdict::Incompatible(Incompatibility::MultipleSources {
                atom: a,
                sources: s.to_vec(),
            });
        }
    }
    for c in world.cap_ids() {
        if !closure.is_active(c) {
            continue;
        }
        if let Some(&atom) = world
            .capability(c)
            .requires_unconstrained
            .iter()
            .find(|a| closure.is_constrained(**a))
        {
            return Verdict::Incompatible(Incompatibility::NegativeViolated { cap: c, atom });
        }
    }
    Verdict::Compatible
}

pub fn check_compatibility(world: &GroundWorld, activated: &[CapId]) -> Verdict {
    verdict(world, &closure(world, activated))
}

/// Whether task `task` (index into `world.tasks`) has an instantiation whose
/// atoms are all constrained and whose capabilities are all activated.
pub fn task_fulfilled(world: &GroundWorld, closure: &Closure, task: usize) -> bool {
    world.tasks[task].instantiations.iter().any(|inst| {
        inst.required_atoms
            .iter()
            .all(|a| closure.is_constrained(*a))
            && inst.required_caps.iter().all(|c| closure.is_active(*c))
    })
}

/// Indices of every task fulfilled under `closure`.
pub fn fulfilled_tasks(world: &GroundWorld, closure: &Closure) -> Vec<usize> {
    (0..world.tasks.len())
        .filter(|&t| task_fulfilled(world, closure, t))
        .collect()
}

/// Outcome of checking a proposed assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentReport {
    pub verdict: Verdict,
    /// Claimed task ids that are unknown or not fulfilled.
    pub invalid_claims: Vec<String>,
    /// Total utility of the valid claims.
    pub utility: u64,
}

impl AssignmentReport {
    pub fn is_feasible(&self) -> bool {
        self.verdict.is_compatible() && self.invalid_claims.is_empty()
    }
}

/// Checks compatibility of `activated` and that each claimed task is
/// fulfilled by it.
pub fn check_assignment_feasibility(
    world: &GroundWorld,
    activated: &[CapId],
    claimed: &[String],
) -> AssignmentReport {
    let cl = closure(world, activated);
    let verdict = verdict(world, &cl);
    let mut invalid_claims = Vec::new();
    let mut utility = 0;
    for id in claimed {
        match world.task_index(id) {
            Some(t) if task_fulfilled(world, &cl, t) => utility += world.tasks[t].utility,
            _ => invalid_claims.push(id.clone()),
        }
    }
    AssignmentReport {
        verdict,
        invalid_claims,
        utility,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzz::{random_instance, FuzzConfig};
    use crate::ground::ground;
    use crate::model::{parse_atom, parse_instance};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    const RUNNING: &str = include_str!("../../../fixtures/running_example.tampic");

    fn cap(w: &GroundWorld, s: &str) -> CapId {
        w.find_capability(&parse_atom(s).unwrap()).unwrap()
    }

    fn atom(w: &GroundWorld, s: &str) -> AtomId {
        w.find_atom(&parse_atom(s).unwrap()).unwrap()
    }

    #[test]
    fn strong_push_under_o1_is_compatible() {
        let w = ground(&parse_instance(RUNNING).unwrap()).unwrap();
        let c = cap(&w, "C_StrongPush(r1,o1)");
        let cl = closure(&w, &[c]);
        assert!(cl.is_constrained(atom(&w, "F_Pos(o1)")));
        assert!(cl.is_constrained(atom(&w, "F_Pos(o2)")));
        assert_eq!(verdict(&w, &cl), Verdict::Compatible);
        assert_eq!(fulfilled_tasks(&w, &cl), vec![0, 1]);
    }

    #[test]
    fn push_under_o1_violates_derived_weight() {
        let w = ground(&parse_instance(RUNNING).unwrap()).unwrap();
        let c = cap(&w, "C_Push(r1,o1)");
        assert_eq!(
            check_compatibility(&w, &[c]),
            Verdict::Incompatible(Incompatibility::NegativeViolated {
                cap: c,
                atom: atom(&w, "F_Weight+(o1)"),
            })
        );
    }

    #[test]
    fn stacked_push_has_two_sources() {
        let w = ground(&parse_instance(RUNNING).unwrap()).unwrap();
        let c1 = cap(&w, "C_StrongPush(r1,o1)");
        let c2 = cap(&w, "C_Push(r1,o2)");
        match check_compatibility(&w, &[c1, c2]) {
            Verdict::Incompatible(Incompatibility::MultipleSources { atom: a, sources }) => {
                assert_eq!(w.atom_name(a), "F_Pos(o2)");
                assert_eq!(sources.len(), 2);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn assignment_report_flags_unfulfilled_claims() {
        let w = ground(&parse_instance(RUNNING).unwrap()).unwrap();
        let c = cap(&w, "C_StrongPush(r1,o1)");
        let r = check_assignment_feasibility(&w, &[c], &["t1".into(), "t2".into(), "t9".into()]);
        assert!(r.verdict.is_compatible());
        assert_eq!(r.invalid_claims, vec!["t9".to_string()]);
        assert_eq!(r.utility, 4);
        assert!(!r.is_feasible());
        let r = check_assignment_feasibility(&w, &[], &["t2".into()]);
        assert!(r.verdict.is_compatible());
        assert_eq!(r.invalid_claims, vec!["t2".to_string()]);
        assert_eq!(r.utility, 0);
        assert!(!r.is_feasible());
    }

    /// Closure recomputed by rescanning all rules in a shuffled order until
    /// nothing changes.
    fn naive_closure(w: &GroundWorld, activated: &[CapId], seed: u64) -> Vec<bool> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut s = vec![false; w.num_atoms()];
        for a in &w.init {
            s[a.index()] = true;
        }
        for c in activated {
            for a in &w.capability(*c).constrains {
                s[a.index()] = true;
            }
        }
        let mut order: Vec<usize> = (0..w.cirs.len()).collect();
        loop {
            order.shuffle(&mut rng);
            let mut changed = false;
            for &q in &order {
                let g = &w.cirs[q];
                if g.antecedents.iter().all(|a| s[a.index()]) && !s[g.consequent.index()] {
                    s[g.consequent.index()] = true;
                    changed = true;
                }
            }
            if !changed {
                return s;
            }
        }
    }

    /// Closure as the intersection of every atom set that contains the base
    /// constraints and is closed under the rules.
    fn brute_closure(w: &GroundWorld, activated: &[CapId]) -> Vec<bool> {
        let n = w.num_atoms();
        assert!(n <= 12);
        let mut base = 0u32;
        for a in &w.init {
            base |= 1 << a.0;
        }
        for c in activated {
            for a in &w.capability(*c).constrains {
                base |= 1 << a.0;
            }
        }
        let mut meet = (1u32 << n) - 1;
        for s in 0..(1u32 << n) {
            if s & base != base {
                continue;
            }
            let closed = w.cirs.iter().all(|g| {
                !g.antecedents.iter().all(|a| s >> a.0 & 1 == 1) || s >> g.consequent.0 & 1 == 1
            });
            if closed {
                meet &= s;
            }
        }
        (0..n).map(|i| meet >> i & 1 == 1).collect()
    }

    fn subsets(k: usize) -> impl Iterator<Item = Vec<CapId>> {
        (0..1u32 << k).map(move |m| {
            (0..k)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| CapId(i as u32))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closure_matches_independent_fixpoints(seed in any::<u64>()) {
            let inst = random_instance(seed, &FuzzConfig::tiny());
            let w = ground(&inst).unwrap();
            prop_assume!(w.num_atoms() <= 12 && w.capabilities.len() <= 6);
            for act in subsets(w.capabilities.len()) {
                let cl = closure(&w, &act);
                let fast: Vec<bool> = w.atom_ids().map(|a| cl.is_constrained(a)).collect();
                prop_assert_eq!(&fast, &naive_closure(&w, &act, seed));
                prop_assert_eq!(&fast, &brute_closure(&w, &act));
            }
        }

        #[test]
        fn incompatibility_is_upward_closed(seed in any::<u64>()) {
            let inst = random_instance(seed, &FuzzConfig::tiny());
            let w = ground(&inst).unwrap();
            let k = w.capabilities.len();
            prop_assume!(k <= 7);
            let ok: Vec<bool> = (0..1u32 << k)
                .map(|m| {
                    let act: Vec<CapId> =
                        (0..k).filter(|i| m >> i & 1 == 1).map(|i| CapId(i as u32)).collect();
                    check_compatibility(&w, &act).is_compatible()
                })
                .collect();
            for m in 0..1usize << k {
                for i in 0..k {
                    if !ok[m] {
                        prop_assert!(!ok[m | 1 << i]);
                    }
                }
            }
        }
    }
}
