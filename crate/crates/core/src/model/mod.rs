//! Domain types for task-allocation instances, the textual instance format
//! and its JSON mirror, and structural validation.
//!
//! An [`Instance`] is built in two steps. The parsers produce a
//! [`RawInstance`] whose task requirements are still unclassified calls;
//! [`validate`] resolves every reference, classifies requirements as atoms
//! or capability patterns, and checks the well-formedness rules.

mod json;
mod syntax;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use json::{instance_from_json, instance_to_json};
pub use syntax::{parse_atom, parse_instance, parse_raw_instance, serialize_instance};

/// Errors raised while parsing or validating an instance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown robot `{0}`")]
    UnknownRobot(String),
    #[error("unknown capability `{0}`")]
    UnknownCapability(String),
    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unsafe CIR `{cir}`: consequent variable `{var}` does not occur in the antecedents")]
    UnsafeCir { cir: String, var: String },
    #[error("CIR `{0}` has no antecedents")]
    EmptyCir(String),
    #[error("task `{0}` has no requirements")]
    EmptyTask(String),
    #[error("task `{task}` has non-positive utility {utility}")]
    NonPositiveUtility { task: String, utility: i64 },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("invalid capability `{name}`: {reason}")]
    InvalidCapability { name: String, reason: String },
    #[error("invalid robot `{robot}`: {reason}")]
    InvalidRobot { robot: String, reason: String },
    #[error("{context}: atom `{atom}` must be ground")]
    NonGround { context: &'static str, atom: String },
    #[error("delta removes `{0}`, which is not present")]
    DeltaRemoveMissing(String),
    #[error("domain element `{0}` must not start with an uppercase letter or `_`")]
    BadConstant(String),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateSchema {
    pub name: String,
    pub arity: usize,
}

/// A referent: a domain constant or a variable label.
///
/// Variables start with an uppercase letter or `_`, constants with anything
/// else.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn from_ident(ident: &str) -> Self {
        if is_variable_name(ident) {
            Term::Var(ident.to_string())
        } else {
            Term::Const(ident.to_string())
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Const(s) | Term::Var(s) => s,
        }
    }
}

pub(crate) fn is_variable_name(ident: &str) -> bool {
    ident
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_uppercase() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A predicate applied to referents. Also used, unchanged, for capability
/// references (`C_Push(r1,X)`), which share the call syntax.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A reference to a capability schema, as written in a robot declaration or
/// a task requirement. The first argument is the owner robot.
pub type CapabilityRef = Atom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    /// The atom becomes constrained when the capability is activated.
    Constrains,
    /// The atom must not be constrained by anything.
    RequiresUnconstrained,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EffectLiteral {
    pub atom: Atom,
    pub polarity: Polarity,
}

impl fmt::Display for EffectLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::RequiresUnconstrained {
            f.write_str("!")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapabilitySchema {
    pub name: String,
    /// Parameter variable labels; the first one is the owner slot.
    pub params: Vec<String>,
    pub effects: Vec<EffectLiteral>,
}

impl CapabilitySchema {
    pub fn constrains(&self) -> impl Iterator<Item = &Atom> {
        self.effects
            .iter()
            .filter(|e| e.polarity == Polarity::Constrains)
            .map(|e| &e.atom)
    }

    pub fn requires_unconstrained(&self) -> impl Iterator<Item = &Atom> {
        self.effects
            .iter()
            .filter(|e| e.polarity == Polarity::RequiresUnconstrained)
            .map(|e| &e.atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Robot {
    pub id: String,
    pub capabilities: Vec<CapabilityRef>,
}

/// Constraint implication rule: constraints on every antecedent imply a
/// constraint on the consequent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cir {
    pub id: String,
    pub antecedents: Vec<Atom>,
    pub consequent: Atom,
}

impl Cir {
    pub fn vars(&self) -> BTreeSet<&str> {
        self.antecedents.iter().flat_map(|a| a.vars()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Requirement {
    Atom(Atom),
    Capability(CapabilityRef),
}

impl Requirement {
    pub fn call(&self) -> &Atom {
        match self {
            Requirement::Atom(a) | Requirement::Capability(a) => a,
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.call())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    pub requirements: Vec<Requirement>,
    pub utility: u64,
}

impl Task {
    pub fn has_atom_requirement(&self) -> bool {
        self.requirements
            .iter()
            .any(|r| matches!(r, Requirement::Atom(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeltaOp {
    Add(Atom),
    Remove(Atom),
}

impl fmt::Display for DeltaOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaOp::Add(a) => write!(f, "+{a}"),
            DeltaOp::Remove(a) => write!(f, "-{a}"),
        }
    }
}

/// A validated instance. Immutable after construction through [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub predicates: Vec<PredicateSchema>,
    pub objects: Vec<String>,
    pub robots: Vec<Robot>,
    pub capabilities: Vec<CapabilitySchema>,
    pub cirs: Vec<Cir>,
    pub tasks: Vec<Task>,
    pub init: Vec<Atom>,
    pub delta: Vec<DeltaOp>,
}

impl Instance {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn capability(&self, name: &str) -> Option<&CapabilitySchema> {
        self.capabilities.iter().find(|c| c.name == name)
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn total_utility(&self) -> u64 {
        self.tasks.iter().map(|t| t.utility).sum()
    }

    /// Returns the same instance with only the tasks accepted by `keep`.
    pub fn with_tasks_filtered(&self, mut keep: impl FnMut(&Task) -> bool) -> Instance {
        let mut out = self.clone();
        out.tasks.retain(|t| keep(t));
        out
    }
}

/// Parser output before reference resolution. Task requirements are kept as
/// plain calls because atoms and capability patterns share one syntax.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub predicates: Vec<PredicateSchema>,
    pub objects: Vec<String>,
    pub robots: Vec<Robot>,
    pub capabilities: Vec<CapabilitySchema>,
    pub cirs: Vec<Cir>,
    pub tasks: Vec<RawTask>,
    pub init: Vec<Atom>,
    pub delta: Vec<DeltaOp>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTask {
    pub id: String,
    pub requirements: Vec<Atom>,
    pub utility: i64,
}

struct Checker<'a> {
    predicates: BTreeMap<&'a str, usize>,
    capabilities: BTreeMap<&'a str, &'a CapabilitySchema>,
    objects: BTreeSet<&'a str>,
    robots: BTreeSet<&'a str>,
}

impl Checker<'_> {
    fn is_constant(&self, c: &str) -> bool {
        self.objects.contains(c) || self.robots.contains(c)
    }

    fn check_constants(&self, atom: &Atom) -> Result<(), ModelError> {
        for t in &atom.args {
            if let Term::Const(c) = t {
                if !self.is_constant(c) {
                    return Err(ModelError::UnknownObject(c.clone()));
                }
            }
        }
        Ok(())
    }

    fn check_atom(&self, atom: &Atom) -> Result<(), ModelError> {
        let arity = *self
            .predicates
            .get(atom.predicate.as_str())
            .ok_or_else(|| ModelError::UnknownPredicate(atom.predicate.clone()))?;
        if arity != atom.args.len() {
            return Err(ModelError::ArityMismatch {
                name: atom.predicate.clone(),
                expected: arity,
                found: atom.args.len(),
            });
        }
        self.check_constants(atom)
    }

    fn check_ground_atom(&self, atom: &Atom, context: &'static str) -> Result<(), ModelError> {
        self.check_atom(atom)?;
        if !atom.is_ground() {
            return Err(ModelError::NonGround {
                context,
                atom: atom.to_string(),
            });
        }
        Ok(())
    }

    fn check_cap_ref(&self, cap: &CapabilityRef) -> Result<(), ModelError> {
        let schema = self
            .capabilities
            .get(cap.predicate.as_str())
            .ok_or_else(|| ModelError::UnknownCapability(cap.predicate.clone()))?;
        if schema.params.len() != cap.args.len() {
            return Err(ModelError::ArityMismatch {
                name: cap.predicate.clone(),
                expected: schema.params.len(),
                found: cap.args.len(),
            });
        }
        for (i, t) in cap.args.iter().enumerate() {
            if let Term::Const(c) = t {
                if i == 0 {
                    if !self.robots.contains(c.as_str()) {
                        return Err(ModelError::UnknownRobot(c.clone()));
                    }
                } else if !self.is_constant(c) {
                    return Err(ModelError::UnknownObject(c.clone()));
                }
            }
        }
        Ok(())
    }
}

fn check_unique<'a>(
    kind: &'static str,
    names: impl IntoIterator<Item = &'a str>,
) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::Duplicate {
                kind,
                name: n.to_string(),
            });
        }
    }
    Ok(())
}

/// Resolves references and checks every structural rule, producing an
/// [`Instance`].
pub fn validate(raw: RawInstance) -> Result<Instance, ModelError> {
    check_unique("predicate", raw.predicates.iter().map(|p| p.name.as_str()))?;
    check_unique("object", raw.objects.iter().map(String::as_str))?;
    check_unique("robot", raw.robots.iter().map(|r| r.id.as_str()))?;
    check_unique(
        "capability",
        raw.capabilities.iter().map(|c| c.name.as_str()),
    )?;
    check_unique("CIR", raw.cirs.iter().map(|c| c.id.as_str()))?;
    check_unique("task", raw.tasks.iter().map(|t| t.id.as_str()))?;

    for id in raw.objects.iter().chain(raw.robots.iter().map(|r| &r.id)) {
        if is_variable_name(id) {
            return Err(ModelError::BadConstant(id.clone()));
        }
    }

    let checker = Checker {
        predicates: raw
            .predicates
            .iter()
            .map(|p| (p.name.as_str(), p.arity))
            .collect(),
        capabilities: raw
            .capabilities
            .iter()
            .map(|c| (c.name.as_str(), c))
            .collect(),
        objects: raw.objects.iter().map(String::as_str).collect(),
        robots: raw.robots.iter().map(|r| r.id.as_str()).collect(),
    };

    for cap in &raw.capabilities {
        if checker.predicates.contains_key(cap.name.as_str()) {
            return Err(ModelError::Duplicate {
                kind: "predicate/capability name",
                name: cap.name.clone(),
            });
        }
        validate_capability(&checker, cap)?;
    }

    for robot in &raw.robots {
        let mut seen = BTreeSet::new();
        for cap in &robot.capabilities {
            checker.check_cap_ref(cap)?;
            match cap.args.first() {
                Some(Term::Const(owner)) if *owner == robot.id => {}
                _ => {
                    return Err(ModelError::InvalidRobot {
                        robot: robot.id.clone(),
                        reason: format!("`{cap}` must name `{}` as its first argument", robot.id),
                    })
                }
            }
            if !seen.insert(cap) {
                return Err(ModelError::Duplicate {
                    kind: "robot capability",
                    name: cap.to_string(),
                });
            }
        }
    }

    for cir in &raw.cirs {
        if cir.antecedents.is_empty() {
            return Err(ModelError::EmptyCir(cir.id.clone()));
        }
        for a in cir
            .antecedents
            .iter()
            .chain(std::iter::once(&cir.consequent))
        {
            checker.check_atom(a)?;
        }
        let vars = cir.vars();
        if let Some(v) = cir.consequent.vars().find(|v| !vars.contains(v)) {
            return Err(ModelError::UnsafeCir {
                cir: cir.id.clone(),
                var: v.to_string(),
            });
        }
    }

    let mut tasks = Vec::with_capacity(raw.tasks.len());
    for task in raw.tasks {
        if task.requirements.is_empty() {
            return Err(ModelError::EmptyTask(task.id));
        }
        if task.utility < 1 {
            return Err(ModelError::NonPositiveUtility {
                task: task.id,
                utility: task.utility,
            });
        }
        let mut requirements = Vec::with_capacity(task.requirements.len());
        for call in task.requirements {
            if checker.capabilities.contains_key(call.predicate.as_str()) {
                checker.check_cap_ref(&call)?;
                requirements.push(Requirement::Capability(call));
            } else {
                checker.check_atom(&call)?;
                requirements.push(Requirement::Atom(call));
            }
        }
        tasks.push(Task {
            id: task.id,
            requirements,
            utility: task.utility as u64,
        });
    }

    let mut init_seen = BTreeSet::new();
    for a in &raw.init {
        checker.check_ground_atom(a, "INIT")?;
        if !init_seen.insert(a) {
            return Err(ModelError::Duplicate {
                kind: "initial atom",
                name: a.to_string(),
            });
        }
    }
    for op in &raw.delta {
        let (DeltaOp::Add(a) | DeltaOp::Remove(a)) = op;
        checker.check_ground_atom(a, "DELTA")?;
    }

    let instance = Instance {
        predicates: raw.predicates,
        objects: raw.objects,
        robots: raw.robots,
        capabilities: raw.capabilities,
        cirs: raw.cirs,
        tasks,
        init: raw.init,
        delta: raw.delta,
    };
    apply_delta(&instance)?;
    Ok(instance)
}

fn validate_capability(checker: &Checker<'_>, cap: &CapabilitySchema) -> Result<(), ModelError> {
    let invalid = |reason: String| ModelError::InvalidCapability {
        name: cap.name.clone(),
        reason,
    };
    if cap.params.is_empty() {
        return Err(invalid("needs at least the owner parameter".into()));
    }
    let mut params = BTreeSet::new();
    for p in &cap.params {
        if !is_variable_name(p) {
            return Err(invalid(format!("parameter `{p}` is not a variable")));
        }
        if !params.insert(p.as_str()) {
            return Err(invalid(format!("parameter `{p}` repeated")));
        }
    }
    if cap.constrains().next().is_none() {
        return Err(invalid("no constraining effect".into()));
    }
    for e in &cap.effects {
        checker.check_atom(&e.atom)?;
        if e.polarity == Polarity::Constrains {
            if let Some(v) = e.atom.vars().find(|v| !params.contains(v)) {
                return Err(invalid(format!(
                    "variable `{v}` in constraining effect `{}` is not a parameter",
                    e.atom
                )));
            }
        }
    }
    Ok(())
}

/// Applies the reconfiguration rewrite list to the initial constraints:
/// operations run in listed order. Adding an atom already present is a
/// no-op; removing an absent one is an error.
pub fn apply_delta(instance: &Instance) -> Result<BTreeSet<Atom>, ModelError> {
    let mut state: BTreeSet<Atom> = instance.init.iter().cloned().collect();
    for op in &instance.delta {
        match op {
            DeltaOp::Add(a) => {
                state.insert(a.clone());
            }
            DeltaOp::Remove(a) => {
                if !state.remove(a) {
                    return Err(ModelError::DeltaRemoveMissing(a.to_string()));
                }
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const RUNNING: &str = include_str!("../../../../fixtures/running_example.tampic");

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    #[test]
    fn running_example_counts() {
        let inst = parse_instance(RUNNING).unwrap();
        assert_eq!(inst.robots.len(), 1);
        assert_eq!(inst.tasks.len(), 2);
        assert_eq!(inst.cirs.len(), 2);
        assert_eq!(inst.init.len(), 3);
        assert_eq!(inst.total_utility(), 4);
        assert_eq!(inst.capabilities.len(), 2);
    }

    #[test]
    fn empty_delta_is_identity() {
        let inst = parse_instance(RUNNING).unwrap();
        let ip = apply_delta(&inst).unwrap();
        let expected: BTreeSet<Atom> = ["F_On(o2,o1)", "F_Weight(o1)", "F_Weight(o2)"]
            .into_iter()
            .map(atom)
            .collect();
        assert_eq!(ip, expected);
    }

    #[test]
    fn delta_rewrites_in_order() {
        let mut inst = parse_instance(RUNNING).unwrap();
        inst.delta = vec![
            DeltaOp::Remove(atom("F_On(o2,o1)")),
            DeltaOp::Add(atom("F_On(o1,o2)")),
        ];
        let ip = apply_delta(&inst).unwrap();
        let expected: BTreeSet<Atom> = ["F_On(o1,o2)", "F_Weight(o1)", "F_Weight(o2)"]
            .into_iter()
            .map(atom)
            .collect();
        assert_eq!(ip, expected);
    }

    #[test]
    fn delta_removing_missing_atom_fails() {
        let mut inst = parse_instance(RUNNING).unwrap();
        inst.delta = vec![DeltaOp::Remove(atom("F_Pos(o1)"))];
        assert_eq!(
            apply_delta(&inst),
            Err(ModelError::DeltaRemoveMissing("F_Pos(o1)".into()))
        );
    }

    #[test]
    fn unsafe_cir_rejected() {
        let doc = RUNNING.replace(
            "q1: {F_On(X,Y), F_Pos(Y)} -> F_Pos(X)",
            "q1: {F_On(X,Y), F_Pos(Y)} -> F_Pos(Z)",
        );
        assert!(matches!(
            parse_instance(&doc),
            Err(ModelError::UnsafeCir { ref cir, ref var }) if cir == "q1" && var == "Z"
        ));
    }

    #[test]
    fn empty_task_section_parses() {
        let doc = RUNNING
            .replace("t1: {F_Pos(o1)} @ 1", "")
            .replace("t2: {F_Pos(o2)} @ 3", "");
        let inst = parse_instance(&doc).unwrap();
        assert!(inst.tasks.is_empty());
    }

    #[test]
    fn empty_requirements_rejected() {
        let doc = RUNNING.replace("t1: {F_Pos(o1)} @ 1", "t1: {} @ 1");
        assert_eq!(
            parse_instance(&doc),
            Err(ModelError::EmptyTask("t1".into()))
        );
    }

    #[test]
    fn non_positive_utility_rejected() {
        let doc = RUNNING.replace("t1: {F_Pos(o1)} @ 1", "t1: {F_Pos(o1)} @ 0");
        assert!(matches!(
            parse_instance(&doc),
            Err(ModelError::NonPositiveUtility { utility: 0, .. })
        ));
        let doc = RUNNING.replace("t1: {F_Pos(o1)} @ 1", "t1: {F_Pos(o1)} @ -2");
        assert!(matches!(
            parse_instance(&doc),
            Err(ModelError::NonPositiveUtility { utility: -2, .. })
        ));
    }

    #[test]
    fn unknown_references_rejected() {
        let doc = RUNNING.replace("F_Weight(o2)\n", "F_Weight(o9)\n");
        assert_eq!(
            parse_instance(&doc),
            Err(ModelError::UnknownObject("o9".into()))
        );
        let doc = RUNNING.replace("t1: {F_Pos(o1)}", "t1: {F_Size(o1)}");
        assert_eq!(
            parse_instance(&doc),
            Err(ModelError::UnknownPredicate("F_Size".into()))
        );
        let doc = RUNNING.replace("t1: {F_Pos(o1)}", "t1: {F_Pos(o1,o2)}");
        assert!(matches!(
            parse_instance(&doc),
            Err(ModelError::ArityMismatch {
                expected: 1,
                found: 2,
                ..
            })
        ));
        let doc = RUNNING.replace("t1: {F_Pos(o1)}", "t1: {C_Push(r7,o1)}");
        assert_eq!(
            parse_instance(&doc),
            Err(ModelError::UnknownRobot("r7".into()))
        );
    }

    #[test]
    fn robot_owner_slot_enforced() {
        let doc = RUNNING.replace("C_Push(r1,X) C_StrongPush", "C_Push(o1,X) C_StrongPush");
        assert!(matches!(
            parse_instance(&doc),
            Err(ModelError::InvalidRobot { .. }) | Err(ModelError::UnknownRobot(_))
        ));
    }

    #[test]
    fn positive_effect_with_free_variable_rejected() {
        let doc = RUNNING.replace(
            "C_StrongPush(X,Y) -> F_Pos(X)",
            "C_StrongPush(X,Y) -> F_Pos(W)",
        );
        assert!(matches!(
            parse_instance(&doc),
            Err(ModelError::InvalidCapability { .. })
        ));
    }

    #[test]
    fn parsing_is_deterministic() {
        assert_eq!(parse_instance(RUNNING), parse_instance(RUNNING));
    }
}
