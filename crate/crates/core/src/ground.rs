//! Instantiation of CIRs, capabilities and task requirements over the domain.
//!
//! Variables range over the declared objects, except variables in the owner
//! slot of a task's capability pattern, which range over robots. Within one
//! rule, capability or task, distinct variable labels bind to distinct
//! constants. Everything in a [`GroundWorld`] is sorted lexicographically by
//! names, so grounding is deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Atom, Instance, ModelError, PredicateSchema, Requirement, Term};

pub type ConstId = u32;
pub type PredId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CapId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CirId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl CapId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl CirId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A way in which an atom can become constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    Init,
    Capability(CapId),
    Cir(CirId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub pred: PredId,
    pub args: Vec<ConstId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundCapability {
    pub robot: String,
    pub name: String,
    /// One constant per schema parameter, owner first.
    pub args: Vec<ConstId>,
    pub constrains: Vec<AtomId>,
    pub requires_unconstrained: Vec<AtomId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundCir {
    /// Index of the lifted rule in the instance.
    pub rule: usize,
    pub id: String,
    /// Variable label to constant, sorted by label.
    pub binding: Vec<(String, ConstId)>,
    pub antecedents: Vec<AtomId>,
    pub consequent: AtomId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTaskInstantiation {
    /// 1-based index `k` of the instantiation within its task.
    pub index: usize,
    pub required_atoms: Vec<AtomId>,
    pub required_caps: Vec<CapId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTask {
    pub id: String,
    pub utility: u64,
    pub has_atom_requirement: bool,
    pub instantiations: Vec<GroundTaskInstantiation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("grounding exceeds the cap of {cap} ground entities")]
    TooLarge { cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    /// Maximum number of ground entities (bindings, capabilities, rule
    /// instances, task instantiations, atoms) before grounding gives up.
    pub max_entities: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_entities: 2_000_000,
        }
    }
}

/// All ground structures of an instance after the reconfiguration step.
#[derive(Debug, Clone)]
pub struct GroundWorld {
    pub constants: Vec<String>,
    pub predicates: Vec<PredicateSchema>,
    pub robots: Vec<String>,
    pub atoms: Vec<GroundAtom>,
    pub capabilities: Vec<GroundCapability>,
    pub cirs: Vec<GroundCir>,
    pub tasks: Vec<GroundTask>,
    /// I′, sorted.
    pub init: Vec<AtomId>,
    in_init: Vec<bool>,
    atom_index: HashMap<GroundAtom, AtomId>,
    generators: Vec<Vec<Generator>>,
    cirs_by_antecedent: Vec<Vec<CirId>>,
}

impl GroundWorld {
    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_init(&self, atom: AtomId) -> bool {
        self.in_init[atom.index()]
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id.index()]
    }

    pub fn capability(&self, id: CapId) -> &GroundCapability {
        &self.capabilities[id.index()]
    }

    pub fn cir(&self, id: CirId) -> &GroundCir {
        &self.cirs[id.index()]
    }

    pub fn cap_ids(&self) -> impl Iterator<Item = CapId> {
        (0..self.capabilities.len() as u32).map(CapId)
    }

    pub fn cir_ids(&self) -> impl Iterator<Item = CirId> {
        (0..self.cirs.len() as u32).map(CirId)
    }

    pub fn atom_ids(&self) -> impl Iterator<Item = AtomId> {
        (0..self.atoms.len() as u32).map(AtomId)
    }

    /// Ground CIRs having `atom` among their antecedents.
    pub fn cirs_with_antecedent(&self, atom: AtomId) -> &[CirId] {
        &self.cirs_by_antecedent[atom.index()]
    }

    /// Every generator of `atom`: `Init` first when the atom is in I′, then
    /// capabilities constraining it, then ground CIRs concluding it.
    pub fn generators_of(&self, atom: AtomId) -> &[Generator] {
        &self.generators[atom.index()]
    }

    pub fn atom_name(&self, id: AtomId) -> String {
        let a = self.atom(id);
        let mut s = self.predicates[a.pred as usize].name.clone();
        if !a.args.is_empty() {
            s.push('(');
            for (i, c) in a.args.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&self.constants[*c as usize]);
            }
            s.push(')');
        }
        s
    }

    pub fn cap_name(&self, id: CapId) -> String {
        let c = self.capability(id);
        let args: Vec<&str> = c
            .args
            .iter()
            .map(|a| self.constants[*a as usize].as_str())
            .collect();
        format!("{}({})", c.name, args.join(","))
    }

    pub fn cir_name(&self, id: CirId) -> String {
        let g = self.cir(id);
        let binding: Vec<String> = g
            .binding
            .iter()
            .map(|(v, c)| format!("{v}={}", self.constants[*c as usize]))
            .collect();
        format!("{}[{}]", g.id, binding.join(","))
    }

    pub fn generator_name(&self, g: Generator) -> String {
        match g {
            Generator::Init => "Init".to_string(),
            Generator::Capability(c) => self.cap_name(c),
            Generator::Cir(q) => self.cir_name(q),
        }
    }

    fn const_id(&self, name: &str) -> Option<ConstId> {
        self.constants
            .binary_search_by(|c| c.as_str().cmp(name))
            .ok()
            .map(|i| i as ConstId)
    }

    fn pred_id(&self, name: &str) -> Option<PredId> {
        self.predicates
            .binary_search_by(|p| p.name.as_str().cmp(name))
            .ok()
            .map(|i| i as PredId)
    }

    /// Looks up a ground model atom.
    pub fn find_atom(&self, atom: &Atom) -> Option<AtomId> {
        let pred = self.pred_id(&atom.predicate)?;
        let args = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => self.const_id(c),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        self.atom_index.get(&GroundAtom { pred, args }).copied()
    }

    /// Looks up a ground capability by its reference, e.g. `C_Push(r1,o1)`.
    pub fn find_capability(&self, cap: &Atom) -> Option<CapId> {
        let args = cap
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => self.const_id(c),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        self.capabilities
            .iter()
            .position(|c| c.name == cap.predicate && c.args == args)
            .map(|i| CapId(i as u32))
    }

    pub fn find_cir(&self, name: &str) -> Option<CirId> {
        self.cir_ids().find(|&q| self.cir_name(q) == name)
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn total_utility(&self) -> u64 {
        self.tasks.iter().map(|t| t.utility).sum()
    }

    /// Whether exchanging constants `a` and `b` everywhere maps the world
    /// onto itself: atoms, I′, capabilities, CIRs and every task's set of
    /// instantiations.
    pub fn swap_is_symmetry(&self, a: &str, b: &str) -> bool {
        let (Some(ca), Some(cb)) = (self.const_id(a), self.const_id(b)) else {
            return false;
        };
        let swap = |c: ConstId| {
            if c == ca {
                cb
            } else if c == cb {
                ca
            } else {
                c
            }
        };
        let mut atom_map = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let image = GroundAtom {
                pred: atom.pred,
                args: atom.args.iter().map(|c| swap(*c)).collect(),
            };
            match self.atom_index.get(&image) {
                Some(id) => atom_map.push(*id),
                None => return false,
            }
        }
        let map_atoms = |ids: &[AtomId]| {
            let mut v: Vec<AtomId> = ids.iter().map(|a| atom_map[a.index()]).collect();
            v.sort_unstable();
            v
        };
        let sorted = |ids: &[AtomId]| {
            let mut v = ids.to_vec();
            v.sort_unstable();
            v
        };
        if map_atoms(&self.init) != self.init {
            return false;
        }

        let cap_index: HashMap<(&str, &[ConstId]), CapId> = self
            .cap_ids()
            .map(|c| {
                let cap = self.capability(c);
                ((cap.name.as_str(), cap.args.as_slice()), c)
            })
            .collect();
        let mut cap_map = Vec::with_capacity(self.capabilities.len());
        for cap in &self.capabilities {
            let args: Vec<ConstId> = cap.args.iter().map(|c| swap(*c)).collect();
            let Some(&image) = cap_index.get(&(cap.name.as_str(), args.as_slice())) else {
                return false;
            };
            let target = self.capability(image);
            let robot = self.const_id(&cap.robot).map(swap);
            if robot != self.const_id(&target.robot)
                || map_atoms(&cap.constrains) != sorted(&target.constrains)
                || map_atoms(&cap.requires_unconstrained) != sorted(&target.requires_unconstrained)
            {
                return false;
            }
            cap_map.push(image);
        }

        let cir_key = |rule: usize, ants: Vec<AtomId>, cons: AtomId| (rule, ants, cons);
        let cirs: BTreeSet<_> = self
            .cirs
            .iter()
            .map(|q| cir_key(q.rule, sorted(&q.antecedents), q.consequent))
            .collect();
        let images: BTreeSet<_> = self
            .cirs
            .iter()
            .map(|q| {
                cir_key(
                    q.rule,
                    map_atoms(&q.antecedents),
                    atom_map[q.consequent.index()],
                )
            })
            .collect();
        if cirs != images {
            return false;
        }

        self.tasks.iter().all(|task| {
            let key = |atoms: Vec<AtomId>, mut caps: Vec<CapId>| {
                caps.sort_unstable();
                (atoms, caps)
            };
            let own: BTreeSet<_> = task
                .instantiations
                .iter()
                .map(|i| key(sorted(&i.required_atoms), i.required_caps.clone()))
                .collect();
            let images: BTreeSet<_> = task
                .instantiations
                .iter()
                .map(|i| {
                    key(
                        map_atoms(&i.required_atoms),
                        i.required_caps.iter().map(|c| cap_map[c.index()]).collect(),
                    )
                })
                .collect();
            own == images
        })
    }

    /// Deterministic text listing of the whole world.
    pub fn dump(&self) -> String {
        let names = |ids: &[AtomId]| -> String {
            ids.iter()
                .map(|a| self.atom_name(*a))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        writeln!(out, "CONSTANTS: {}", self.constants.join(" ")).unwrap();
        writeln!(out, "ATOMS: {}", self.atoms.len()).unwrap();
        for a in self.atom_ids() {
            let gens: Vec<String> = self
                .generators_of(a)
                .iter()
                .map(|g| self.generator_name(*g))
                .collect();
            writeln!(out, "  {} <- [{}]", self.atom_name(a), gens.join(", ")).unwrap();
        }
        writeln!(out, "CAPABILITIES: {}", self.capabilities.len()).unwrap();
        for c in self.cap_ids() {
            let cap = self.capability(c);
            writeln!(
                out,
                "  {} constrains {{{}}} requires-unconstrained {{{}}}",
                self.cap_name(c),
                names(&cap.constrains),
                names(&cap.requires_unconstrained)
            )
            .unwrap();
        }
        writeln!(out, "CIRS: {}", self.cirs.len()).unwrap();
        for q in self.cir_ids() {
            let g = self.cir(q);
            writeln!(
                out,
                "  {}: {{{}}} -> {}",
                self.cir_name(q),
                names(&g.antecedents),
                self.atom_name(g.consequent)
            )
            .unwrap();
        }
        writeln!(out, "TASKS: {}", self.tasks.len()).unwrap();
        for t in &self.tasks {
            writeln!(out, "  {} @ {}", t.id, t.utility).unwrap();
            for inst in &t.instantiations {
                let mut reqs: Vec<String> = inst
                    .required_atoms
                    .iter()
                    .map(|a| self.atom_name(*a))
                    .collect();
                reqs.extend(inst.required_caps.iter().map(|c| self.cap_name(*c)));
                writeln!(out, "    #{} {{{}}}", inst.index, reqs.join(", ")).unwrap();
            }
        }
        writeln!(out, "INIT: {}", names(&self.init)).unwrap();
        out
    }
}

/// Counts ground entities and enforces the size cap.
struct Budget {
    used: usize,
    cap: usize,
}

impl Budget {
    fn charge(&mut self, n: usize) -> Result<(), GroundError> {
        self.used = self.used.saturating_add(n);
        if self.used > self.cap {
            Err(GroundError::TooLarge { cap: self.cap })
        } else {
            Ok(())
        }
    }
}

/// Number of injective assignments of `k` labels to `n` constants.
fn k_permutations(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i))
}

/// Calls `f` with every assignment of one constant per domain such that all
/// chosen constants are distinct and none is in `taken`.
fn for_each_injective(
    domains: &[&[ConstId]],
    taken: &[ConstId],
    f: &mut dyn FnMut(&[ConstId]) -> Result<(), GroundError>,
) -> Result<(), GroundError> {
    fn rec(
        domains: &[&[ConstId]],
        taken: &[ConstId],
        cur: &mut Vec<ConstId>,
        f: &mut dyn FnMut(&[ConstId]) -> Result<(), GroundError>,
    ) -> Result<(), GroundError> {
        let depth = cur.len();
        if depth == domains.len() {
            return f(cur);
        }
        for &c in domains[depth] {
            if cur.contains(&c) || taken.contains(&c) {
                continue;
            }
            cur.push(c);
            rec(domains, taken, cur, f)?;
            cur.pop();
        }
        Ok(())
    }
    rec(domains, taken, &mut Vec::with_capacity(domains.len()), f)
}

struct Symbols {
    constants: Vec<String>,
    predicates: Vec<PredicateSchema>,
    objects: Vec<ConstId>,
    robots: Vec<ConstId>,
}

impl Symbols {
    fn constant(&self, name: &str) -> ConstId {
        self.constants
            .binary_search_by(|c| c.as_str().cmp(name))
            .expect("validated constant") as ConstId
    }

    fn pred(&self, name: &str) -> PredId {
        self.predicates
            .binary_search_by(|p| p.name.as_str().cmp(name))
            .expect("validated predicate") as PredId
    }

    fn ground_args(&self, terms: &[Term], binding: &BTreeMap<&str, ConstId>) -> Vec<ConstId> {
        terms
            .iter()
            .map(|t| match t {
                Term::Const(c) => self.constant(c),
                Term::Var(v) => binding[v.as_str()],
            })
            .collect()
    }

    /// Grounds `atom` under `binding`; every variable must be bound.
    fn ground(&self, atom: &Atom, binding: &BTreeMap<&str, ConstId>) -> GroundAtom {
        GroundAtom {
            pred: self.pred(&atom.predicate),
            args: self.ground_args(&atom.args, binding),
        }
    }
}

struct ProtoCap {
    robot: String,
    name: String,
    args: Vec<ConstId>,
    constrains: BTreeSet<GroundAtom>,
    requires: BTreeSet<GroundAtom>,
}

struct ProtoCir {
    rule: usize,
    id: String,
    binding: Vec<(String, ConstId)>,
    antecedents: BTreeSet<GroundAtom>,
    consequent: GroundAtom,
}

struct ProtoInst {
    atoms: BTreeSet<GroundAtom>,
    caps: BTreeSet<usize>,
}

fn ground_capabilities(
    inst: &Instance,
    sym: &Symbols,
    budget: &mut Budget,
) -> Result<Vec<ProtoCap>, GroundError> {
    let mut out: BTreeMap<(String, String, Vec<ConstId>), ProtoCap> = BTreeMap::new();
    for robot in &inst.robots {
        for cref in &robot.capabilities {
            let schema = inst
                .capability(&cref.predicate)
                .expect("validated capability");
            // Parameters fixed by the robot declaration, and the free
            // declaration variables with the parameters they fill.
            let mut fixed: Vec<(usize, ConstId)> = Vec::new();
            let mut free: Vec<(&str, Vec<usize>)> = Vec::new();
            for (i, t) in cref.args.iter().enumerate() {
                match t {
                    Term::Const(c) => fixed.push((i, sym.constant(c))),
                    Term::Var(v) => match free.iter_mut().find(|(name, _)| name == v) {
                        Some((_, slots)) => slots.push(i),
                        None => free.push((v.as_str(), vec![i])),
                    },
                }
            }
            let fixed_consts: Vec<ConstId> = fixed.iter().map(|(_, c)| *c).collect();
            let distinct_fixed: BTreeSet<_> = fixed_consts.iter().collect();
            // A declaration variable filling two parameters can never give an
            // injective binding, nor can a repeated constant.
            if distinct_fixed.len() != fixed_consts.len() || free.iter().any(|(_, s)| s.len() > 1) {
                continue;
            }
            let domains: Vec<&[ConstId]> = free.iter().map(|_| sym.objects.as_slice()).collect();
            for_each_injective(&domains, &fixed_consts, &mut |choice| {
                budget.charge(1)?;
                let mut args = vec![0; schema.params.len()];
                for (i, c) in &fixed {
                    args[*i] = *c;
                }
                for ((_, slots), c) in free.iter().zip(choice) {
                    args[slots[0]] = *c;
                }
                let binding: BTreeMap<&str, ConstId> = schema
                    .params
                    .iter()
                    .map(String::as_str)
                    .zip(args.iter().copied())
                    .collect();
                let constrains: BTreeSet<GroundAtom> = schema
                    .constrains()
                    .map(|a| sym.ground(a, &binding))
                    .collect();
                let mut requires = BTreeSet::new();
                for a in schema.requires_unconstrained() {
                    let locals: Vec<&str> = a
                        .vars()
                        .filter(|v| !binding.contains_key(v))
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect();
                    let local_domains: Vec<&[ConstId]> =
                        locals.iter().map(|_| sym.objects.as_slice()).collect();
                    for_each_injective(&local_domains, &args, &mut |lc| {
                        budget.charge(1)?;
                        let mut b = binding.clone();
                        b.extend(locals.iter().copied().zip(lc.iter().copied()));
                        requires.insert(sym.ground(a, &b));
                        Ok(())
                    })?;
                }
                // self-contradictory: can never be activated
                if constrains.iter().any(|a| requires.contains(a)) {
                    return Ok(());
                }
                out.entry((robot.id.clone(), schema.name.clone(), args.clone()))
                    .or_insert(ProtoCap {
                        robot: robot.id.clone(),
                        name: schema.name.clone(),
                        args,
                        constrains,
                        requires,
                    });
                Ok(())
            })?;
        }
    }
    Ok(out.into_values().collect())
}

fn ground_cirs(
    inst: &Instance,
    sym: &Symbols,
    budget: &mut Budget,
) -> Result<Vec<ProtoCir>, GroundError> {
    let mut order: Vec<usize> = (0..inst.cirs.len()).collect();
    order.sort_by(|a, b| inst.cirs[*a].id.cmp(&inst.cirs[*b].id));
    let mut out = Vec::new();
    let mut seen: BTreeSet<(BTreeSet<GroundAtom>, GroundAtom)> = BTreeSet::new();
    for rule in order {
        let cir = &inst.cirs[rule];
        let vars: Vec<&str> = cir.vars().into_iter().collect();
        if k_permutations(sym.objects.len(), vars.len()) > budget.cap {
            return Err(GroundError::TooLarge { cap: budget.cap });
        }
        let domains: Vec<&[ConstId]> = vars.iter().map(|_| sym.objects.as_slice()).collect();
        for_each_injective(&domains, &[], &mut |choice| {
            budget.charge(1)?;
            let binding: BTreeMap<&str, ConstId> =
                vars.iter().copied().zip(choice.iter().copied()).collect();
            let antecedents: BTreeSet<GroundAtom> = cir
                .antecedents
                .iter()
                .map(|a| sym.ground(a, &binding))
                .collect();
            let consequent = sym.ground(&cir.consequent, &binding);
            if antecedents.contains(&consequent) {
                return Ok(());
            }
            // Identical instantiated rules (e.g. symmetric bindings) are one
            // implying subset, hence one generator.
            if !seen.insert((antecedents.clone(), consequent.clone())) {
                return Ok(());
            }
            out.push(ProtoCir {
                rule,
                id: cir.id.clone(),
                binding: vars
                    .iter()
                    .zip(choice)
                    .map(|(v, c)| (v.to_string(), *c))
                    .collect(),
                antecedents,
                consequent,
            });
            Ok(())
        })?;
    }
    Ok(out)
}

/// Id, utility, whether it has an atom requirement, instantiations.
type ProtoTask = (String, u64, bool, Vec<ProtoInst>);

fn ground_tasks(
    inst: &Instance,
    sym: &Symbols,
    caps: &[ProtoCap],
    budget: &mut Budget,
) -> Result<Vec<ProtoTask>, GroundError> {
    let cap_index: HashMap<(&str, &[ConstId]), usize> = caps
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.name.as_str(), c.args.as_slice()), i))
        .collect();
    let mut tasks: Vec<&crate::model::Task> = inst.tasks.iter().collect();
    tasks.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = Vec::new();
    for task in tasks {
        // variable -> (may be an object, may be a robot)
        let mut kinds: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
        for req in &task.requirements {
            let (is_cap, call) = match req {
                Requirement::Atom(a) => (false, a),
                Requirement::Capability(c) => (true, c),
            };
            for (i, t) in call.args.iter().enumerate() {
                if let Term::Var(v) = t {
                    let owner = is_cap && i == 0;
                    let e = kinds.entry(v.as_str()).or_insert((true, true));
                    if owner {
                        e.0 = false;
                    } else {
                        e.1 = false;
                    }
                }
            }
        }
        let vars: Vec<&str> = kinds.keys().copied().collect();
        let domain_vecs: Vec<Vec<ConstId>> = kinds
            .values()
            .map(|(obj, rob)| match (obj, rob) {
                (true, true) => unreachable!("every variable occurs somewhere"),
                (true, false) => sym.objects.clone(),
                (false, true) => sym.robots.clone(),
                (false, false) => vec![],
            })
            .collect();
        let domains: Vec<&[ConstId]> = domain_vecs.iter().map(Vec::as_slice).collect();
        let mut insts: Vec<ProtoInst> = Vec::new();
        let mut seen: BTreeSet<(BTreeSet<GroundAtom>, BTreeSet<usize>)> = BTreeSet::new();
        for_each_injective(&domains, &[], &mut |choice| {
            budget.charge(1)?;
            let binding: BTreeMap<&str, ConstId> =
                vars.iter().copied().zip(choice.iter().copied()).collect();
            let mut atoms = BTreeSet::new();
            let mut caps_req = BTreeSet::new();
            for req in &task.requirements {
                match req {
                    Requirement::Atom(a) => {
                        atoms.insert(sym.ground(a, &binding));
                    }
                    Requirement::Capability(c) => {
                        let args = sym.ground_args(&c.args, &binding);
                        match cap_index.get(&(c.predicate.as_str(), args.as_slice())) {
                            Some(i) => {
                                caps_req.insert(*i);
                            }
                            // no robot offers this capability instance
                            None => return Ok(()),
                        }
                    }
                }
            }
            if seen.insert((atoms.clone(), caps_req.clone())) {
                insts.push(ProtoInst {
                    atoms,
                    caps: caps_req,
                });
            }
            Ok(())
        })?;
        out.push((
            task.id.clone(),
            task.utility,
            task.has_atom_requirement(),
            insts,
        ));
    }
    Ok(out)
}

/// Grounds `instance` against the reconfigured initial constraints `i_prime`.
pub fn ground_instance(
    instance: &Instance,
    i_prime: &BTreeSet<Atom>,
    options: GroundOptions,
) -> Result<GroundWorld, GroundError> {
    let mut constants: Vec<String> = instance
        .objects
        .iter()
        .chain(instance.robots.iter().map(|r| &r.id))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    constants.sort();
    let mut predicates = instance.predicates.clone();
    predicates.sort();
    let mut robots: Vec<String> = instance.robots.iter().map(|r| r.id.clone()).collect();
    robots.sort();
    let mut sym = Symbols {
        constants,
        predicates,
        objects: Vec::new(),
        robots: Vec::new(),
    };
    sym.objects = instance.objects.iter().map(|o| sym.constant(o)).collect();
    sym.objects.sort_unstable();
    sym.robots = robots.iter().map(|r| sym.constant(r)).collect();

    let mut budget = Budget {
        used: 0,
        cap: options.max_entities,
    };
    let caps = ground_capabilities(instance, &sym, &mut budget)?;
    let cirs = ground_cirs(instance, &sym, &mut budget)?;
    let tasks = ground_tasks(instance, &sym, &caps, &mut budget)?;

    let empty = BTreeMap::new();
    let init: BTreeSet<GroundAtom> = i_prime.iter().map(|a| sym.ground(a, &empty)).collect();

    let mut all: BTreeSet<&GroundAtom> = init.iter().collect();
    for c in &caps {
        all.extend(c.constrains.iter());
        all.extend(c.requires.iter());
    }
    for q in &cirs {
        all.extend(q.antecedents.iter());
        all.insert(&q.consequent);
    }
    for (_, _, _, insts) in &tasks {
        for i in insts {
            all.extend(i.atoms.iter());
        }
    }
    budget.charge(all.len())?;
    let atoms: Vec<GroundAtom> = all.into_iter().cloned().collect();
    let atom_index: HashMap<GroundAtom, AtomId> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), AtomId(i as u32)))
        .collect();
    let id = |a: &GroundAtom| atom_index[a];

    let capabilities: Vec<GroundCapability> = caps
        .iter()
        .map(|c| GroundCapability {
            robot: c.robot.clone(),
            name: c.name.clone(),
            args: c.args.clone(),
            constrains: c.constrains.iter().map(id).collect(),
            requires_unconstrained: c.requires.iter().map(id).collect(),
        })
        .collect();
    let ground_cirs: Vec<GroundCir> = cirs
        .iter()
        .map(|q| GroundCir {
            rule: q.rule,
            id: q.id.clone(),
            binding: q.binding.clone(),
            antecedents: q.antecedents.iter().map(id).collect(),
            consequent: id(&q.consequent),
        })
        .collect();
    let ground_tasks: Vec<GroundTask> = tasks
        .into_iter()
        .map(|(tid, utility, has_atom_requirement, insts)| GroundTask {
            id: tid,
            utility,
            has_atom_requirement,
            instantiations: insts
                .into_iter()
                .enumerate()
                .map(|(k, i)| GroundTaskInstantiation {
                    index: k + 1,
                    required_atoms: i.atoms.iter().map(id).collect(),
                    required_caps: i.caps.iter().map(|c| CapId(*c as u32)).collect(),
                })
                .collect(),
        })
        .collect();

    let init_ids: Vec<AtomId> = init.iter().map(id).collect();
    let mut in_init = vec![false; atoms.len()];
    let mut generators: Vec<Vec<Generator>> = vec![Vec::new(); atoms.len()];
    for a in &init_ids {
        in_init[a.index()] = true;
        generators[a.index()].push(Generator::Init);
    }
    for (i, c) in capabilities.iter().enumerate() {
        for a in &c.constrains {
            generators[a.index()].push(Generator::Capability(CapId(i as u32)));
        }
    }
    let mut cirs_by_antecedent: Vec<Vec<CirId>> = vec![Vec::new(); atoms.len()];
    for (i, q) in ground_cirs.iter().enumerate() {
        generators[q.consequent.index()].push(Generator::Cir(CirId(i as u32)));
        for a in &q.antecedents {
            cirs_by_antecedent[a.index()].push(CirId(i as u32));
        }
    }

    Ok(GroundWorld {
        constants: sym.constants,
        predicates: sym.predicates,
        robots,
        atoms,
        capabilities,
        cirs: ground_cirs,
        tasks: ground_tasks,
        init: init_ids,
        in_init,
        atom_index,
        generators,
        cirs_by_antecedent,
    })
}

/// Applies the reconfiguration step and grounds with default options.
pub fn ground(instance: &Instance) -> Result<GroundWorld, GroundError> {
    let i_prime = crate::model::apply_delta(instance)?;
    ground_instance(instance, &i_prime, GroundOptions::default())
}
