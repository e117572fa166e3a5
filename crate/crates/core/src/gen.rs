//! Seeded random instances for synthetic evaluation.
//!
//! The domain holds robots `r1..rn` and objects `o1..om`; both are listed as
//! objects so variables may bind to either. Capability types `C_k(X)` take
//! only the owner parameter; each constrains one or two distinct predicates
//! whose first argument is the owner and whose other arguments are drawn from
//! the domain. CIRs use the variables `X` and `Y`. Every task requirement is
//! a capability pattern `C_k(R_i)` with its own owner variable, or, in
//! setting 2 with probability one half, an atom some ground capability can
//! constrain. Every choice within a range is uniform.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compat::check_compatibility;
use crate::ground::{ground_instance, GroundOptions};
use crate::model::{
    validate, Atom, CapabilitySchema, Cir, EffectLiteral, Instance, Polarity, PredicateSchema,
    RawInstance, RawTask, Robot, Term,
};
use crate::prng::Prng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub seed: u64,
    pub n_tasks: usize,
    pub task_reqs: (usize, usize),
    pub utility: (u64, u64),
    pub n_robots: usize,
    pub caps_per_robot: (usize, usize),
    pub n_cap_types: (usize, usize),
    pub atoms_per_cap: (usize, usize),
    pub n_pred_schemas: (usize, usize),
    pub pred_arity: (usize, usize),
    pub n_cirs: usize,
    pub cir_antecedents: (usize, usize),
    /// 1: capability requirements only; 2: requirements are capability
    /// patterns or atoms with equal chance.
    pub setting: u8,
    /// Non-robot objects; defaults to `n_robots`, for a domain of
    /// `2 * n_robots` constants.
    pub n_objects: Option<usize>,
    pub init_atoms: (usize, usize),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            n_tasks: 50,
            task_reqs: (1, 3),
            utility: (1, 30),
            n_robots: 50,
            caps_per_robot: (1, 3),
            n_cap_types: (1, 3),
            atoms_per_cap: (1, 2),
            n_pred_schemas: (1, 5),
            pred_arity: (1, 2),
            n_cirs: 2,
            cir_antecedents: (1, 3),
            setting: 1,
            n_objects: None,
            init_atoms: (0, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
}

impl GenConfig {
    pub fn objects(&self) -> usize {
        self.n_objects.unwrap_or(self.n_robots)
    }

    pub fn check(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidConfig(m.to_string()));
        let ranges: [(&str, (u64, u64)); 8] = [
            (
                "task_reqs",
                (self.task_reqs.0 as u64, self.task_reqs.1 as u64),
            ),
            ("utility", self.utility),
            (
                "caps_per_robot",
                (self.caps_per_robot.0 as u64, self.caps_per_robot.1 as u64),
            ),
            (
                "n_cap_types",
                (self.n_cap_types.0 as u64, self.n_cap_types.1 as u64),
            ),
            (
                "atoms_per_cap",
                (self.atoms_per_cap.0 as u64, self.atoms_per_cap.1 as u64),
            ),
            (
                "n_pred_schemas",
                (self.n_pred_schemas.0 as u64, self.n_pred_schemas.1 as u64),
            ),
            (
                "pred_arity",
                (self.pred_arity.0 as u64, self.pred_arity.1 as u64),
            ),
            (
                "cir_antecedents",
                (self.cir_antecedents.0 as u64, self.cir_antecedents.1 as u64),
            ),
        ];
        for (name, (lo, hi)) in ranges {
            if lo == 0 || lo > hi {
                return bad(&format!(
                    "{name} must be a nonempty range of positive values"
                ));
            }
        }
        if self.init_atoms.0 > self.init_atoms.1 {
            return bad("init_atoms must be a nonempty range");
        }
        if self.n_robots == 0 {
            return bad("n_robots must be positive");
        }
        if self.setting != 1 && self.setting != 2 {
            return bad("setting must be 1 or 2");
        }
        Ok(())
    }
}

fn pick_distinct(rng: &mut Prng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut all);
    all.truncate(k.min(n));
    all.sort_unstable();
    all
}

/// Draws an instance. Initial atoms are redrawn (up to a fixed number of
/// attempts, then left empty) until activating nothing is compatible.
pub fn generate(config: &GenConfig) -> Result<Instance, GenError> {
    config.check()?;
    let mut rng = Prng::new(config.seed);
    let robot_ids: Vec<String> = (1..=config.n_robots).map(|i| format!("r{i}")).collect();
    let mut objects = robot_ids.clone();
    objects.extend((1..=config.objects()).map(|i| format!("o{i}")));
    let pool: Vec<Term> = objects.iter().map(|o| Term::Const(o.clone())).collect();

    let predicates: Vec<PredicateSchema> = (1..=rng.range_usize(config.n_pred_schemas))
        .map(|i| PredicateSchema {
            name: format!("F_{i}"),
            arity: rng.range_usize(config.pred_arity),
        })
        .collect();
    let owner = Term::Var("X".into());

    let mut schemas = Vec::new();
    for k in 1..=rng.range_usize(config.n_cap_types) {
        let count = rng.range_usize(config.atoms_per_cap);
        let effects = pick_distinct(&mut rng, predicates.len(), count)
            .into_iter()
            .map(|p| {
                let schema = &predicates[p];
                let mut args = vec![owner.clone()];
                for _ in 1..schema.arity {
                    args.push(rng.pick(&pool).clone());
                }
                EffectLiteral {
                    atom: Atom::new(schema.name.clone(), args),
                    polarity: Polarity::Constrains,
                }
            })
            .collect();
        schemas.push(CapabilitySchema {
            name: format!("C_{k}"),
            params: vec!["X".into()],
            effects,
        });
    }

    let robots: Vec<Robot> = robot_ids
        .iter()
        .map(|r| {
            let count = rng.range_usize(config.caps_per_robot);
            Robot {
                id: r.clone(),
                capabilities: pick_distinct(&mut rng, schemas.len(), count)
                    .into_iter()
                    .map(|s| Atom::new(schemas[s].name.clone(), vec![Term::Const(r.clone())]))
                    .collect(),
            }
        })
        .collect();

    let vars = [Term::Var("X".into()), Term::Var("Y".into())];
    let mut cirs = Vec::new();
    for l in 1..=config.n_cirs {
        let antecedents: Vec<Atom> = (0..rng.range_usize(config.cir_antecedents))
            .map(|_| {
                let p = rng.pick(&predicates);
                Atom::new(
                    p.name.clone(),
                    (0..p.arity).map(|_| rng.pick(&vars).clone()).collect(),
                )
            })
            .collect();
        let bound: Vec<Term> = vars
            .iter()
            .filter(|v| antecedents.iter().any(|a| a.args.contains(v)))
            .cloned()
            .collect();
        let p = rng.pick(&predicates);
        let consequent = Atom::new(
            p.name.clone(),
            (0..p.arity).map(|_| rng.pick(&bound).clone()).collect(),
        );
        cirs.push(Cir {
            id: format!("q{l}"),
            antecedents,
            consequent,
        });
    }

    // atoms some ground capability constrains
    let mut producible: Vec<Atom> = Vec::new();
    for r in &robots {
        for c in &r.capabilities {
            let schema = schemas.iter().find(|s| s.name == c.predicate).unwrap();
            for e in &schema.effects {
                let mut a = e.atom.clone();
                a.args[0] = c.args[0].clone();
                producible.push(a);
            }
        }
    }
    producible.sort();
    producible.dedup();

    let mut tasks = Vec::new();
    for m in 1..=config.n_tasks {
        let mut requirements = Vec::new();
        let mut owners = 0;
        for _ in 0..rng.range_usize(config.task_reqs) {
            let atom_req = config.setting == 2 && rng.chance(1, 2) && !producible.is_empty();
            if atom_req {
                requirements.push(rng.pick(&producible).clone());
            } else {
                owners += 1;
                let s = rng.pick(&schemas);
                requirements.push(Atom::new(
                    s.name.clone(),
                    vec![Term::Var(format!("R{owners}"))],
                ));
            }
        }
        tasks.push(RawTask {
            id: format!("t{m}"),
            requirements,
            utility: rng.range(config.utility.0, config.utility.1) as i64,
        });
    }

    let mut raw = RawInstance {
        predicates: predicates.clone(),
        objects,
        robots,
        capabilities: schemas,
        cirs,
        tasks,
        init: Vec::new(),
        delta: Vec::new(),
    };
    for _ in 0..16 {
        let mut init: Vec<Atom> = (0..rng.range_usize(config.init_atoms))
            .map(|_| {
                let p = rng.pick(&predicates);
                Atom::new(
                    p.name.clone(),
                    (0..p.arity).map(|_| rng.pick(&pool).clone()).collect(),
                )
            })
            .collect();
        init.sort();
        init.dedup();
        raw.init = init;
        if empty_activation_compatible(&raw) {
            break;
        }
        raw.init.clear();
    }
    Ok(validate(raw).expect("generated instance is valid"))
}

fn empty_activation_compatible(raw: &RawInstance) -> bool {
    let probe = RawInstance {
        tasks: Vec::new(),
        robots: raw
            .robots
            .iter()
            .map(|r| Robot {
                id: r.id.clone(),
                capabilities: Vec::new(),
            })
            .collect(),
        ..raw.clone()
    };
    let Ok(inst) = validate(probe) else {
        return false;
    };
    let i_prime = inst.init.iter().cloned().collect();
    match ground_instance(&inst, &i_prime, GroundOptions::default()) {
        Ok(w) => check_compatibility(&w, &[]).is_compatible(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, serialize_instance, Requirement};

    fn small(seed: u64) -> GenConfig {
        GenConfig {
            seed,
            n_tasks: 4,
            n_robots: 3,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_produce_full_size_instance() {
        let inst = generate(&GenConfig {
            seed: 1,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(inst.tasks.len(), 50);
        assert_eq!(inst.robots.len(), 50);
        assert_eq!(inst.cirs.len(), 2);
        assert!(inst.delta.is_empty());
        assert!(inst.tasks.iter().all(|t| t
            .requirements
            .iter()
            .all(|r| matches!(r, Requirement::Capability(_)))));
    }

    #[test]
    fn same_seed_same_text() {
        for setting in [1, 2] {
            let cfg = GenConfig {
                seed: 1,
                setting,
                ..Default::default()
            };
            let a = serialize_instance(&generate(&cfg).unwrap());
            let b = serialize_instance(&generate(&cfg).unwrap());
            assert_eq!(a, b);
            assert_eq!(serialize_instance(&parse_instance(&a).unwrap()), a);
        }
    }

    #[test]
    fn setting_two_mixes_requirement_kinds() {
        let inst = generate(&GenConfig {
            seed: 3,
            setting: 2,
            ..Default::default()
        })
        .unwrap();
        let reqs: Vec<&Requirement> = inst.tasks.iter().flat_map(|t| &t.requirements).collect();
        let atoms = reqs
            .iter()
            .filter(|r| matches!(r, Requirement::Atom(_)))
            .count();
        assert!(atoms > reqs.len() / 4 && atoms < 3 * reqs.len() / 4);
    }

    #[test]
    fn invalid_configs_rejected() {
        for cfg in [
            GenConfig {
                pred_arity: (0, 2),
                ..Default::default()
            },
            GenConfig {
                utility: (5, 2),
                ..Default::default()
            },
            GenConfig {
                setting: 3,
                ..Default::default()
            },
        ] {
            assert!(matches!(generate(&cfg), Err(GenError::InvalidConfig(_))));
        }
    }

    #[test]
    fn empty_activation_always_compatible() {
        for seed in 0..100 {
            let inst = generate(&small(seed)).unwrap();
            let w = crate::ground::ground(&inst).unwrap();
            assert!(check_compatibility(&w, &[]).is_compatible(), "seed {seed}");
        }
    }

    fn within_five_points(counts: &[u32], total: u32) {
        let expected = 1.0 / counts.len() as f64;
        for c in counts {
            let f = *c as f64 / total as f64;
            assert!((f - expected).abs() < 0.05, "{counts:?}");
        }
    }

    #[test]
    fn range_outcomes_are_uniform() {
        let mut reqs = [0u32; 3];
        let mut caps = [0u32; 3];
        let mut util = [0u32; 30];
        let mut cir_ants = [0u32; 3];
        let seeds = 1000;
        for seed in 0..seeds {
            let inst = generate(&small(seed)).unwrap();
            let t = &inst.tasks[0];
            reqs[t.requirements.len() - 1] += 1;
            util[t.utility as usize - 1] += 1;
            cir_ants[inst.cirs[0].antecedents.len() - 1] += 1;
            if inst.capabilities.len() == 3 {
                caps[inst.robots[0].capabilities.len() - 1] += 1;
            }
        }
        within_five_points(&reqs, seeds as u32);
        within_five_points(&util, seeds as u32);
        within_five_points(&cir_ants, seeds as u32);
        within_five_points(&caps, caps.iter().sum());
    }
}
