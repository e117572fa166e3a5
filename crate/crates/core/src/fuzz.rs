//! Small random instances for differential testing.
//!
//! Unlike [`crate::gen`], these instances exercise every feature of the
//! model: binary predicates, nullary atoms, negative capability effects with
//! local variables, capability schemas with extra parameters, variable task
//! requirements and a reconfiguration step.

use crate::model::{
    validate, Atom, CapabilitySchema, Cir, DeltaOp, EffectLiteral, Instance, Polarity,
    PredicateSchema, RawInstance, RawTask, Robot, Term,
};
use crate::prng::Prng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzConfig {
    pub objects: (usize, usize),
    pub robots: (usize, usize),
    pub schemas: (usize, usize),
    pub cirs: (usize, usize),
    pub tasks: (usize, usize),
    pub init: (usize, usize),
    pub utility: (u64, u64),
}

impl FuzzConfig {
    /// Instances small enough for exhaustive enumeration.
    pub fn tiny() -> Self {
        FuzzConfig {
            objects: (1, 2),
            robots: (1, 2),
            schemas: (1, 2),
            cirs: (0, 2),
            tasks: (1, 3),
            init: (0, 3),
            utility: (1, 9),
        }
    }

    pub fn small() -> Self {
        FuzzConfig {
            objects: (2, 3),
            robots: (1, 4),
            schemas: (1, 3),
            cirs: (1, 4),
            tasks: (2, 5),
            init: (0, 4),
            utility: (1, 20),
        }
    }
}

const PREDICATES: [(&str, usize); 4] = [("P", 1), ("Q", 1), ("R", 2), ("S", 0)];

fn random_atom(rng: &mut Prng, pool: &[Term]) -> Atom {
    let (name, arity) = *rng.pick(&PREDICATES);
    Atom::new(name, (0..arity).map(|_| rng.pick(pool).clone()).collect())
}

fn consts(names: &[String]) -> Vec<Term> {
    names.iter().map(|n| Term::Const(n.clone())).collect()
}

fn var(name: &str) -> Term {
    Term::Var(name.to_string())
}

/// Draws a random valid instance from `seed`.
pub fn random_instance(seed: u64, cfg: &FuzzConfig) -> Instance {
    let mut rng = Prng::new(seed);
    let objects: Vec<String> = (1..=rng.range_usize(cfg.objects))
        .map(|i| format!("o{i}"))
        .collect();
    let robot_ids: Vec<String> = (1..=rng.range_usize(cfg.robots))
        .map(|i| format!("r{i}"))
        .collect();
    let obj_terms = consts(&objects);

    let mut schemas = Vec::new();
    for k in 0..rng.range_usize(cfg.schemas) {
        let params: Vec<String> = if rng.chance(1, 2) {
            vec!["X".into()]
        } else {
            vec!["X".into(), "Y".into()]
        };
        let mut pos_pool: Vec<Term> = params.iter().map(|p| var(p)).collect();
        pos_pool.extend(obj_terms.iter().cloned());
        let mut effects = Vec::new();
        for _ in 0..rng.range(1, 2) {
            effects.push(EffectLiteral {
                atom: random_atom(&mut rng, &pos_pool),
                polarity: Polarity::Constrains,
            });
        }
        let mut neg_pool = pos_pool.clone();
        neg_pool.push(var("Z"));
        for _ in 0..rng.range(0, 1) {
            effects.push(EffectLiteral {
                atom: random_atom(&mut rng, &neg_pool),
                polarity: Polarity::RequiresUnconstrained,
            });
        }
        effects.sort();
        effects.dedup();
        schemas.push(CapabilitySchema {
            name: format!("C{k}"),
            params,
            effects,
        });
    }

    let mut robots = Vec::new();
    for r in &robot_ids {
        let mut caps: Vec<Atom> = Vec::new();
        for s in &schemas {
            if !rng.chance(2, 3) {
                continue;
            }
            let mut args = vec![Term::Const(r.clone())];
            for i in 1..s.params.len() {
                if rng.chance(2, 3) {
                    args.push(var(&format!("V{i}")));
                } else {
                    args.push(rng.pick(&obj_terms).clone());
                }
            }
            caps.push(Atom::new(s.name.clone(), args));
        }
        caps.sort();
        caps.dedup();
        robots.push(Robot {
            id: r.clone(),
            capabilities: caps,
        });
    }

    let mut all_consts = objects.clone();
    all_consts.extend(robot_ids.iter().cloned());
    let all_terms = consts(&all_consts);

    let mut cirs = Vec::new();
    let mut cir_pool = vec![var("X"), var("Y")];
    cir_pool.extend(obj_terms.iter().cloned());
    for k in 0..rng.range_usize(cfg.cirs) {
        let antecedents: Vec<Atom> = (0..rng.range(1, 2))
            .map(|_| random_atom(&mut rng, &cir_pool))
            .collect();
        let mut safe: Vec<Term> = antecedents
            .iter()
            .flat_map(|a| a.args.iter().filter(|t| t.is_var()).cloned())
            .collect();
        safe.extend(obj_terms.iter().cloned());
        let consequent = random_atom(&mut rng, &safe);
        cirs.push(Cir {
            id: format!("q{k}"),
            antecedents,
            consequent,
        });
    }

    let mut tasks = Vec::new();
    for k in 0..rng.range_usize(cfg.tasks) {
        let mut requirements = Vec::new();
        for _ in 0..rng.range(1, 2) {
            if !schemas.is_empty() && rng.chance(1, 3) {
                let s = rng.pick(&schemas);
                let owner = if rng.chance(1, 2) {
                    var("R")
                } else {
                    rng.pick(&consts(&robot_ids)).clone()
                };
                let mut args = vec![owner];
                for _ in 1..s.params.len() {
                    args.push(rng.pick(&obj_terms).clone());
                }
                requirements.push(Atom::new(s.name.clone(), args));
            } else {
                let mut pool = all_terms.clone();
                if rng.chance(1, 4) {
                    pool.push(var("T"));
                }
                requirements.push(random_atom(&mut rng, &pool));
            }
        }
        tasks.push(RawTask {
            id: format!("t{k}"),
            requirements,
            utility: rng.range(cfg.utility.0, cfg.utility.1) as i64,
        });
    }

    let mut init: Vec<Atom> = (0..rng.range_usize(cfg.init))
        .map(|_| random_atom(&mut rng, &all_terms))
        .collect();
    init.sort();
    init.dedup();

    let mut delta = Vec::new();
    if !init.is_empty() && rng.chance(1, 3) {
        delta.push(DeltaOp::Remove(rng.pick(&init).clone()));
        delta.push(DeltaOp::Add(random_atom(&mut rng, &all_terms)));
    }

    let raw = RawInstance {
        predicates: PREDICATES
            .iter()
            .map(|(n, a)| PredicateSchema {
                name: n.to_string(),
                arity: *a,
            })
            .collect(),
        objects,
        robots,
        capabilities: schemas,
        cirs,
        tasks,
        init,
        delta,
    };
    validate(raw).expect("random instance is valid")
}
