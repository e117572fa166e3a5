//! JSON mirror of the instance format. Atoms, capability references, effect
//! literals and delta operations are written as strings in the same surface
//! syntax as the text format.

use serde::{Deserialize, Serialize};

use super::syntax::{parse_delta_op, parse_effect};
use super::{
    parse_atom, validate, CapabilitySchema, Cir, Instance, ModelError, PredicateSchema,
    RawInstance, RawTask, Robot,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonInstance {
    #[serde(default)]
    predicates: Vec<JsonPredicate>,
    #[serde(default)]
    objects: Vec<String>,
    #[serde(default)]
    robots: Vec<JsonRobot>,
    #[serde(default)]
    capabilities: Vec<JsonCapability>,
    #[serde(default)]
    cirs: Vec<JsonCir>,
    #[serde(default)]
    tasks: Vec<JsonTask>,
    #[serde(default)]
    init: Vec<String>,
    #[serde(default)]
    delta: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonPredicate {
    name: String,
    arity: usize,
}

#[derive(Serialize, Deserialize)]
struct JsonRobot {
    id: String,
    capabilities: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonCapability {
    name: String,
    params: Vec<String>,
    effects: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonCir {
    id: String,
    antecedents: Vec<String>,
    consequent: String,
}

#[derive(Serialize, Deserialize)]
struct JsonTask {
    id: String,
    requirements: Vec<String>,
    utility: i64,
}

fn atoms(items: &[String]) -> Result<Vec<super::Atom>, ModelError> {
    items.iter().map(|s| parse_atom(s)).collect()
}

/// Parses and validates the JSON mirror of an instance.
pub fn instance_from_json(text: &str) -> Result<Instance, ModelError> {
    let doc: JsonInstance =
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    let raw = RawInstance {
        predicates: doc
            .predicates
            .into_iter()
            .map(|p| PredicateSchema {
                name: p.name,
                arity: p.arity,
            })
            .collect(),
        objects: doc.objects,
        robots: doc
            .robots
            .into_iter()
            .map(|r| {
                Ok(Robot {
                    id: r.id,
                    capabilities: atoms(&r.capabilities)?,
                })
            })
            .collect::<Result<_, ModelError>>()?,
        capabilities: doc
            .capabilities
            .into_iter()
            .map(|c| {
                Ok(CapabilitySchema {
                    name: c.name,
                    params: c.params,
                    effects: c
                        .effects
                        .iter()
                        .map(|e| parse_effect(e))
                        .collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, ModelError>>()?,
        cirs: doc
            .cirs
            .into_iter()
            .map(|q| {
                Ok(Cir {
                    id: q.id,
                    antecedents: atoms(&q.antecedents)?,
                    consequent: parse_atom(&q.consequent)?,
                })
            })
            .collect::<Result<_, ModelError>>()?,
        tasks: doc
            .tasks
            .into_iter()
            .map(|t| {
                Ok(RawTask {
                    id: t.id,
                    requirements: atoms(&t.requirements)?,
                    utility: t.utility,
                })
            })
            .collect::<Result<_, ModelError>>()?,
        init: atoms(&doc.init)?,
        delta: doc
            .delta
            .iter()
            .map(|d| parse_delta_op(d))
            .collect::<Result<_, _>>()?,
    };
    validate(raw)
}

fn strings<T: ToString>(items: &[T]) -> Vec<String> {
    items.iter().map(ToString::to_string).collect()
}

/// Writes the JSON mirror of an instance (pretty-printed, stable field order).
pub fn instance_to_json(inst: &Instance) -> String {
    let doc = JsonInstance {
        predicates: inst
            .predicates
            .iter()
            .map(|p| JsonPredicate {
                name: p.name.clone(),
                arity: p.arity,
            })
            .collect(),
        objects: inst.objects.clone(),
        robots: inst
            .robots
            .iter()
            .map(|r| JsonRobot {
                id: r.id.clone(),
                capabilities: strings(&r.capabilities),
            })
            .collect(),
        capabilities: inst
            .capabilities
            .iter()
            .map(|c| JsonCapability {
                name: c.name.clone(),
                params: c.params.clone(),
                effects: strings(&c.effects),
            })
            .collect(),
        cirs: inst
            .cirs
            .iter()
            .map(|q| JsonCir {
                id: q.id.clone(),
                antecedents: strings(&q.antecedents),
                consequent: q.consequent.to_string(),
            })
            .collect(),
        tasks: inst
            .tasks
            .iter()
            .map(|t| JsonTask {
                id: t.id.clone(),
                requirements: strings(&t.requirements),
                utility: t.utility as i64,
            })
            .collect(),
        init: strings(&inst.init),
        delta: strings(&inst.delta),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    const RUNNING: &str = include_str!("../../../../fixtures/running_example.tampic");

    #[test]
    fn json_mirror_round_trips() {
        let inst = parse_instance(RUNNING).unwrap();
        let json = instance_to_json(&inst);
        assert_eq!(instance_from_json(&json).unwrap(), inst);
    }

    #[test]
    fn json_is_validated() {
        let inst = parse_instance(RUNNING).unwrap();
        let json = instance_to_json(&inst).replace("\"utility\": 3", "\"utility\": 0");
        assert!(matches!(
            instance_from_json(&json),
            Err(ModelError::NonPositiveUtility { .. })
        ));
        assert!(matches!(
            instance_from_json("{\"bogus\": 1}"),
            Err(ModelError::Json(_))
        ));
    }
}
