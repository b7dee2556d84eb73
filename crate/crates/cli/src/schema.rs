//! JSON Schema of the run config.

use serde_json::{json, Map, Value};

use crate::config::{ExperimentKind, SCHEMA_VERSION};

fn num() -> Value {
    json!({ "type": "number" })
}

fn pos() -> Value {
    json!({ "type": "number", "exclusiveMinimum": 0 })
}

fn count(min: u64) -> Value {
    json!({ "type": "integer", "minimum": min })
}

fn path() -> Value {
    json!({ "type": "string", "description": "JSON file, relative to the config file" })
}

fn list(items: Value) -> Value {
    json!({ "type": "array", "items": items })
}

fn object(props: Value) -> Value {
    json!({ "type": "object", "additionalProperties": false, "properties": props })
}

fn optimizer() -> Value {
    object(json!({
        "max_iter": count(1),
        "tol": pos(),
        "restarts": count(1),
        "seed": { "type": "integer", "minimum": 0, "description": "replaced by the run seed" },
        "lambda_schedule": list(json!({ "type": "number", "minimum": 0 })),
        "t": num(),
    }))
}

/// Schema of the `params` block of `kind`.
pub fn params_schema(kind: ExperimentKind) -> Value {
    match kind {
        ExperimentKind::NoBroadcast => object(json!({
            "state": path(), "system_q": path(), "system_s": path(), "optimizer": optimizer(),
            "coherence_tol": pos(), "orbit_samples": count(2), "ki_disturbance_tol": pos(),
            "block_symmetry_tol": pos(), "control_levels": count(2),
        })),
        ExperimentKind::Tradeoff => object(json!({
            "state": path(), "system_q": path(), "system_s": path(), "optimizer": optimizer(),
            "t_grid": list(num()), "slack_tol": pos(),
        })),
        ExperimentKind::Degradation => object(json!({
            "state": path(), "system": path(), "theta": num(), "degradation_tol": pos(),
            "covariance_tol": pos(), "optimizer": optimizer(),
        })),
        ExperimentKind::Nonadditivity => object(json!({ "max_n": count(1), "t": num() })),
        ExperimentKind::Irrev => object(json!({
            "state": path(), "target": path(), "system_from": path(), "system_to": path(),
            "optimizer": optimizer(),
        })),
        ExperimentKind::Ki => object(json!({
            "states": list(path()), "labels": list(json!({ "type": "string" })), "orbit_state": path(),
            "system": path(), "orbit_samples": count(2), "tol": pos(), "ehrenfest_tol": pos(),
        })),
        ExperimentKind::Cloner => object(json!({
            "dims": list(count(2)), "max_n": count(1), "states_per_case": count(1), "tol": pos(),
        })),
        ExperimentKind::Lemma8 => object(json!({
            "trials": count(1), "dims": list(count(2)), "monotonicity_trials": count(1),
            "monotonicity_dims": list(count(2)), "tol": pos(),
        })),
        ExperimentKind::Complementarity => object(json!({ "channel": path(), "tol": pos() })),
    }
}

/// Full schema of a config file.
pub fn config_schema() -> Value {
    let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
    let branches: Vec<Value> = ExperimentKind::ALL
        .iter()
        .map(|&k| {
            json!({
                "if": { "properties": { "experiment": { "const": k.name() } } },
                "then": { "properties": { "params": params_schema(k) } },
            })
        })
        .collect();
    let mut top = Map::new();
    top.insert("$schema".into(), json!("https://json-schema.org/draft/2020-12/schema"));
    top.insert("title".into(), json!("asymtool run config"));
    top.insert("type".into(), json!("object"));
    top.insert("additionalProperties".into(), json!(false));
    top.insert("required".into(), json!(["schema_version", "experiment"]));
    top.insert(
        "properties".into(),
        json!({
            "schema_version": { "const": SCHEMA_VERSION },
            "experiment": { "enum": names },
            "seed": { "type": "integer", "minimum": 0, "default": 0 },
            "output_dir": { "type": "string" },
            "params": { "type": "object" },
        }),
    );
    top.insert("allOf".into(), Value::Array(branches));
    Value::Object(top)
}
