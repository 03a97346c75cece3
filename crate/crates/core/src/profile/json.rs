use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{Distribution, ProfileMetadata, SensorProfile, SCHEMA_VERSION};
use crate::augment::{Effect, PARAM_COUNT, PARAM_SPECS};
use crate::error::{Error, Result};

/// Canonical document: sorted keys, two-space indentation, shortest
/// round-trip floats, trailing newline.
pub fn to_json(p: &SensorProfile) -> String {
    let mut params = Map::new();
    for effect in Effect::ALL {
        let mut group = Map::new();
        for (spec, d) in PARAM_SPECS.iter().zip(&p.params).filter(|(s, _)| s.effect == effect) {
            let v = match *d {
                Distribution::Gaussian { mu, sigma } => json!({"mode": "gaussian", "mu": mu, "sigma": sigma}),
                Distribution::Uniform { lo, hi } => json!({"mode": "uniform", "lo": lo, "hi": hi}),
            };
            group.insert(spec.name.to_string(), v);
        }
        params.insert(effect.key().to_string(), Value::Object(group));
    }
    let m = &p.metadata;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "name": p.name,
        "params": params,
        "metadata": {
            "source_dataset": m.source_dataset,
            "target_dataset": m.target_dataset,
            "extractor_id": m.extractor_id,
            "seed": m.seed,
            "iterations": m.iterations,
            "created_at": m.created_at,
            "notes": m.notes,
        },
        "raw_overrides": p.raw_overrides,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("profile serializes");
    s.push('\n');
    s
}

fn obj<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::validation(field, "expected an object"))
}

fn num(m: &Map<String, Value>, field: &str, key: &str) -> Result<f64> {
    match m.get(key) {
        None => Err(Error::validation(format!("{field}.{key}"), "missing")),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::validation(format!("{field}.{key}"), "expected a number")),
    }
}

fn string(m: &Map<String, Value>, key: &str) -> Result<String> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(Error::validation(format!("metadata.{key}"), "expected a string")),
    }
}

fn opt_u64(m: &Map<String, Value>, key: &str) -> Result<Option<u64>> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| Error::validation(format!("metadata.{key}"), "expected a non-negative integer")),
    }
}

fn reject_unknown(m: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<()> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::validation(format!("{prefix}{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn distribution(v: &Value, key: &str) -> Result<Distribution> {
    let m = obj(v, key)?;
    let mode = m
        .get("mode")
        .ok_or_else(|| Error::validation(format!("{key}.mode"), "missing"))?;
    match mode.as_str() {
        Some("gaussian") => {
            reject_unknown(m, &["mode", "mu", "sigma"], &format!("{key}."))?;
            Ok(Distribution::Gaussian {
                mu: num(m, key, "mu")?,
                sigma: num(m, key, "sigma")?,
            })
        }
        Some("uniform") => {
            reject_unknown(m, &["mode", "lo", "hi"], &format!("{key}."))?;
            Ok(Distribution::Uniform {
                lo: num(m, key, "lo")?,
                hi: num(m, key, "hi")?,
            })
        }
        _ => Err(Error::validation(
            format!("{key}.mode"),
            format!("expected \"gaussian\" or \"uniform\", got {mode}"),
        )),
    }
}

/// Parses and validates a profile document.
pub fn from_json(text: &str) -> Result<SensorProfile> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::validation("profile", e.to_string()))?;
    let root = obj(&doc, "profile")?;
    reject_unknown(root, &["schema_version", "name", "params", "metadata", "raw_overrides"], "")?;

    match root.get("schema_version").map(|v| v.as_u64()) {
        None => return Err(Error::validation("schema_version", "missing")),
        Some(Some(v)) if v == u64::from(SCHEMA_VERSION) => {}
        Some(_) => {
            return Err(Error::validation(
                "schema_version",
                format!("unsupported version {}", root["schema_version"]),
            ))
        }
    }
    let name = match root.get("name") {
        Some(Value::String(s)) => s.clone(),
        None => return Err(Error::validation("name", "missing")),
        Some(_) => return Err(Error::validation("name", "expected a string")),
    };

    let params_v = root.get("params").ok_or_else(|| Error::validation("params", "missing"))?;
    let params_m = obj(params_v, "params")?;
    let effect_keys: Vec<&str> = Effect::ALL.iter().map(|e| e.key()).collect();
    reject_unknown(params_m, &effect_keys, "")?;
    let mut params = [Distribution::point(0.0); PARAM_COUNT];
    for effect in Effect::ALL {
        let group = params_m.get(effect.key()).map(|g| obj(g, effect.key())).transpose()?;
        let names: Vec<&str> = PARAM_SPECS.iter().filter(|s| s.effect == effect).map(|s| s.name).collect();
        if let Some(g) = group {
            reject_unknown(g, &names, &format!("{}.", effect.key()))?;
        }
        for (i, spec) in PARAM_SPECS.iter().enumerate().filter(|(_, s)| s.effect == effect) {
            let key = spec.key();
            let v = group
                .and_then(|g| g.get(spec.name))
                .ok_or_else(|| Error::validation(&key, "missing"))?;
            params[i] = distribution(v, &key)?;
        }
    }

    let metadata = match root.get("metadata") {
        None | Some(Value::Null) => ProfileMetadata::default(),
        Some(v) => {
            let m = obj(v, "metadata")?;
            reject_unknown(
                m,
                &["source_dataset", "target_dataset", "extractor_id", "seed", "iterations", "created_at", "notes"],
                "metadata.",
            )?;
            ProfileMetadata {
                source_dataset: string(m, "source_dataset")?,
                target_dataset: string(m, "target_dataset")?,
                extractor_id: string(m, "extractor_id")?,
                seed: opt_u64(m, "seed")?,
                iterations: opt_u64(m, "iterations")?,
                created_at: string(m, "created_at")?,
                notes: string(m, "notes")?,
            }
        }
    };

    let mut raw_overrides = BTreeMap::new();
    if let Some(v) = root.get("raw_overrides") {
        for (k, x) in obj(v, "raw_overrides")? {
            let x = x
                .as_f64()
                .ok_or_else(|| Error::validation(format!("raw_overrides.{k}"), "expected a number"))?;
            raw_overrides.insert(k.clone(), x);
        }
    }

    let p = SensorProfile {
        name,
        params,
        metadata,
        raw_overrides,
    };
    p.validate()?;
    Ok(p)
}
