//! Versioned JSON policy files.
//!
//! ```json
//! { "format_version": 1, "kind": "tabular", "temperature": 1.0,
//!   "height": 11, "width": 11,
//!   "entries": [ { "row": 1, "col": 1, "action": "up", "value": -3.2 }, ... ] }
//! { "format_version": 1, "kind": "gaussian_controller",
//!   "gain": 1.0, "noise_scale": 0.1, "certainty_window": 0.1 }
//! ```
//!
//! Tabular entries not listed default to 0.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GaussianController, TabularPolicy};
use crate::env::{GridAction, GridState};
use crate::error::{Error, Result};

pub const POLICY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedPolicy {
    Tabular(TabularPolicy),
    GaussianController(GaussianController),
}

impl LoadedPolicy {
    pub fn kind(&self) -> &'static str {
        match self {
            LoadedPolicy::Tabular(_) => "tabular",
            LoadedPolicy::GaussianController(_) => "gaussian_controller",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QEntry {
    row: i32,
    col: i32,
    action: GridAction,
    value: f64,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PolicyDocument {
    Tabular {
        format_version: u32,
        temperature: f64,
        height: usize,
        width: usize,
        entries: Vec<QEntry>,
    },
    GaussianController {
        format_version: u32,
        gain: f64,
        noise_scale: f64,
        certainty_window: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct TabularDocument {
    format_version: u32,
    kind: String,
    temperature: f64,
    height: usize,
    width: usize,
    entries: Vec<QEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct GaussianDocument {
    format_version: u32,
    kind: String,
    gain: f64,
    noise_scale: f64,
    certainty_window: f64,
}

fn to_document(policy: &LoadedPolicy) -> PolicyDocument {
    match policy {
        LoadedPolicy::Tabular(t) => PolicyDocument::Tabular {
            format_version: POLICY_FORMAT_VERSION,
            temperature: t.temperature(),
            height: t.height(),
            width: t.width(),
            entries: t
                .entries()
                .map(|(s, action, value)| QEntry {
                    row: s.row,
                    col: s.col,
                    action,
                    value,
                })
                .collect(),
        },
        LoadedPolicy::GaussianController(g) => PolicyDocument::GaussianController {
            format_version: POLICY_FORMAT_VERSION,
            gain: g.gain,
            noise_scale: g.noise_scale,
            certainty_window: g.certainty_window,
        },
    }
}

pub fn policy_to_json(policy: &LoadedPolicy) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_document(policy))?)
}

pub fn save_policy(policy: &LoadedPolicy, path: &Path) -> Result<()> {
    let mut text = policy_to_json(policy)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_policy(path: &Path) -> Result<LoadedPolicy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_policy(&text).map_err(|message| Error::PolicyFormat {
        path: path.to_path_buf(),
        message,
    })
}

pub(crate) fn parse_policy(text: &str) -> std::result::Result<LoadedPolicy, String> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    match raw.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == POLICY_FORMAT_VERSION as u64 => {}
        Some(v) => {
            return Err(format!(
                "unsupported format_version {v} (this build reads {POLICY_FORMAT_VERSION})"
            ))
        }
        None => return Err("missing or non-integer field `format_version`".into()),
    }
    // typed second pass straight from the text keeps line/column diagnostics
    match raw.get("kind").and_then(|k| k.as_str()) {
        Some("tabular") => {
            let TabularDocument {
                temperature,
                height,
                width,
                entries,
                ..
            } = serde_json::from_str(text).map_err(|e| e.to_string())?;
            let mut table =
                TabularPolicy::new(height, width, temperature).map_err(|e| e.to_string())?;
            let mut seen = HashSet::new();
            for (i, e) in entries.into_iter().enumerate() {
                let state = GridState::new(e.row, e.col);
                if !seen.insert((state, e.action)) {
                    return Err(format!(
                        "entries[{i}]: duplicate entry for ({}, {}, {:?})",
                        e.row, e.col, e.action
                    ));
                }
                if !e.value.is_finite() {
                    return Err(format!("entries[{i}]: non-finite value"));
                }
                table
                    .set_value(state, e.action, e.value)
                    .map_err(|err| format!("entries[{i}]: {err}"))?;
            }
            Ok(LoadedPolicy::Tabular(table))
        }
        Some("gaussian_controller") => {
            let GaussianDocument {
                gain,
                noise_scale,
                certainty_window,
                ..
            } = serde_json::from_str(text).map_err(|e| e.to_string())?;
            let g = GaussianController {
                gain,
                noise_scale,
                certainty_window,
            };
            g.validate().map_err(|e| e.to_string())?;
            Ok(LoadedPolicy::GaussianController(g))
        }
        Some(other) => Err(format!(
            "unknown policy kind {other:?} (expected \"tabular\" or \"gaussian_controller\")"
        )),
        None => Err("missing string field `kind`".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, GridSpec, ReachSpec};
    use crate::policy::{train_q_learning, Policy, QLearningConfig};

    #[test]
    fn tabular_roundtrip_is_bit_exact() {
        let spec = GridSpec::flat_grid11();
        let run = train_q_learning(
            &spec,
            &QLearningConfig {
                steps: 5000,
                ..Default::default()
            },
            &[],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        save_policy(&LoadedPolicy::Tabular(run.policy.clone()), &path).unwrap();
        let LoadedPolicy::Tabular(back) = load_policy(&path).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(back, run.policy);
        for s in spec.valid_starts() {
            for a in GridAction::ALL {
                assert_eq!(
                    back.certainty(&spec, &s, &a).to_bits(),
                    run.policy.certainty(&spec, &s, &a).to_bits()
                );
            }
        }
    }

    #[test]
    fn hand_written_two_state_table() {
        let text = r#"{
            "format_version": 1, "kind": "tabular", "temperature": 1.0,
            "height": 1, "width": 2,
            "entries": [
                { "row": 0, "col": 0, "action": "up", "value": 1.0 },
                { "row": 0, "col": 1, "action": "left", "value": 2.0 },
                { "row": 0, "col": 1, "action": "right", "value": 2.0 }
            ]
        }"#;
        let LoadedPolicy::Tabular(t) = parse_policy(text).unwrap() else {
            panic!()
        };
        let e = std::f64::consts::E;
        let p0 = t.probabilities(GridState::new(0, 0));
        assert!((p0[0] - e / (e + 3.0)).abs() < 1e-15);
        let p1 = t.probabilities(GridState::new(0, 1));
        let e2 = e * e;
        assert!((p1[1] - e2 / (2.0 * e2 + 2.0)).abs() < 1e-15);
        assert_eq!(t.greedy(GridState::new(0, 1)), GridAction::Right);
    }

    #[test]
    fn gaussian_roundtrip() {
        let g = GaussianController {
            gain: 0.7,
            noise_scale: 0.2,
            certainty_window: 0.05,
        };
        let text = policy_to_json(&LoadedPolicy::GaussianController(g.clone())).unwrap();
        assert_eq!(
            parse_policy(&text).unwrap(),
            LoadedPolicy::GaussianController(g.clone())
        );
        let env = ReachSpec::default();
        let s = env.canonical_start();
        assert!(g.certainty(&env, &s, &g.act(&env, &s)) <= 1.0);
    }

    #[test]
    fn diagnostics() {
        let err = parse_policy(r#"{"format_version": 2, "kind": "tabular"}"#).unwrap_err();
        assert!(err.contains("format_version 2"), "{err}");
        let err = parse_policy(
            "{\"format_version\": 1,\n \"kind\": \"tabular\",\n \"temperature\": 1.0}",
        )
        .unwrap_err();
        assert!(
            err.contains("missing field") && err.contains("line"),
            "{err}"
        );
        let err = parse_policy(r#"{"format_version": 1, "kind": "mystery"}"#).unwrap_err();
        assert!(err.contains("mystery"), "{err}");
        let err = parse_policy(
            r#"{"format_version":1,"kind":"tabular","temperature":1.0,"height":1,"width":1,
                "entries":[{"row":3,"col":0,"action":"up","value":0.0}]}"#,
        )
        .unwrap_err();
        assert!(err.contains("entries[0]"), "{err}");
        assert!(parse_policy("not json").is_err());
    }
}
