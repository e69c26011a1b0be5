//! Job configuration: JSON schema, strict key validation, and dotted-key
//! command-line overrides.

use anyhow::{bail, Context, Result};
use hubbard_boltzmann::{DispersionModel, RunConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

/// Resolved job configuration. Field defaults follow the production setup.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: DispersionModel,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_observable_stride")]
    pub observable_stride: usize,
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub reduced_mode: bool,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_n() -> usize {
    128
}
fn default_epsilon() -> f64 {
    0.02
}
fn default_dt() -> f64 {
    0.01
}
fn default_t_end() -> f64 {
    20.0
}
fn default_observable_stride() -> usize {
    10
}
fn default_snapshot_stride() -> usize {
    1000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub kind: InitialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialKind {
    #[serde(rename = "appendixA")]
    AppendixA,
    #[serde(rename = "snapshot")]
    Snapshot,
}

impl Default for Initial {
    fn default() -> Self {
        Initial {
            kind: InitialKind::AppendixA,
            path: None,
        }
    }
}

impl Config {
    /// Parses a config file, applies `--set key=value` overrides, and
    /// validates the result. Unknown keys anywhere are rejected.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut value: Value =
            serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))?;
        apply_overrides(&mut value, overrides)?;
        check_keys(&value)?;
        let config: Config = serde_json::from_value(value).context("invalid configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.to_run_config().validate()?;
        if self.initial.kind == InitialKind::Snapshot && self.initial.path.is_none() {
            bail!("initial.kind = \"snapshot\" requires initial.path");
        }
        Ok(())
    }

    pub fn to_run_config(&self) -> RunConfig {
        RunConfig {
            model: self.model,
            n: self.n,
            epsilon: self.epsilon,
            dt: self.dt,
            t_end: self.t_end,
            observable_stride: self.observable_stride,
            snapshot_stride: self.snapshot_stride,
            reduced_mode: self.reduced_mode,
        }
    }

    /// Canonical serialized form and its content hash, stamped into every
    /// output file for provenance.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hubbard_boltzmann::io::content_hash(canonical.as_bytes())
    }
}

/// Applies `key.path=value` overrides onto the raw JSON document. Values are
/// parsed as JSON scalars, falling back to plain strings.
fn apply_overrides(root: &mut Value, overrides: &[String]) -> Result<()> {
    for entry in overrides {
        let (key, raw) = entry
            .split_once('=')
            .with_context(|| format!("override {entry:?} is not of the form key=value"))?;
        apply_override_value(root, key, raw)?;
    }
    Ok(())
}

/// Sets one dotted key in a JSON document.
pub fn apply_override_value(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let parsed: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().context("empty override key")?;
    let mut cursor = root;
    for part in parents {
        let map = cursor
            .as_object_mut()
            .with_context(|| format!("cannot descend into {part:?} in override {key:?}"))?;
        cursor = map
            .entry((*part).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    cursor
        .as_object_mut()
        .with_context(|| format!("cannot set {last:?} in override {key:?}"))?
        .insert((*last).to_string(), parsed);
    Ok(())
}

/// Rejects unknown keys at every level of the document.
fn check_keys(root: &Value) -> Result<()> {
    const ROOT: &[&str] = &[
        "model",
        "n",
        "epsilon",
        "dt",
        "t_end",
        "observable_stride",
        "snapshot_stride",
        "reduced_mode",
        "initial",
        "output_dir",
    ];
    let obj = root
        .as_object()
        .context("configuration must be a JSON object")?;
    for key in obj.keys() {
        if !ROOT.contains(&key.as_str()) {
            bail!("unknown configuration key {key:?}");
        }
    }
    if let Some(model) = obj.get("model").and_then(Value::as_object) {
        let kind = model.get("kind").and_then(Value::as_str).unwrap_or("");
        let allowed: &[&str] = match kind {
            "nearest" => &["kind"],
            "nnn" => &["kind", "eta"],
            "exp" => &["kind", "zeta"],
            "mth" => &["kind", "m"],
            other => bail!("unknown model kind {other:?}"),
        };
        for key in model.keys() {
            if !allowed.contains(&key.as_str()) {
                bail!("unknown key {key:?} for model kind {kind:?}");
            }
        }
    }
    if let Some(initial) = obj.get("initial").and_then(Value::as_object) {
        for key in initial.keys() {
            if key != "kind" && key != "path" {
                bail!("unknown key {key:?} in initial");
            }
        }
    }
    Ok(())
}
