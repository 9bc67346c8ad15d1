//! Experiment configuration: a JSON document layered over built-in defaults,
//! with dotted `key=value` overrides applied last.

use std::fs;
use std::path::{Path, PathBuf};

use chassis_ris::dsp::{FomConfig, StdOptions, DEFAULT_BAND_FRACTION};
use chassis_ris::physics::SceneConfig;
use chassis_ris::FrequencyGrid;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Simulated source. Used with defaults when neither a scene nor an
    /// archive is given.
    pub scene: Option<SceneConfig>,
    /// Grid for simulation and optimization.
    pub grid: FrequencyGrid,
    /// Grid for `characterize` on a simulated source; `grid` when absent.
    pub survey_grid: Option<FrequencyGrid>,
    pub fom: FomConfig,
    pub strategy: Strategy,
    pub masks: MaskSelection,
    pub std: StdOptions,
    pub band_fraction: f64,
    pub io: IoConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scene: None,
            grid: FrequencyGrid::default_band(),
            survey_grid: None,
            fom: FomConfig::default(),
            strategy: Strategy::Exhaustive,
            masks: MaskSelection::First { count: 100 },
            std: StdOptions::default(),
            band_fraction: DEFAULT_BAND_FRACTION,
            io: IoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    CoordinateDescent {
        #[serde(default = "default_starts")]
        starts: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_max_sweeps")]
        max_sweeps: usize,
    },
    Random {
        #[serde(default = "default_draws")]
        n: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_starts() -> usize {
    8
}

fn default_max_sweeps() -> usize {
    20
}

fn default_draws() -> usize {
    1000
}

/// Which masks `simulate` and `characterize` use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskSelection {
    /// Up to `count` masks: indices `0..count`, or the first recorded entries.
    First {
        count: u64,
    },
    List {
        indices: Vec<u64>,
    },
    /// `count` distinct masks drawn with a seeded generator.
    Random {
        count: usize,
        seed: u64,
    },
    All,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Sweep archive manifest; selects the measured source.
    pub archive: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Simulated(SceneConfig),
    Measured(PathBuf),
}

impl ExperimentConfig {
    /// Reads `path` (if any) over the defaults and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut value = serde_json::to_value(Self::default()).expect("defaults serialize");
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let file: Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if !file.is_object() {
                return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
            }
            merge(&mut value, file);
        }
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let config: Self = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.scene.is_some() && self.io.archive.is_some() {
            return Err(CliError::Config(
                "configure either a scene or an archive, not both".into(),
            ));
        }
        if let Some(archive) = &self.io.archive {
            if !archive.is_file() {
                return Err(CliError::Config(format!("archive {} not found", archive.display())));
            }
        }
        if !(self.band_fraction > 0.0 && self.band_fraction <= 1.0) {
            return Err(CliError::Config(format!(
                "band_fraction {} must lie in (0, 1]",
                self.band_fraction
            )));
        }
        match self.strategy {
            Strategy::CoordinateDescent { starts, max_sweeps, .. } if starts == 0 || max_sweeps == 0 => Err(
                CliError::Config("coordinate descent needs starts >= 1 and max_sweeps >= 1".into()),
            ),
            Strategy::Random { n: 0, .. } => Err(CliError::Config("random search needs n >= 1".into())),
            _ => Ok(()),
        }
    }

    pub fn source(&self) -> Source {
        match (&self.scene, &self.io.archive) {
            (_, Some(path)) => Source::Measured(path.clone()),
            (Some(scene), None) => Source::Simulated(scene.clone()),
            (None, None) => Source::Simulated(SceneConfig::default()),
        }
    }
}

/// Recursive object merge. Tagged objects whose `kind` changes are replaced
/// wholesale so fields of the old variant do not leak into the new one.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            let kind_changed = matches!((b.get("kind"), o.get("kind")), (Some(x), Some(y)) if x != y);
            if kind_changed {
                *b = o;
                return;
            }
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `a.b.c=value`; the value is parsed as JSON, falling back to a string.
fn apply_override(root: &mut Value, item: &str) -> CliResult<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {item:?} is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key {key:?}")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        if node.is_null() {
            *node = Value::Object(Map::new());
        }
        let Value::Object(map) = node else {
            return Err(CliError::Config(format!("override {key:?}: {part:?} is not an object")));
        };
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    if node.is_null() {
        *node = Value::Object(Map::new());
    }
    let Value::Object(map) = node else {
        return Err(CliError::Config(format!(
            "override {key:?} does not name an object field"
        )));
    };
    let last = parts[parts.len() - 1].to_string();
    match map.get_mut(&last) {
        Some(slot) if value.is_object() => merge(slot, value),
        _ => {
            map.insert(last, value);
        }
    }
    Ok(())
}
