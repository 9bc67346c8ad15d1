mod characterize;
mod optimize;
mod report;
mod simulate;

use std::path::PathBuf;

use chassis_ris::ingest::load_sweep_archive;
use chassis_ris::optim::{ChannelProvider, DatasetProvider, MaskSpace, EXHAUSTIVE_LIMIT};
use chassis_ris::physics::{build_scene, ChannelModel, SceneConfig};
use chassis_ris::{FrequencyGrid, Mask, MaskSweepDataset, Origin};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use characterize::{characterize, BandReport};
pub use optimize::{optimize, BestReport, LabeledMask, LABELS};
pub use report::{report, required_files};
pub use simulate::simulate;

use crate::config::{ExperimentConfig, MaskSelection, Source};
use crate::error::{CliError, CliResult};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub force: bool,
    pub svg: bool,
    /// Replaces the mask count of the configured selection.
    pub masks: Option<u64>,
}

impl RunOptions {
    fn out_dir(&self, config: &ExperimentConfig, default: &str) -> PathBuf {
        self.out
            .clone()
            .or_else(|| config.io.out.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(default))
    }

    fn mask_selection(&self, config: &ExperimentConfig) -> MaskSelection {
        match (self.masks, &config.masks) {
            (None, sel) => sel.clone(),
            (Some(count), MaskSelection::Random { seed, .. }) => MaskSelection::Random {
                count: count as usize,
                seed: *seed,
            },
            (Some(count), _) => MaskSelection::First { count },
        }
    }
}

/// A channel source opened for evaluation.
pub(crate) enum Opened {
    Simulated {
        scene: SceneConfig,
        model: ChannelModel,
    },
    Measured {
        dataset: MaskSweepDataset,
        provider: DatasetProvider,
    },
}

impl Opened {
    pub(crate) fn open(config: &ExperimentConfig, grid: FrequencyGrid) -> CliResult<Self> {
        match config.source() {
            Source::Simulated(scene) => {
                let model = ChannelModel::new(build_scene(&scene)?, grid)?;
                Ok(Opened::Simulated { scene, model })
            }
            Source::Measured(path) => {
                let dataset = load_sweep_archive(&path)?;
                let provider = DatasetProvider::new(dataset.clone());
                Ok(Opened::Measured { dataset, provider })
            }
        }
    }

    pub(crate) fn provider(&self) -> &dyn ChannelProvider {
        match self {
            Opened::Simulated { model, .. } => model,
            Opened::Measured { provider, .. } => provider,
        }
    }

    pub(crate) fn scene(&self) -> Option<&SceneConfig> {
        match self {
            Opened::Simulated { scene, .. } => Some(scene),
            Opened::Measured { .. } => None,
        }
    }

    /// Mask indices in the order a "first K" selection walks them:
    /// ascending for a model, recording order for an archive.
    fn walk_order(&self, k: usize) -> Vec<u64> {
        match self {
            Opened::Simulated { .. } => (0..k as u64).collect(),
            Opened::Measured { dataset, .. } => dataset.masks().iter().take(k).map(Mask::index).collect(),
        }
    }

    /// Resolves `sel` against the available masks.
    pub(crate) fn select(&self, sel: &MaskSelection) -> CliResult<Vec<Mask>> {
        let provider = self.provider();
        let n = provider.n_elements();
        let space = provider.available();
        let available = space.len();
        let too_many = |count: u64| CliError::Config(format!("{count} masks requested but only {available} available"));
        let indices = match sel {
            MaskSelection::First { count } => self.walk_order((*count).min(available) as usize),
            MaskSelection::List { indices } => {
                let mut seen = std::collections::HashSet::new();
                for &i in indices {
                    if !space.contains(i) {
                        return Err(CliError::Config(format!("mask {i} is not available")));
                    }
                    if !seen.insert(i) {
                        return Err(CliError::Config(format!("mask {i} listed twice")));
                    }
                }
                indices.clone()
            }
            MaskSelection::Random { count, seed } => {
                if *count as u64 > available {
                    return Err(too_many(*count as u64));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                index::sample(&mut rng, available as usize, *count)
                    .into_iter()
                    .map(|k| space.nth(k as u64))
                    .collect()
            }
            MaskSelection::All => {
                if let MaskSpace::Full(n) = space {
                    if n > EXHAUSTIVE_LIMIT {
                        return Err(chassis_ris::Error::GuardRefused {
                            n_elements: n,
                            limit: EXHAUSTIVE_LIMIT,
                        }
                        .into());
                    }
                }
                (0..available).map(|k| space.nth(k)).collect()
            }
        };
        indices
            .into_iter()
            .map(|i| Mask::from_index(i, n).map_err(CliError::from))
            .collect()
    }

    /// Sweeps for `masks`, computed in parallel for a model.
    pub(crate) fn dataset(&self, masks: Vec<Mask>) -> CliResult<MaskSweepDataset> {
        let provider = self.provider();
        let sweeps = masks
            .par_iter()
            .map(|m| provider.sweep(m))
            .collect::<Result<Vec<_>, _>>()?;
        let origin = match self {
            Opened::Simulated { .. } => Origin::Simulated,
            Opened::Measured { dataset, .. } => dataset.origin(),
        };
        Ok(MaskSweepDataset::new(masks, sweeps, origin)?)
    }
}

/// Shortest round-trip formatting, the same as the archive writer.
pub(crate) fn csv_table(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub(crate) fn to_json(value: &impl serde::Serialize) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("plain data serializes");
    v.push(b'\n');
    v
}
