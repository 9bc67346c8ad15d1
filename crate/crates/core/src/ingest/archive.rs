//! Directory archive of per-mask sweeps: a JSON manifest plus one file per mask.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::touchstone::parse_touchstone_s2p;
use super::write_atomic;
use crate::error::{Error, Result};
use crate::types::{ChannelSweep, FrequencyGrid, Mask, MaskSweepDataset, Origin};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LINEAR_COMPLEX: &str = "linear-complex";

const CSV_HEADER: [&str; 3] = ["freq_hz", "re", "im"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveEntry {
    pub mask_index: u64,
    /// Relative to the manifest's directory. `.csv` or `.s2p`.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepArchiveManifest {
    pub version: u32,
    pub n_elements: usize,
    pub grid: FrequencyGrid,
    pub magnitude_convention: String,
    /// Missing in hand-written manifests, which describe measurements.
    #[serde(default = "measured")]
    pub origin: Origin,
    /// Free-form acquisition notes (VNA settings, calibration, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub entries: Vec<ArchiveEntry>,
}

fn measured() -> Origin {
    Origin::Measured
}

fn load_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Load {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn export_sweep_archive(dataset: &MaskSweepDataset, dir: &Path) -> Result<PathBuf> {
    export_sweep_archive_with_metadata(dataset, dir, BTreeMap::new())
}

/// Writes `mask_<index>.csv` for every sweep and then the manifest, returning
/// the manifest path. Numbers use shortest round-trip formatting, so loading
/// the archive reproduces the dataset bit for bit.
pub fn export_sweep_archive_with_metadata(
    dataset: &MaskSweepDataset,
    dir: &Path,
    metadata: BTreeMap<String, serde_json::Value>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let grid = *dataset.grid();
    let freqs = grid.frequencies();
    let mut entries = Vec::with_capacity(dataset.len());
    for (mask, sweep) in dataset.iter() {
        let name = format!("mask_{}.csv", mask.index());
        let path = dir.join(&name);
        let mut out = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| load_error(&path, e.to_string());
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        for (f, s) in freqs.iter().zip(sweep.samples()) {
            out.write_record([f.to_string(), s.re.to_string(), s.im.to_string()])
                .map_err(csv_err)?;
        }
        let bytes = out.into_inner().map_err(|e| load_error(&path, e.to_string()))?;
        write_atomic(&path, &bytes)?;
        entries.push(ArchiveEntry {
            mask_index: mask.index(),
            path: name,
        });
    }
    let manifest = SweepArchiveManifest {
        version: MANIFEST_VERSION,
        n_elements: dataset.n_elements(),
        grid,
        magnitude_convention: LINEAR_COMPLEX.into(),
        origin: dataset.origin(),
        metadata,
        entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    write_atomic(&path, &json)?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<SweepArchiveManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: SweepArchiveManifest =
        serde_json::from_str(&text).map_err(|e| load_error(path, format!("bad manifest: {e}")))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(load_error(
            path,
            format!("unsupported manifest version {}", manifest.version),
        ));
    }
    if manifest.magnitude_convention != LINEAR_COMPLEX {
        return Err(load_error(
            path,
            format!("unsupported magnitude convention {:?}", manifest.magnitude_convention),
        ));
    }
    if manifest.entries.is_empty() {
        return Err(load_error(path, "manifest lists no entries"));
    }
    let mut seen = HashSet::new();
    for entry in &manifest.entries {
        if !seen.insert(entry.mask_index) {
            return Err(load_error(path, format!("duplicate mask index {}", entry.mask_index)));
        }
    }
    Ok(manifest)
}

/// Loads every entry of an archive. Each file must sit on the manifest grid.
pub fn load_sweep_archive(manifest_path: &Path) -> Result<MaskSweepDataset> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let grid = manifest.grid;

    let mut masks = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let mask = Mask::from_index(entry.mask_index, manifest.n_elements)
            .map_err(|e| load_error(manifest_path, e.to_string()))?;
        masks.push(mask);
    }
    let loaded = crate::par_map(&manifest.entries, |entry| {
        let path = base.join(&entry.path);
        read_entry(&path, &grid)
    });
    let sweeps = loaded.into_iter().collect::<Result<Vec<_>>>()?;
    MaskSweepDataset::new(masks, sweeps, manifest.origin)
}

fn read_entry(path: &Path, grid: &FrequencyGrid) -> Result<ChannelSweep> {
    let is_s2p = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("s2p"));
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (freqs, samples) = if is_s2p {
        let (file_grid, s21) = parse_touchstone_s2p(&text).map_err(|e| load_error(path, e.to_string()))?;
        (file_grid.frequencies(), s21)
    } else {
        read_csv(path, &text)?
    };
    if freqs.len() != grid.count() {
        return Err(load_error(
            path,
            format!("{} frequency points, manifest grid has {}", freqs.len(), grid.count()),
        ));
    }
    let tolerance = 1e-6 * grid.spacing();
    for (j, f) in freqs.iter().enumerate() {
        if (f - grid.frequency(j)).abs() > tolerance {
            return Err(load_error(
                path,
                format!("frequency {f} Hz at row {} does not match the manifest grid", j + 1),
            ));
        }
    }
    ChannelSweep::new(*grid, samples).map_err(|e| load_error(path, e.to_string()))
}

fn read_csv(path: &Path, text: &str) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| load_error(path, e.to_string()))?;
    if headers.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(load_error(path, "expected header freq_hz,re,im"));
    }
    let mut freqs = Vec::new();
    let mut samples = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| load_error(path, e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| load_error(path, format!("row {}: bad or missing column {}", k + 2, CSV_HEADER[i])))
        };
        freqs.push(field(0)?);
        samples.push(Complex64::new(field(1)?, field(2)?));
    }
    Ok((freqs, samples))
}
