use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use chassis_ris::ingest::export_sweep_archive_with_metadata;
use serde_json::json;

use super::{Opened, RunOptions};
use crate::config::{ExperimentConfig, Source};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

/// Simulates the selected masks and writes them as a sweep archive.
/// Returns the committed archive directory.
pub fn simulate(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<PathBuf> {
    if let Source::Measured(path) = config.source() {
        return Err(CliError::Config(format!(
            "simulate needs a scene, but archive {} is configured",
            path.display()
        )));
    }
    let started = Instant::now();
    let opened = Opened::open(config, config.grid)?;
    let selection = opts.mask_selection(config);
    let masks = opened.select(&selection)?;
    let dataset = opened.dataset(masks)?;

    let out = OutputDir::create(&opts.out_dir(config, "simulate"), opts.force)?;
    let mut metadata = BTreeMap::new();
    metadata.insert("scene".to_string(), json!(opened.scene()));
    metadata.insert("masks".to_string(), json!(selection));
    export_sweep_archive_with_metadata(&dataset, out.path(), metadata)?;
    let dir = out.commit()?;

    let grid = dataset.grid();
    println!("masks     {}", dataset.len());
    println!("elements  {}", dataset.n_elements());
    println!(
        "grid      {} points, {} to {} Hz",
        grid.count(),
        grid.f_start(),
        grid.f_stop()
    );
    println!("elapsed   {:.3} s", started.elapsed().as_secs_f64());
    println!("archive   {}", dir.join(chassis_ris::ingest::MANIFEST_FILE).display());
    Ok(dir)
}
