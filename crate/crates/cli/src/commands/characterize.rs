use std::path::PathBuf;

use chassis_ris::dsp::{mask_std_with, select_band, MagnitudeScale, StdOptions};
use serde::{Deserialize, Serialize};

use super::{csv_table, to_json, Opened, RunOptions};
use crate::config::{ExperimentConfig, Source};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;
use crate::svg::{Plot, Series};

/// Contents of `band.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub n_masks: usize,
    pub std: StdOptions,
    pub band_fraction: f64,
    pub max_std: f64,
    pub first_index: usize,
    pub last_index: usize,
    pub f_start_hz: f64,
    pub f_stop_hz: f64,
    pub points: usize,
    /// Span where the simulated RIS switches strongly; absent for archives.
    pub contrast_region_hz: Option<(f64, f64)>,
    pub within_contrast_region: Option<bool>,
}

/// Per-frequency spread of `|H|` over masks and the band it selects.
pub fn characterize(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<(PathBuf, BandReport)> {
    let grid = match config.source() {
        Source::Simulated(_) => config.survey_grid.unwrap_or(config.grid),
        Source::Measured(_) => config.grid,
    };
    let opened = Opened::open(config, grid)?;
    let masks = opened.select(&opts.mask_selection(config))?;
    if masks.len() < 2 {
        return Err(CliError::Config(format!("need ≥ 2 masks, got {}", masks.len())));
    }
    let dataset = opened.dataset(masks)?;
    let grid = *dataset.grid();
    let std = mask_std_with(&dataset, config.std);
    let band = select_band(&std, &grid, config.band_fraction)?;

    let contrast = opened.scene().map(|s| s.resonance_contrast_region());
    let report = BandReport {
        n_masks: dataset.len(),
        std: config.std,
        band_fraction: config.band_fraction,
        max_std: std.iter().copied().fold(0.0, f64::max),
        first_index: band.first,
        last_index: band.last,
        f_start_hz: band.grid.f_start(),
        f_stop_hz: band.grid.f_stop(),
        points: band.grid.count(),
        contrast_region_hz: contrast,
        within_contrast_region: contrast.map(|(lo, hi)| lo <= band.grid.f_start() && band.grid.f_stop() <= hi),
    };

    let column = match config.std.scale {
        MagnitudeScale::Linear => "std_linear",
        MagnitudeScale::Db => "std_db",
    };
    let freqs = grid.frequencies();
    let out = OutputDir::create(&opts.out_dir(config, "characterize"), opts.force)?;
    out.write(
        "std_vs_freq.csv",
        csv_table(
            &format!("freq_hz,{column}"),
            freqs.iter().zip(&std).map(|(&f, &s)| vec![f, s]),
        )
        .as_bytes(),
    )?;
    out.write("band.json", &to_json(&report))?;
    if opts.svg {
        let plot = Plot {
            title: "Spread of |H| across masks",
            x_label: "frequency (GHz)",
            y_label: column,
            series: vec![Series {
                label: "std",
                points: freqs.iter().zip(&std).map(|(&f, &s)| (f * 1e-9, s)).collect(),
            }],
            highlight: Some((report.f_start_hz * 1e-9, report.f_stop_hz * 1e-9)),
        };
        out.write("std_vs_freq.svg", plot.render().as_bytes())?;
    }
    let dir = out.commit()?;

    println!("masks     {}", report.n_masks);
    println!("max std   {}", report.max_std);
    println!(
        "band      {} to {} Hz ({} points, indices {}..={})",
        report.f_start_hz, report.f_stop_hz, report.points, report.first_index, report.last_index
    );
    if let (Some((lo, hi)), Some(inside)) = (report.contrast_region_hz, report.within_contrast_region) {
        println!("contrast  {lo} to {hi} Hz, band inside: {inside}");
    }
    Ok((dir, report))
}
