use std::path::PathBuf;

use chassis_ris::dsp::{cir_from_sweep, delay_spread, fom_with_peak, FomConfig};
use chassis_ris::optim::{baseline_masks, exhaustive_search, multistart_descent, random_search, ChannelProvider};
use chassis_ris::{Cir, FrequencyGrid, Mask};
use serde::{Deserialize, Serialize};

use super::{csv_table, to_json, Opened, RunOptions};
use crate::config::{ExperimentConfig, Strategy};
use crate::error::CliResult;
use crate::output::OutputDir;
use crate::svg::{Plot, Series};

pub const LABELS: [&str; 4] = ["best", "worst", "all_on", "all_off"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMask {
    pub mask_index: u64,
    /// Element 0 first.
    pub mask: String,
    pub fom: f64,
    pub delay_spread_s: f64,
    pub peak_time_s: f64,
}

/// Contents of `best.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestReport {
    pub strategy: Strategy,
    pub n_elements: usize,
    pub grid: FrequencyGrid,
    pub fom_config: FomConfig,
    pub t_step_s: f64,
    pub evaluations: usize,
    pub median_fom: f64,
    pub best: LabeledMask,
    pub worst: LabeledMask,
    /// Baselines are absent when an archive did not record them.
    pub all_on: Option<LabeledMask>,
    pub all_off: Option<LabeledMask>,
}

impl BestReport {
    pub fn get(&self, label: &str) -> Option<&LabeledMask> {
        match label {
            "best" => Some(&self.best),
            "worst" => Some(&self.worst),
            "all_on" => self.all_on.as_ref(),
            "all_off" => self.all_off.as_ref(),
            _ => None,
        }
    }
}

fn describe(provider: &dyn ChannelProvider, mask: &Mask, cfg: &FomConfig) -> CliResult<(LabeledMask, Cir)> {
    let cir = cir_from_sweep(&provider.sweep(mask)?, cfg)?;
    let (fom, peak) = fom_with_peak(&cir, cfg)?;
    let labeled = LabeledMask {
        mask_index: mask.index(),
        mask: mask.to_string(),
        fom,
        delay_spread_s: delay_spread(&cir, cfg)?,
        peak_time_s: peak.t_o,
    };
    Ok((labeled, cir))
}

/// Runs the configured search and writes the trace, the labelled masks and
/// their impulse responses.
pub fn optimize(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<(PathBuf, BestReport)> {
    let opened = Opened::open(config, config.grid)?;
    let provider = opened.provider();
    let cfg = &config.fom;
    let result = match config.strategy {
        Strategy::Exhaustive => exhaustive_search(provider, cfg)?,
        Strategy::CoordinateDescent {
            starts,
            seed,
            max_sweeps,
        } => multistart_descent(provider, starts, seed, max_sweeps, cfg)?,
        Strategy::Random { n, seed } => random_search(provider, n, seed, cfg)?,
    };
    let n = provider.n_elements();
    let space = provider.available();

    let worst_mask = Mask::from_index(result.worst().mask_index, n)?;
    let (best, best_cir) = describe(provider, &result.best_mask, cfg)?;
    let (worst, worst_cir) = describe(provider, &worst_mask, cfg)?;
    let mut cirs = vec![("best", best_cir), ("worst", worst_cir)];
    let mut baselines = Vec::new();
    if n > 0 {
        let [off, on] = baseline_masks(n)?;
        for (label, mask) in [("all_on", on), ("all_off", off)] {
            if space.contains(mask.index()) {
                let (l, cir) = describe(provider, &mask, cfg)?;
                cirs.push((label, cir));
                baselines.push(Some(l));
            } else {
                baselines.push(None);
            }
        }
    } else {
        baselines = vec![None, None];
    }
    let all_off = baselines.pop().flatten();
    let all_on = baselines.pop().flatten();
    let report = BestReport {
        strategy: config.strategy.clone(),
        n_elements: n,
        grid: *provider.grid(),
        fom_config: *cfg,
        t_step_s: cirs[0].1.t_step(),
        evaluations: result.evaluations,
        median_fom: result.median_fom(),
        best,
        worst,
        all_on,
        all_off,
    };

    let out = OutputDir::create(&opts.out_dir(config, "optimize"), opts.force)?;
    out.write(
        "fom_trace.csv",
        csv_table(
            "order,mask_index,fom",
            result
                .trace
                .iter()
                .enumerate()
                .map(|(k, e)| vec![k as f64, e.mask_index as f64, e.fom]),
        )
        .as_bytes(),
    )?;
    for (label, cir) in &cirs {
        let rows = cir
            .samples()
            .iter()
            .enumerate()
            .map(|(k, c)| vec![cir.time(k), c.re, c.im, c.norm_sqr()]);
        out.write(
            &format!("cir_{label}.csv"),
            csv_table("t_s,re,im,abs2", rows).as_bytes(),
        )?;
    }
    out.write("best.json", &to_json(&report))?;
    if opts.svg {
        let trace = Plot {
            title: "FOM over the search",
            x_label: "evaluation",
            y_label: "FOM",
            series: vec![Series {
                label: "FOM",
                points: result
                    .trace
                    .iter()
                    .enumerate()
                    .map(|(k, e)| (k as f64, e.fom))
                    .collect(),
            }],
            highlight: None,
        };
        out.write("fom_trace.svg", trace.render().as_bytes())?;
        let cutoff = cfg.cutoff();
        let overlay = Plot {
            title: "Impulse responses",
            x_label: "delay (ns)",
            y_label: "|h|^2 (dB)",
            series: cirs
                .iter()
                .map(|(label, cir)| Series {
                    label,
                    points: cir
                        .samples()
                        .iter()
                        .enumerate()
                        .take_while(|(k, _)| cir.time(*k) <= cutoff)
                        .map(|(k, c)| (cir.time(k) * 1e9, 10.0 * c.norm_sqr().max(1e-30).log10()))
                        .collect(),
                })
                .collect(),
            highlight: None,
        };
        out.write("cir_overlay.svg", overlay.render().as_bytes())?;
    }
    let dir = out.commit()?;

    println!("evaluations  {}", report.evaluations);
    println!("median FOM   {}", report.median_fom);
    for label in LABELS {
        if let Some(m) = report.get(label) {
            println!(
                "{label:<8} {} FOM {:.6} delay spread {:.3} ns",
                m.mask,
                m.fom,
                m.delay_spread_s * 1e9
            );
        }
    }
    Ok((dir, report))
}
