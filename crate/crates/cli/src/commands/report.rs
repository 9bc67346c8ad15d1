use std::fmt::Write;
use std::fs;
use std::path::Path;

use super::{BestReport, LABELS};
use crate::error::{CliError, CliResult};

/// Artifacts `report` needs from an `optimize` directory. Baseline impulse
/// responses are only required when `best.json` lists the baseline.
pub fn required_files(best: Option<&BestReport>) -> Vec<String> {
    let mut files = vec!["best.json".to_string(), "fom_trace.csv".to_string()];
    for label in LABELS {
        if best.is_none_or(|b| b.get(label).is_some()) {
            files.push(format!("cir_{label}.csv"));
        }
    }
    files
}

/// Summary table built from the directory contents alone.
pub fn report(dir: &Path) -> CliResult<String> {
    let best_path = dir.join("best.json");
    let best: Option<BestReport> = match fs::read_to_string(&best_path) {
        Ok(text) => {
            Some(serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", best_path.display())))?)
        }
        Err(_) => None,
    };
    let missing: Vec<String> = required_files(best.as_ref())
        .into_iter()
        .filter(|f| !dir.join(f).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Missing(missing));
    }
    let best = best.expect("present when nothing is missing");

    let mut s = String::new();
    let _ = writeln!(s, "{}", dir.display());
    let _ = writeln!(
        s,
        "{} elements, {} evaluations, median FOM {:.6}, t_step {:.4} ps",
        best.n_elements,
        best.evaluations,
        best.median_fom,
        best.t_step_s * 1e12
    );
    let _ = writeln!(
        s,
        "{:<8} {:>12} {:>10} {:>18} {:>12}",
        "label", "mask_index", "FOM", "delay_spread_ns", "best/label"
    );
    for label in LABELS {
        match best.get(label) {
            Some(m) => {
                let _ = writeln!(
                    s,
                    "{label:<8} {:>12} {:>10.6} {:>18.4} {:>12.4}",
                    m.mask_index,
                    m.fom,
                    m.delay_spread_s * 1e9,
                    best.best.fom / m.fom
                );
            }
            None => {
                let _ = writeln!(s, "{label:<8} {:>12} {:>10} {:>18} {:>12}", "-", "n/a", "n/a", "n/a");
            }
        }
    }
    Ok(s)
}
