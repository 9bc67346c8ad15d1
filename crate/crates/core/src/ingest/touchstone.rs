//! Touchstone v1 reader for 2-port S-parameter files, keeping only S21.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::FrequencyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Real / imaginary.
    Ri,
    /// Linear magnitude / angle in degrees.
    Ma,
    /// 20 log10 magnitude / angle in degrees.
    Db,
}

/// Parsed `#` option line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionLine {
    /// Multiplier from file frequency units to Hz.
    pub unit: f64,
    pub format: DataFormat,
    pub reference_ohms: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self {
            unit: 1e9,
            format: DataFormat::Ma,
            reference_ohms: 50.0,
        }
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine> {
    let mut opt = OptionLine::default();
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.unit = 1.0,
            "KHZ" => opt.unit = 1e3,
            "MHZ" => opt.unit = 1e6,
            "GHZ" => opt.unit = 1e9,
            "S" => {}
            p @ ("Y" | "Z" | "H" | "G") => {
                return Err(parse_error(
                    line,
                    format!("unsupported parameter type {p}; only S is read"),
                ))
            }
            "RI" => opt.format = DataFormat::Ri,
            "MA" => opt.format = DataFormat::Ma,
            "DB" => opt.format = DataFormat::Db,
            "R" => {
                let value = tokens
                    .next()
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| *v > 0.0)
                    .ok_or_else(|| parse_error(line, "option line: R must be followed by a positive resistance"))?;
                opt.reference_ohms = value;
            }
            other => {
                return Err(parse_error(
                    line,
                    format!("malformed option line: unexpected token {other:?}"),
                ))
            }
        }
    }
    Ok(opt)
}

fn decode(format: DataFormat, a: f64, b: f64) -> Complex64 {
    match format {
        DataFormat::Ri => Complex64::new(a, b),
        DataFormat::Ma => Complex64::from_polar(a, b.to_radians()),
        DataFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

/// Parses a 2-port Touchstone file into its frequency grid and S21 samples.
///
/// Rows must be strictly increasing in frequency and uniformly spaced, since
/// the rest of the pipeline works on uniform grids.
pub fn parse_touchstone_s2p(text: &str) -> Result<(FrequencyGrid, Vec<Complex64>)> {
    let mut option: Option<OptionLine> = None;
    let mut rows: Vec<(usize, f64, Complex64)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(body) = content.strip_prefix('#') {
            // Only the first option line counts.
            if option.is_none() {
                option = Some(parse_option_line(body, line)?);
            }
            continue;
        }
        if content.starts_with('[') {
            return Err(parse_error(line, "Touchstone v2 keywords are not supported"));
        }
        let opt = *option.get_or_insert_with(OptionLine::default);
        let values = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_error(line, format!("not a number: {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match values.len() {
            9 => {}
            3 => {
                return Err(parse_error(
                    line,
                    "unsupported port count: 1-port data (expected 2-port)",
                ))
            }
            n => {
                return Err(parse_error(
                    line,
                    format!("expected 9 columns for 2-port data, found {n}"),
                ))
            }
        }
        let f = values[0] * opt.unit;
        if !(f > 0.0 && f.is_finite()) {
            return Err(parse_error(line, format!("invalid frequency {}", values[0])));
        }
        if let Some(&(_, prev, _)) = rows.last() {
            if f <= prev {
                return Err(parse_error(line, "frequencies must be strictly increasing"));
            }
        }
        let s21 = decode(opt.format, values[3], values[4]);
        if !s21.is_finite() {
            return Err(parse_error(line, "non-finite S21 value"));
        }
        rows.push((line, f, s21));
    }

    if rows.len() < 2 {
        return Err(parse_error(text.lines().count(), "need at least two frequency points"));
    }
    let first = rows[0].1;
    let last = rows[rows.len() - 1].1;
    let grid = FrequencyGrid::new(first, last, rows.len())?;
    let tolerance = 1e-4 * grid.spacing();
    for (j, &(line, f, _)) in rows.iter().enumerate() {
        if (f - grid.frequency(j)).abs() > tolerance {
            return Err(parse_error(line, "frequency points are not uniformly spaced"));
        }
    }
    Ok((grid, rows.into_iter().map(|(_, _, s)| s).collect()))
}
