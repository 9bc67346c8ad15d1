use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum allowed distance between two dipoles, in meters.
pub const MIN_SEPARATION: f64 = 1e-6;

pub type Position = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DipoleKind {
    Wall,
    Ris,
    Antenna,
}

/// A point scatterer with a two-state Lorentzian response.
///
/// Only `Ris` dipoles switch between `resonance_off` and `resonance_on`;
/// every other kind always uses `resonance_off`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSpec {
    pub position: Position,
    pub kind: DipoleKind,
    pub resonance_off: f64,
    pub resonance_on: f64,
    pub linewidth: f64,
    pub coupling_strength: f64,
}

impl DipoleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.position[0].is_finite() && self.position[1].is_finite()) {
            return Err(Error::Geometry("dipole position must be finite".into()));
        }
        if !(self.linewidth > 0.0) {
            return Err(Error::domain(format!("linewidth {} must be positive", self.linewidth)));
        }
        if !(self.resonance_off > 0.0 && self.resonance_on > 0.0) {
            return Err(Error::domain("resonance frequencies must be positive"));
        }
        if !(self.coupling_strength >= 0.0) {
            return Err(Error::domain(format!(
                "coupling strength {} must be non-negative",
                self.coupling_strength
            )));
        }
        if self.kind == DipoleKind::Ris && self.resonance_on > self.resonance_off {
            return Err(Error::domain(
                "RIS on-state resonance must not exceed the off-state resonance",
            ));
        }
        Ok(())
    }

    /// Resonance frequency for the given diode state.
    pub fn resonance(&self, on: bool) -> f64 {
        if on && self.kind == DipoleKind::Ris {
            self.resonance_on
        } else {
            self.resonance_off
        }
    }
}

/// Lorentzian polarizability `s f_r^2 / (f_r^2 - f^2 - i f w)`.
///
/// `Im(alpha) >= 0` for every positive frequency.
pub fn polarizability(spec: &DipoleSpec, on: bool, f: f64) -> Result<Complex64> {
    if !(f > 0.0) {
        return Err(Error::domain(format!("frequency {f} Hz must be positive")));
    }
    Ok(lorentzian(spec, on, f))
}

pub(crate) fn lorentzian(spec: &DipoleSpec, on: bool, f: f64) -> Complex64 {
    // Work in GHz to keep the squares well scaled.
    let fr = spec.resonance(on) * 1e-9;
    let f = f * 1e-9;
    let w = spec.linewidth * 1e-9;
    let fr2 = fr * fr;
    spec.coupling_strength * fr2 / Complex64::new(fr2 - f * f, -f * w)
}

/// Immutable description of the cavity: walls, RIS elements and the two ports.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    dipoles: Vec<DipoleSpec>,
    tx: usize,
    rx: usize,
    ris_order: Vec<usize>,
    scattering_antennas: bool,
}

impl Scene {
    pub fn new(
        dipoles: Vec<DipoleSpec>,
        tx: usize,
        rx: usize,
        ris_order: Vec<usize>,
        scattering_antennas: bool,
    ) -> Result<Self> {
        for d in &dipoles {
            d.validate()?;
        }
        let antenna = |i: usize| dipoles.get(i).map(|d| d.kind) == Some(DipoleKind::Antenna);
        if tx == rx {
            return Err(Error::Geometry("transmit and receive ports must differ".into()));
        }
        if !antenna(tx) || !antenna(rx) {
            return Err(Error::Geometry(
                "transmit and receive ports must reference antenna dipoles".into(),
            ));
        }
        let mut seen = vec![false; dipoles.len()];
        for &i in &ris_order {
            if dipoles.get(i).map(|d| d.kind) != Some(DipoleKind::Ris) {
                return Err(Error::Geometry(format!("RIS order entry {i} is not a RIS dipole")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Geometry(format!("RIS dipole {i} listed twice")));
            }
        }
        if ris_order.len() > crate::types::MAX_ELEMENTS {
            return Err(Error::Geometry(format!(
                "{} RIS elements exceed the {}-element mask limit",
                ris_order.len(),
                crate::types::MAX_ELEMENTS
            )));
        }
        check_separation(&dipoles)?;
        Ok(Self {
            dipoles,
            tx,
            rx,
            ris_order,
            scattering_antennas,
        })
    }

    pub fn dipoles(&self) -> &[DipoleSpec] {
        &self.dipoles
    }

    pub fn tx(&self) -> usize {
        self.tx
    }

    pub fn rx(&self) -> usize {
        self.rx
    }

    pub fn ris_order(&self) -> &[usize] {
        &self.ris_order
    }

    /// Number of mask elements this scene accepts.
    pub fn n_elements(&self) -> usize {
        self.ris_order.len()
    }

    pub fn scattering_antennas(&self) -> bool {
        self.scattering_antennas
    }

    pub fn count(&self, kind: DipoleKind) -> usize {
        self.dipoles.iter().filter(|d| d.kind == kind).count()
    }

    /// The same scene with transmitter and receiver exchanged.
    pub fn with_swapped_ports(&self) -> Self {
        Self {
            tx: self.rx,
            rx: self.tx,
            ..self.clone()
        }
    }

    /// Whether dipole `i` takes part in the multiple-scattering system.
    pub(crate) fn is_scatterer(&self, i: usize) -> bool {
        self.dipoles[i].kind != DipoleKind::Antenna || self.scattering_antennas
    }

    /// Element position of dipole `i` in the mask, if it is a RIS element.
    pub(crate) fn element_of(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.dipoles.len()];
        for (e, &d) in self.ris_order.iter().enumerate() {
            out[d] = Some(e);
        }
        out
    }
}

fn check_separation(dipoles: &[DipoleSpec]) -> Result<()> {
    for (i, a) in dipoles.iter().enumerate() {
        for (j, b) in dipoles.iter().enumerate().skip(i + 1) {
            let d = distance(a.position, b.position);
            if d < MIN_SEPARATION {
                return Err(Error::Geometry(format!(
                    "dipoles {i} and {j} are {d:.3e} m apart (minimum {MIN_SEPARATION:e} m)"
                )));
            }
        }
    }
    Ok(())
}

pub fn distance(a: Position, b: Position) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Lorentzian parameters for one class of dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorParams {
    pub resonance_off: f64,
    pub resonance_on: f64,
    pub linewidth: f64,
    pub coupling_strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

/// Geometry and material description of a simulated chassis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Cavity extent along x, meters.
    pub width: f64,
    /// Cavity extent along y, meters.
    pub height: f64,
    /// Arc-length spacing of wall dipoles along the perimeter.
    pub wall_spacing: f64,
    pub wall: ResonatorParams,
    pub ris_elements: usize,
    pub ris_spacing: f64,
    /// Rows of RIS elements stacked away from the wall (1 = a line).
    pub ris_rows: usize,
    /// Distance from the wall to the first RIS row.
    pub ris_inset: f64,
    pub ris_side: Side,
    pub ris: ResonatorParams,
    /// Explicit transmitter position; drawn from `seed` when absent.
    pub tx: Option<Position>,
    /// Explicit receiver position; drawn from `seed` when absent.
    pub rx: Option<Position>,
    /// Keep-out distance from the walls for randomly placed antennas.
    pub antenna_margin: f64,
    /// Uniform random displacement (+/- meters) applied to wall dipoles.
    pub wall_jitter: f64,
    pub seed: u64,
    pub scattering_antennas: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 0.45,
            height: 0.45,
            wall_spacing: 0.025,
            wall: ResonatorParams {
                resonance_off: 6.0e9,
                resonance_on: 6.0e9,
                linewidth: 6.0e9,
                coupling_strength: 1.6,
            },
            ris_elements: 16,
            ris_spacing: 0.024,
            ris_rows: 1,
            ris_inset: 0.012,
            ris_side: Side::Bottom,
            ris: ResonatorParams {
                resonance_off: 6.2e9,
                resonance_on: 5.6e9,
                linewidth: 0.15e9,
                coupling_strength: 0.045,
            },
            tx: Some([0.11, 0.31]),
            rx: Some([0.34, 0.17]),
            antenna_margin: 0.05,
            wall_jitter: 0.003,
            seed: 0,
            scattering_antennas: false,
        }
    }
}

impl SceneConfig {
    /// Frequency span where switching the RIS changes its response strongly:
    /// both resonances widened by two linewidths.
    pub fn resonance_contrast_region(&self) -> (f64, f64) {
        let lo = self.ris.resonance_on.min(self.ris.resonance_off) - 2.0 * self.ris.linewidth;
        let hi = self.ris.resonance_on.max(self.ris.resonance_off) + 2.0 * self.ris.linewidth;
        (lo, hi)
    }

    fn spec(&self, position: Position, kind: DipoleKind, p: &ResonatorParams) -> DipoleSpec {
        DipoleSpec {
            position,
            kind,
            resonance_off: p.resonance_off,
            resonance_on: p.resonance_on,
            linewidth: p.linewidth,
            coupling_strength: p.coupling_strength,
        }
    }
}

/// Builds the dipole scene described by `config`; deterministic in the seed.
pub fn build_scene(config: &SceneConfig) -> Result<Scene> {
    let (w, h) = (config.width, config.height);
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::Geometry(format!("cavity size {w} x {h} m must be positive")));
    }
    if !(config.wall_spacing > 0.0) {
        return Err(Error::Geometry("wall spacing must be positive".into()));
    }
    if !(config.wall_jitter >= 0.0 && config.wall_jitter < 0.5 * config.wall_spacing) {
        return Err(Error::Geometry(
            "wall jitter must be non-negative and below half the wall spacing".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut dipoles = Vec::new();

    let perimeter = 2.0 * (w + h);
    let n_wall = (perimeter / config.wall_spacing).round() as usize;
    let step = perimeter / n_wall as f64;
    for k in 0..n_wall {
        let [x, y] = perimeter_point(w, h, k as f64 * step);
        let jx = rng.gen_range(-1.0..=1.0) * config.wall_jitter;
        let jy = rng.gen_range(-1.0..=1.0) * config.wall_jitter;
        dipoles.push(config.spec([x + jx, y + jy], DipoleKind::Wall, &config.wall));
    }

    let ris_order = place_ris(config, &mut dipoles)?;

    let tx = antenna_position(config, config.tx, "transmitter", &mut rng)?;
    let rx = antenna_position(config, config.rx, "receiver", &mut rng)?;
    let antenna = ResonatorParams {
        coupling_strength: if config.scattering_antennas {
            config.wall.coupling_strength
        } else {
            0.0
        },
        ..config.wall
    };
    dipoles.push(config.spec(tx, DipoleKind::Antenna, &antenna));
    dipoles.push(config.spec(rx, DipoleKind::Antenna, &antenna));
    let tx_index = dipoles.len() - 2;
    let rx_index = dipoles.len() - 1;

    Scene::new(dipoles, tx_index, rx_index, ris_order, config.scattering_antennas)
}

/// Point at arc length `s` along the rectangle perimeter, counter-clockwise
/// from the origin corner.
fn perimeter_point(w: f64, h: f64, s: f64) -> Position {
    if s < w {
        [s, 0.0]
    } else if s < w + h {
        [w, s - w]
    } else if s < 2.0 * w + h {
        [w - (s - w - h), h]
    } else {
        [0.0, h - (s - 2.0 * w - h)]
    }
}

fn place_ris(config: &SceneConfig, dipoles: &mut Vec<DipoleSpec>) -> Result<Vec<usize>> {
    let n = config.ris_elements;
    if n == 0 {
        return Ok(Vec::new());
    }
    let rows = config.ris_rows.max(1);
    let per_row = n.div_ceil(rows);
    let p = config.ris_spacing;
    if !(p > 0.0) {
        return Err(Error::Geometry("RIS spacing must be positive".into()));
    }
    let (w, h) = (config.width, config.height);
    let wall_len = match config.ris_side {
        Side::Bottom | Side::Top => w,
        Side::Left | Side::Right => h,
    };
    let depth = match config.ris_side {
        Side::Bottom | Side::Top => h,
        Side::Left | Side::Right => w,
    };
    let span = (per_row - 1) as f64 * p;
    let max_inset = config.ris_inset + (rows - 1) as f64 * p;
    if span >= wall_len || !(config.ris_inset > 0.0) || max_inset >= depth {
        return Err(Error::Geometry(format!(
            "RIS of {rows} x {per_row} elements at {p} m spacing does not fit on the wall"
        )));
    }
    let start = 0.5 * (wall_len - span);
    let mut order = Vec::with_capacity(n);
    for e in 0..n {
        let along = start + (e % per_row) as f64 * p;
        let inset = config.ris_inset + (e / per_row) as f64 * p;
        let pos = match config.ris_side {
            Side::Bottom => [along, inset],
            Side::Top => [w - along, h - inset],
            Side::Left => [inset, h - along],
            Side::Right => [w - inset, along],
        };
        order.push(dipoles.len());
        dipoles.push(config.spec(pos, DipoleKind::Ris, &config.ris));
    }
    Ok(order)
}

fn antenna_position(
    config: &SceneConfig,
    explicit: Option<Position>,
    label: &str,
    rng: &mut ChaCha8Rng,
) -> Result<Position> {
    let (w, h) = (config.width, config.height);
    match explicit {
        Some(p) => {
            if !(p[0] > 0.0 && p[0] < w && p[1] > 0.0 && p[1] < h) {
                return Err(Error::Geometry(format!(
                    "{label} at ({}, {}) lies outside the {w} x {h} m cavity",
                    p[0], p[1]
                )));
            }
            Ok(p)
        }
        None => {
            let m = config.antenna_margin;
            if !(m >= 0.0 && 2.0 * m < w && 2.0 * m < h) {
                return Err(Error::Geometry(format!(
                    "antenna margin {m} m leaves no room inside the cavity"
                )));
            }
            Ok([rng.gen_range(m..w - m), rng.gen_range(m..h - m)])
        }
    }
}
