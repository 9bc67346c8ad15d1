//! Coupled-dipole (Foldy-Lax) surrogate of a reverberant chassis.
//!
//! Walls, RIS elements and (optionally) antennas are point scatterers in a
//! 2D scalar field. The exciting field `e_m` at scatterer `m` satisfies
//!
//! ```text
//! e_m = G(r_m, r_tx) + sum_{n != m} G(r_m, r_n) alpha_n e_n
//! ```
//!
//! and the channel is `H = G(r_rx, r_tx) + sum_m G(r_rx, r_m) alpha_m e_m`.
//!
//! [`channel`] solves the full system directly. [`ChannelModel`] folds the
//! fixed scatterers into a dressed background Green's function once per
//! frequency so that each mask only costs an `N x N` solve; both routes give
//! the same answer to rounding.

mod bessel;
pub mod linalg;
mod scene;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use bessel::j0_y0;
pub use scene::{
    build_scene, distance, polarizability, DipoleKind, DipoleSpec, Position, ResonatorParams, Scene, SceneConfig, Side,
    MIN_SEPARATION,
};

use crate::error::{Error, Result};
use crate::types::{ChannelSweep, FrequencyGrid, Mask};
use linalg::{Lu, Matrix};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Systems whose 1-norm condition number exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative residual allowed for the direct Foldy-Lax solve.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

pub fn wavenumber(f: f64) -> f64 {
    2.0 * PI * f / SPEED_OF_LIGHT
}

/// 2D scalar free-space Green's function `(i/4) H0(1)(k |r1 - r2|)`.
pub fn greens_2d(r1: Position, r2: Position, f: f64) -> Result<Complex64> {
    if !(f > 0.0) {
        return Err(Error::domain(format!("frequency {f} Hz must be positive")));
    }
    let d = distance(r1, r2);
    if !(d >= MIN_SEPARATION) {
        return Err(Error::Geometry(format!(
            "Green's function is singular for points {d:e} m apart"
        )));
    }
    Ok(greens_unchecked(d, wavenumber(f)))
}

fn greens_unchecked(d: f64, k: f64) -> Complex64 {
    let (j0, y0) = j0_y0(k * d);
    // (i/4)(J0 + i Y0)
    Complex64::new(-0.25 * y0, 0.25 * j0)
}

fn check_mask(scene: &Scene, mask: &Mask) -> Result<()> {
    if mask.len() != scene.n_elements() {
        return Err(Error::domain(format!(
            "mask has {} elements but the scene has {}",
            mask.len(),
            scene.n_elements()
        )));
    }
    Ok(())
}

fn numerical(f: f64, mask: &Mask, reason: impl Into<String>) -> Error {
    Error::Numerical {
        frequency_hz: f,
        mask_index: Some(mask.index()),
        reason: reason.into(),
    }
}

/// Polarizability of every dipole for `mask` at `f`; non-scatterers get 0.
fn alphas(scene: &Scene, mask: &Mask, f: f64) -> Vec<Complex64> {
    let element = scene.element_of();
    scene
        .dipoles()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            if !scene.is_scatterer(i) {
                return Complex64::default();
            }
            let on = element[i].is_some_and(|e| mask.state(e));
            scene::lorentzian(d, on, f)
        })
        .collect()
}

/// Transfer function from the transmit to the receive antenna.
pub fn channel(scene: &Scene, mask: &Mask, f: f64) -> Result<Complex64> {
    channel_with_excitation(scene, mask, f, Complex64::new(1.0, 0.0))
}

/// [`channel`] for a transmitter of complex amplitude `amplitude`.
pub fn channel_with_excitation(scene: &Scene, mask: &Mask, f: f64, amplitude: Complex64) -> Result<Complex64> {
    check_mask(scene, mask)?;
    if !(f > 0.0) {
        return Err(Error::domain(format!("frequency {f} Hz must be positive")));
    }
    let k = wavenumber(f);
    let dipoles = scene.dipoles();
    let pos = |i: usize| dipoles[i].position;
    let (tx, rx) = (scene.tx(), scene.rx());
    let alpha = alphas(scene, mask, f);
    let members: Vec<usize> = (0..dipoles.len()).filter(|&i| scene.is_scatterer(i)).collect();
    let n = members.len();

    let g = |a: usize, b: usize| greens_unchecked(distance(pos(a), pos(b)), k);
    let direct = amplitude * g(rx, tx);
    if n == 0 {
        return Ok(direct);
    }

    let mut system = Matrix::identity(n);
    for (r, &a) in members.iter().enumerate() {
        for (c, &b) in members.iter().enumerate() {
            if a != b {
                system[(r, c)] -= g(a, b) * alpha[b];
            }
        }
    }
    let rhs: Vec<Complex64> = members
        .iter()
        .map(|&a| {
            if a == tx {
                Complex64::default()
            } else {
                amplitude * g(a, tx)
            }
        })
        .collect();

    let lu = Lu::factor(system.clone()).map_err(|_| numerical(f, mask, "singular system"))?;
    let cond = system.norm1() * lu.inverse_norm1_estimate();
    if !(cond <= CONDITION_LIMIT) {
        return Err(numerical(f, mask, format!("condition number {cond:.3e}")));
    }
    let mut field = lu.solve(&rhs);
    let rhs_norm = norm2(&rhs).max(f64::MIN_POSITIVE);
    let mut residual = residual_norm(&system, &field, &rhs) / rhs_norm;
    if residual > RESIDUAL_LIMIT {
        // One step of iterative refinement.
        let r: Vec<Complex64> = rhs.iter().zip(system.mul_vec(&field)).map(|(b, ax)| b - ax).collect();
        for (x, dx) in field.iter_mut().zip(lu.solve(&r)) {
            *x += dx;
        }
        residual = residual_norm(&system, &field, &rhs) / rhs_norm;
        if residual > RESIDUAL_LIMIT {
            return Err(numerical(f, mask, format!("relative residual {residual:.3e}")));
        }
    }

    let scattered: Complex64 = members
        .iter()
        .zip(&field)
        .filter(|(&b, _)| b != rx)
        .map(|(&b, e)| g(rx, b) * alpha[b] * e)
        .sum();
    Ok(direct + scattered)
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn residual_norm(a: &Matrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.mul_vec(x);
    ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt()
}

/// Channel at every grid frequency via the direct solve.
pub fn sweep(scene: &Scene, mask: &Mask, grid: &FrequencyGrid) -> Result<ChannelSweep> {
    check_mask(scene, mask)?;
    let samples = (0..grid.count())
        .map(|j| channel(scene, mask, grid.frequency(j)).map_err(|e| e.at_grid_index(j)))
        .collect::<Result<Vec<_>>>()?;
    ChannelSweep::new(*grid, samples)
}

/// Per-frequency reduction of a scene to its RIS elements.
#[derive(Debug, Clone)]
struct FrequencyBlock {
    /// Background-dressed tx -> rx transfer.
    direct: Complex64,
    /// Dressed Green's function RIS element -> rx.
    to_rx: Vec<Complex64>,
    /// Dressed Green's function tx -> RIS element.
    from_tx: Vec<Complex64>,
    /// Dressed RIS-RIS coupling, row-major, including wall-mediated self terms.
    coupling: Vec<Complex64>,
    /// Element polarizabilities, `[off, on]`.
    alpha: Vec<[Complex64; 2]>,
}

/// A scene prepared on a fixed grid for fast evaluation of many masks.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    scene: Scene,
    grid: FrequencyGrid,
    blocks: Vec<FrequencyBlock>,
}

impl ChannelModel {
    pub fn new(scene: Scene, grid: FrequencyGrid) -> Result<Self> {
        let freqs = grid.frequencies();
        let blocks = crate::par_map(&freqs, |&f| prepare_block(&scene, f))
            .into_iter()
            .enumerate()
            .map(|(j, b)| b.map_err(|e| e.at_grid_index(j)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { scene, grid, blocks })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn n_elements(&self) -> usize {
        self.scene.n_elements()
    }

    /// Channel at grid point `j`.
    pub fn channel_at(&self, mask: &Mask, j: usize) -> Result<Complex64> {
        check_mask(&self.scene, mask)?;
        self.solve_block(mask, j)
    }

    pub fn sweep(&self, mask: &Mask) -> Result<ChannelSweep> {
        check_mask(&self.scene, mask)?;
        let samples = (0..self.grid.count())
            .map(|j| self.solve_block(mask, j))
            .collect::<Result<Vec<_>>>()?;
        ChannelSweep::new(self.grid, samples)
    }

    fn solve_block(&self, mask: &Mask, j: usize) -> Result<Complex64> {
        let block = &self.blocks[j];
        let n = block.alpha.len();
        if n == 0 {
            return Ok(block.direct);
        }
        let alpha: Vec<Complex64> = (0..n).map(|e| block.alpha[e][usize::from(mask.state(e))]).collect();
        let mut system = Matrix::identity(n);
        for r in 0..n {
            for c in 0..n {
                system[(r, c)] -= block.coupling[r * n + c] * alpha[c];
            }
        }
        let f = self.grid.frequency(j);
        let lu = Lu::factor(system.clone()).map_err(|_| numerical(f, mask, "singular system").at_grid_index(j))?;
        let cond = system.norm1() * lu.inverse_norm1_estimate();
        if !(cond <= CONDITION_LIMIT) {
            return Err(numerical(f, mask, format!("condition number {cond:.3e}")).at_grid_index(j));
        }
        let field = lu.solve(&block.from_tx);
        let scattered: Complex64 = (0..n).map(|e| block.to_rx[e] * alpha[e] * field[e]).sum();
        Ok(block.direct + scattered)
    }
}

fn prepare_block(scene: &Scene, f: f64) -> Result<FrequencyBlock> {
    let k = wavenumber(f);
    let dipoles = scene.dipoles();
    let pos = |i: usize| dipoles[i].position;
    let g = |a: usize, b: usize| greens_unchecked(distance(pos(a), pos(b)), k);
    let element = scene.element_of();
    let background: Vec<usize> = (0..dipoles.len())
        .filter(|&i| scene.is_scatterer(i) && element[i].is_none())
        .collect();
    let alpha_bg: Vec<Complex64> = background
        .iter()
        .map(|&b| scene::lorentzian(&dipoles[b], false, f))
        .collect();
    let nb = background.len();

    // External points: tx, rx, then the RIS elements in mask order.
    let mut external = vec![scene.tx(), scene.rx()];
    external.extend_from_slice(scene.ris_order());
    let coupling_to_bg = |q: usize| -> Vec<Complex64> {
        background
            .iter()
            .map(|&b| if b == q { Complex64::default() } else { g(b, q) })
            .collect()
    };
    let columns: Vec<Vec<Complex64>> = external.iter().map(|&q| coupling_to_bg(q)).collect();

    // Background fields excited from each external point.
    let excited: Vec<Vec<Complex64>> = if nb == 0 {
        vec![Vec::new(); external.len()]
    } else {
        let mut system = Matrix::identity(nb);
        for (r, &a) in background.iter().enumerate() {
            for (c, &b) in background.iter().enumerate() {
                if a != b {
                    system[(r, c)] -= g(a, b) * alpha_bg[c];
                }
            }
        }
        let singular = |reason: String| Error::Numerical {
            frequency_hz: f,
            mask_index: None,
            reason,
        };
        let lu = Lu::factor(system.clone()).map_err(|_| singular("singular background system".into()))?;
        let cond = system.norm1() * lu.inverse_norm1_estimate();
        if !(cond <= CONDITION_LIMIT) {
            return Err(singular(format!("background condition number {cond:.3e}")));
        }
        columns.iter().map(|c| lu.solve(c)).collect()
    };

    let dressed = |p: usize, q: usize| -> Complex64 {
        let (a, b) = (external[p], external[q]);
        let free = if a == b { Complex64::default() } else { g(a, b) };
        let via_bg: Complex64 = (0..nb).map(|i| columns[p][i] * alpha_bg[i] * excited[q][i]).sum();
        free + via_bg
    };

    let n = scene.n_elements();
    let mut coupling = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            coupling.push(dressed(2 + r, 2 + c));
        }
    }
    let alpha = scene
        .ris_order()
        .iter()
        .map(|&d| {
            [
                scene::lorentzian(&dipoles[d], false, f),
                scene::lorentzian(&dipoles[d], true, f),
            ]
        })
        .collect();
    Ok(FrequencyBlock {
        direct: dressed(1, 0),
        to_rx: (0..n).map(|e| dressed(1, 2 + e)).collect(),
        from_tx: (0..n).map(|e| dressed(2 + e, 0)).collect(),
        coupling,
        alpha,
    })
}
