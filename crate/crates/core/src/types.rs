//! Domain types shared by the physics, dsp, optim and ingest modules.
//!
//! Everything here is immutable after construction; "mutating" operations
//! such as [`Mask::flip`] return new values.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported RIS element count.
pub const MAX_ELEMENTS: usize = 32;

/// One global on/off assignment of the RIS elements.
///
/// Bit `i` of the integer index is the state of element `i`, so element 0 is
/// the least-significant bit. All file formats and logs use this numbering.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mask {
    bits: u32,
    len: u8,
}

impl Mask {
    pub fn from_index(index: u64, n: usize) -> Result<Self> {
        if n > MAX_ELEMENTS {
            return Err(Error::domain(format!(
                "mask length {n} exceeds the {MAX_ELEMENTS}-element limit"
            )));
        }
        let bound = 1u64 << n;
        if index >= bound {
            return Err(Error::domain(format!(
                "mask index {index} out of range for {n} elements (must be < {bound})"
            )));
        }
        Ok(Self {
            bits: index as u32,
            len: n as u8,
        })
    }

    pub fn from_states(states: &[bool]) -> Result<Self> {
        let index = states
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &on)| acc | (u64::from(on) << i));
        Self::from_index(index, states.len())
    }

    pub fn all_off(n: usize) -> Result<Self> {
        Self::from_index(0, n)
    }

    pub fn all_on(n: usize) -> Result<Self> {
        Self::from_index(full_index(n)?, n)
    }

    pub fn index(&self) -> u64 {
        u64::from(self.bits)
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// State of element `i`; panics if `i` is out of range.
    pub fn state(&self, i: usize) -> bool {
        assert!(
            i < self.len(),
            "element {i} out of range for mask of length {}",
            self.len
        );
        (self.bits >> i) & 1 == 1
    }

    pub fn states(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| (self.bits >> i) & 1 == 1)
    }

    pub fn flip(&self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::domain(format!(
                "element {i} out of range for mask of length {}",
                self.len
            )));
        }
        Ok(Self {
            bits: self.bits ^ (1 << i),
            len: self.len,
        })
    }

    pub fn complement(&self) -> Self {
        let all = full_index(self.len()).expect("length already validated") as u32;
        Self {
            bits: !self.bits & all,
            len: self.len,
        }
    }
}

/// Index of the all-on mask, `2^n - 1`.
fn full_index(n: usize) -> Result<u64> {
    if n > MAX_ELEMENTS {
        return Err(Error::domain(format!(
            "mask length {n} exceeds the {MAX_ELEMENTS}-element limit"
        )));
    }
    Ok((1u64 << n) - 1)
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mask({self})")
    }
}

/// Element 0 first, e.g. `101` for index 5 with three elements.
impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for on in self.states() {
            f.write_str(if on { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Uniform frequency axis of a sweep. The spacing is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct FrequencyGrid {
    f_start: f64,
    f_stop: f64,
    count: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    f_start: f64,
    f_stop: f64,
    count: usize,
}

impl TryFrom<RawGrid> for FrequencyGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        FrequencyGrid::new(raw.f_start, raw.f_stop, raw.count)
    }
}

impl From<FrequencyGrid> for RawGrid {
    fn from(g: FrequencyGrid) -> Self {
        RawGrid {
            f_start: g.f_start,
            f_stop: g.f_stop,
            count: g.count,
        }
    }
}

impl FrequencyGrid {
    pub fn new(f_start: f64, f_stop: f64, count: usize) -> Result<Self> {
        if !(f_start.is_finite() && f_stop.is_finite()) {
            return Err(Error::domain("grid endpoints must be finite"));
        }
        if f_start <= 0.0 {
            return Err(Error::domain(format!(
                "grid start {f_start} Hz must be strictly positive"
            )));
        }
        if f_start >= f_stop {
            return Err(Error::domain(format!(
                "grid start {f_start} Hz must be below stop {f_stop} Hz"
            )));
        }
        if count < 2 {
            return Err(Error::domain(format!("grid needs at least 2 points, got {count}")));
        }
        Ok(Self { f_start, f_stop, count })
    }

    /// 401 points over 5.7-6.1 GHz.
    pub fn default_band() -> Self {
        Self::new(5.7e9, 6.1e9, 401).expect("valid constant grid")
    }

    pub fn f_start(&self) -> f64 {
        self.f_start
    }

    pub fn f_stop(&self) -> f64 {
        self.f_stop
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        (self.f_stop - self.f_start) / (self.count - 1) as f64
    }

    /// Frequency of point `j`; the last point is exactly `f_stop`.
    pub fn frequency(&self, j: usize) -> f64 {
        debug_assert!(j < self.count);
        if j + 1 == self.count {
            self.f_stop
        } else {
            self.f_start + j as f64 * self.spacing()
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.frequency(j)).collect()
    }

    /// Contiguous sub-grid spanning points `first..=last` of this grid.
    pub fn sub_grid(&self, first: usize, last: usize) -> Result<Self> {
        if last >= self.count || first >= last {
            return Err(Error::domain(format!(
                "sub-grid {first}..={last} invalid for a {}-point grid",
                self.count
            )));
        }
        Self::new(self.frequency(first), self.frequency(last), last - first + 1)
    }

    /// Index of the grid point closest to `f`.
    pub fn nearest_index(&self, f: f64) -> usize {
        let pos = ((f - self.f_start) / self.spacing()).round();
        pos.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

/// Complex transfer function samples H(f) for one mask on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSweep {
    grid: FrequencyGrid,
    samples: Vec<Complex64>,
}

impl ChannelSweep {
    pub fn new(grid: FrequencyGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.count() {
            return Err(Error::domain(format!(
                "sweep has {} samples for a {}-point grid",
                samples.len(),
                grid.count()
            )));
        }
        if let Some(j) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::domain(format!("non-finite sweep sample at index {j}")));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Restrict the sweep to grid points `first..=last`.
    pub fn slice(&self, first: usize, last: usize) -> Result<Self> {
        let grid = self.grid.sub_grid(first, last)?;
        Self::new(grid, self.samples[first..=last].to_vec())
    }
}

/// Uniformly sampled complex impulse response, `t = k * t_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    t_step: f64,
    samples: Vec<Complex64>,
}

impl Cir {
    pub fn new(t_step: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(t_step > 0.0 && t_step.is_finite()) {
            return Err(Error::domain(format!("CIR time step {t_step} must be positive")));
        }
        if samples.len() < 2 {
            return Err(Error::domain("CIR needs at least 2 samples"));
        }
        Ok(Self { t_step, samples })
    }

    pub fn t_step(&self) -> f64 {
        self.t_step
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.t_step
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Simulated,
    Measured,
}

/// A campaign of per-mask sweeps sharing one frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSweepDataset {
    masks: Vec<Mask>,
    sweeps: Vec<ChannelSweep>,
    origin: Origin,
}

impl MaskSweepDataset {
    pub fn new(masks: Vec<Mask>, sweeps: Vec<ChannelSweep>, origin: Origin) -> Result<Self> {
        if masks.is_empty() {
            return Err(Error::Dataset("dataset needs at least one mask".into()));
        }
        if masks.len() != sweeps.len() {
            return Err(Error::Dataset(format!(
                "{} masks but {} sweeps",
                masks.len(),
                sweeps.len()
            )));
        }
        let n = masks[0].len();
        if let Some(m) = masks.iter().find(|m| m.len() != n) {
            return Err(Error::Dataset(format!(
                "mask {m} has {} elements, expected {n}",
                m.len()
            )));
        }
        let grid = *sweeps[0].grid();
        if let Some(k) = sweeps.iter().position(|s| *s.grid() != grid) {
            return Err(Error::Dataset(format!(
                "sweep {k} grid differs from the first sweep's grid"
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(masks.len());
        if let Some(m) = masks.iter().find(|m| !seen.insert(m.index())) {
            return Err(Error::Dataset(format!("duplicate mask index {}", m.index())));
        }
        Ok(Self { masks, sweeps, origin })
    }

    pub fn masks(&self) -> &[Mask] {
        &self.masks
    }

    pub fn sweeps(&self) -> &[ChannelSweep] {
        &self.sweeps
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.sweeps[0].grid()
    }

    pub fn n_elements(&self) -> usize {
        self.masks[0].len()
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mask, &ChannelSweep)> {
        self.masks.iter().zip(&self.sweeps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mask_from_index_examples() {
        let m = Mask::from_index(0, 16).unwrap();
        assert!(m.states().all(|s| !s));
        let m = Mask::from_index(65535, 16).unwrap();
        assert!(m.states().all(|s| s));
        assert_eq!(m.len(), 16);
        let m = Mask::from_index(5, 3).unwrap();
        assert_eq!(m.states().collect::<Vec<_>>(), vec![true, false, true]);
        assert_eq!(m.to_string(), "101");
    }

    #[test]
    fn mask_index_out_of_range_names_bound() {
        let err = Mask::from_index(65536, 16).unwrap_err().to_string();
        assert!(err.contains("65536"), "{err}");
        assert!(Mask::from_index(0, 33).is_err());
        assert!(Mask::from_index(u32::MAX as u64, 32).is_ok());
    }

    #[test]
    fn round_trip_exhaustive_small() {
        for n in 0..=12 {
            for index in 0..(1u64 << n) {
                let m = Mask::from_index(index, n).unwrap();
                assert_eq!(m.index(), index);
                let states: Vec<bool> = m.states().collect();
                assert_eq!(Mask::from_states(&states).unwrap(), m);
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_sampled(n in 13usize..=20, raw in any::<u64>()) {
            let index = raw % (1u64 << n);
            prop_assert_eq!(Mask::from_index(index, n).unwrap().index(), index);
        }

        #[test]
        fn flip_is_involution(raw in any::<u32>(), i in 0usize..16) {
            let m = Mask::from_index(u64::from(raw & 0xffff), 16).unwrap();
            let f = m.flip(i).unwrap();
            let differing: Vec<usize> = (0..16).filter(|&k| f.state(k) != m.state(k)).collect();
            prop_assert_eq!(differing, vec![i]);
            prop_assert_eq!(f.flip(i).unwrap(), m);
        }
    }

    #[test]
    fn flip_examples() {
        let m = Mask::from_states(&[false, false]).unwrap();
        assert_eq!(m.flip(0).unwrap(), Mask::from_states(&[true, false]).unwrap());
        let m = Mask::from_states(&[true, true]).unwrap();
        assert_eq!(m.flip(1).unwrap(), Mask::from_states(&[true, false]).unwrap());
        assert!(m.flip(2).is_err());
    }

    #[test]
    fn complement_of_all_off_is_all_on() {
        let off = Mask::all_off(16).unwrap();
        assert_eq!(off.complement(), Mask::all_on(16).unwrap());
        assert_eq!(Mask::all_on(32).unwrap().index(), u32::MAX as u64);
        assert_eq!(Mask::all_on(0).unwrap().index(), 0);
    }

    #[test]
    fn grid_frequencies_examples() {
        let g = FrequencyGrid::new(5.7e9, 6.1e9, 5).unwrap();
        let f = g.frequencies();
        let expected = [5.7e9, 5.8e9, 5.9e9, 6.0e9, 6.1e9];
        for (a, b) in f.iter().zip(expected) {
            assert!(((a - b) / b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(f[0], 5.7e9);
        assert_eq!(f[4], 6.1e9);
        assert_eq!(FrequencyGrid::new(1.0, 2.0, 2).unwrap().frequencies(), vec![1.0, 2.0]);
        assert!(FrequencyGrid::new(0.0, 1.0, 3).is_err());
        assert!(FrequencyGrid::new(2.0, 1.0, 3).is_err());
        assert!(FrequencyGrid::new(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn default_band_spacing_is_uniform() {
        let g = FrequencyGrid::default_band();
        let f = g.frequencies();
        let df = g.spacing();
        assert_eq!(f.len(), 401);
        for w in f.windows(2) {
            assert!(((w[1] - w[0]) - df).abs() / df < 1e-5);
        }
        for (j, &fj) in f.iter().enumerate() {
            let exact = 5.7e9 + j as f64 * 1e6;
            assert!((fj - exact).abs() / exact < 1e-12);
        }
    }

    #[test]
    fn grid_deserialization_validates() {
        let ok: FrequencyGrid = serde_json::from_str(r#"{"f_start":1.0,"f_stop":2.0,"count":3}"#).unwrap();
        assert_eq!(ok.count(), 3);
        assert!(serde_json::from_str::<FrequencyGrid>(r#"{"f_start":0,"f_stop":2.0,"count":3}"#).is_err());
    }

    #[test]
    fn sweep_rejects_length_mismatch_and_nan() {
        let g = FrequencyGrid::new(1.0, 2.0, 3).unwrap();
        assert!(ChannelSweep::new(g, vec![Complex64::new(1.0, 0.0); 2]).is_err());
        let mut s = vec![Complex64::new(1.0, 0.0); 3];
        s[1].im = f64::NAN;
        assert!(ChannelSweep::new(g, s).is_err());
    }

    #[test]
    fn dataset_validation() {
        let g1 = FrequencyGrid::new(1.0, 2.0, 3).unwrap();
        let g2 = FrequencyGrid::new(1.0, 3.0, 3).unwrap();
        let s1 = ChannelSweep::new(g1, vec![Complex64::default(); 3]).unwrap();
        let s2 = ChannelSweep::new(g2, vec![Complex64::default(); 3]).unwrap();
        let m0 = Mask::from_index(0, 2).unwrap();
        let m1 = Mask::from_index(1, 2).unwrap();
        assert!(MaskSweepDataset::new(vec![m0, m1], vec![s1.clone(), s2], Origin::Measured).is_err());
        assert!(MaskSweepDataset::new(vec![m0], vec![s1.clone(), s1.clone()], Origin::Measured).is_err());
        assert!(MaskSweepDataset::new(vec![m0, m0], vec![s1.clone(), s1.clone()], Origin::Measured).is_err());
        assert!(MaskSweepDataset::new(vec![], vec![], Origin::Measured).is_err());
        let d = MaskSweepDataset::new(vec![m0, m1], vec![s1.clone(), s1.clone()], Origin::Simulated).unwrap();
        let d2 = MaskSweepDataset::new(vec![m0, m1], vec![s1.clone(), s1], Origin::Simulated).unwrap();
        assert_eq!(d, d2);
        assert_eq!(d.len(), 2);
    }
}
