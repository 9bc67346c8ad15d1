//! Shaping channel impulse responses inside a reverberant chassis with a
//! binary reconfigurable intelligent surface (RIS).
//!
//! The crate is split along the analysis pipeline:
//!
//! - [`types`]: masks, frequency grids, sweeps, impulse responses, datasets.
//! - [`physics`]: a coupled-dipole cavity surrogate that produces
//!   mask-dependent channel sweeps.
//! - [`dsp`]: per-frequency mask variability, band selection, impulse
//!   response extraction and the peak-power figure of merit.
//! - [`optim`]: exhaustive, coordinate-descent and random mask search.
//! - [`ingest`]: sweep archives and Touchstone `.s2p` files.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dsp;
pub mod error;
pub mod ingest;
pub mod optim;
pub mod physics;
pub mod types;

pub use error::{Error, Result};
pub use types::{ChannelSweep, Cir, FrequencyGrid, Mask, MaskSweepDataset, Origin};

pub use num_complex::Complex64;

/// Order-preserving map that runs in parallel when the `parallel` feature is on.
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
