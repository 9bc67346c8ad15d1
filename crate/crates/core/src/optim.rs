//! Mask search over any source of channel sweeps.
//!
//! Every strategy reports its evaluations in submission order. Ties between
//! equal figures of merit always go to the smallest mask index, so results
//! do not depend on evaluation order or thread count.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsp::{fom, CirExtractor, FomConfig};
use crate::error::{Error, Result};
use crate::physics::ChannelModel;
use crate::types::{ChannelSweep, FrequencyGrid, Mask, MaskSweepDataset};

/// Largest element count accepted for full enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Which masks a provider can produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskSpace {
    /// Every mask of `n` elements.
    Full(usize),
    /// Only these recorded mask indices, ascending.
    Recorded(Vec<u64>),
}

impl MaskSpace {
    pub fn len(&self) -> u64 {
        match self {
            MaskSpace::Full(n) => 1u64 << n,
            MaskSpace::Recorded(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k`-th available mask index in ascending order.
    pub fn nth(&self, k: u64) -> u64 {
        match self {
            MaskSpace::Full(_) => k,
            MaskSpace::Recorded(v) => v[k as usize],
        }
    }

    pub fn contains(&self, index: u64) -> bool {
        match self {
            MaskSpace::Full(n) => index < 1u64 << n,
            MaskSpace::Recorded(v) => v.binary_search(&index).is_ok(),
        }
    }
}

/// A pure mapping from masks to channel sweeps on one fixed grid.
pub trait ChannelProvider: Sync {
    fn n_elements(&self) -> usize;

    fn grid(&self) -> &FrequencyGrid;

    fn available(&self) -> MaskSpace;

    fn sweep(&self, mask: &Mask) -> Result<ChannelSweep>;
}

impl ChannelProvider for ChannelModel {
    fn n_elements(&self) -> usize {
        ChannelModel::n_elements(self)
    }

    fn grid(&self) -> &FrequencyGrid {
        ChannelModel::grid(self)
    }

    fn available(&self) -> MaskSpace {
        MaskSpace::Full(ChannelModel::n_elements(self))
    }

    fn sweep(&self, mask: &Mask) -> Result<ChannelSweep> {
        ChannelModel::sweep(self, mask)
    }
}

/// Serves the recorded sweeps of a measurement campaign.
#[derive(Debug, Clone)]
pub struct DatasetProvider {
    dataset: MaskSweepDataset,
    by_index: HashMap<u64, usize>,
    recorded: Vec<u64>,
}

impl DatasetProvider {
    pub fn new(dataset: MaskSweepDataset) -> Self {
        let by_index: HashMap<u64, usize> = dataset
            .masks()
            .iter()
            .enumerate()
            .map(|(k, m)| (m.index(), k))
            .collect();
        let mut recorded: Vec<u64> = by_index.keys().copied().collect();
        recorded.sort_unstable();
        Self {
            dataset,
            by_index,
            recorded,
        }
    }

    pub fn dataset(&self) -> &MaskSweepDataset {
        &self.dataset
    }
}

impl ChannelProvider for DatasetProvider {
    fn n_elements(&self) -> usize {
        self.dataset.n_elements()
    }

    fn grid(&self) -> &FrequencyGrid {
        self.dataset.grid()
    }

    fn available(&self) -> MaskSpace {
        MaskSpace::Recorded(self.recorded.clone())
    }

    fn sweep(&self, mask: &Mask) -> Result<ChannelSweep> {
        self.by_index
            .get(&mask.index())
            .filter(|_| mask.len() == self.dataset.n_elements())
            .map(|&k| self.dataset.sweeps()[k].clone())
            .ok_or(Error::MaskUnavailable(mask.index()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub mask_index: u64,
    pub fom: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_mask: Mask,
    pub best_fom: f64,
    /// Every requested evaluation, in submission order (duplicates included).
    pub trace: Vec<Evaluation>,
    pub evaluations: usize,
}

impl SearchResult {
    fn from_trace(trace: Vec<Evaluation>, n: usize) -> Result<Self> {
        let best = extreme(&trace, |a, b| a > b).ok_or_else(|| Error::domain("empty search trace"))?;
        Ok(Self {
            best_mask: Mask::from_index(best.mask_index, n)?,
            best_fom: best.fom,
            evaluations: trace.len(),
            trace,
        })
    }

    /// Lowest figure of merit in the trace (smallest index on ties).
    pub fn worst(&self) -> Evaluation {
        extreme(&self.trace, |a, b| a < b).expect("trace is never empty")
    }

    /// Median of the traced figures of merit.
    pub fn median_fom(&self) -> f64 {
        let mut v: Vec<f64> = self.trace.iter().map(|e| e.fom).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// Entry that wins under `better`, smallest mask index on ties.
fn extreme(trace: &[Evaluation], better: impl Fn(f64, f64) -> bool) -> Option<Evaluation> {
    trace.iter().copied().reduce(|acc, e| {
        if better(e.fom, acc.fom) || (e.fom == acc.fom && e.mask_index < acc.mask_index) {
            e
        } else {
            acc
        }
    })
}

/// Scores masks of one provider with a fixed figure-of-merit setup.
pub struct Evaluator<'a, P: ChannelProvider + ?Sized> {
    provider: &'a P,
    space: MaskSpace,
    extractor: CirExtractor,
    cfg: FomConfig,
}

impl<'a, P: ChannelProvider + ?Sized> Evaluator<'a, P> {
    pub fn new(provider: &'a P, cfg: &FomConfig) -> Result<Self> {
        Ok(Self {
            provider,
            space: provider.available(),
            extractor: CirExtractor::new(provider.grid().count(), cfg)?,
            cfg: *cfg,
        })
    }

    pub fn evaluate(&self, mask: &Mask) -> Result<f64> {
        if !self.space.contains(mask.index()) || mask.len() != self.provider.n_elements() {
            return Err(Error::MaskUnavailable(mask.index()));
        }
        let sweep = self.provider.sweep(mask)?;
        fom(&self.extractor.extract(&sweep)?, &self.cfg)
    }

    fn evaluate_index(&self, index: u64) -> Result<f64> {
        self.evaluate(&Mask::from_index(index, self.provider.n_elements())?)
    }

    /// Evaluates each distinct index once, in parallel where enabled, and
    /// returns the trace in the order given.
    fn evaluate_all(&self, indices: &[u64]) -> Result<Vec<Evaluation>>
    where
        P: Sync,
    {
        let mut unique = indices.to_vec();
        unique.sort_unstable();
        unique.dedup();
        let scores = crate::par_map(&unique, |&i| self.evaluate_index(i))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(indices
            .iter()
            .map(|i| {
                let k = unique.binary_search(i).expect("index was inserted");
                Evaluation {
                    mask_index: *i,
                    fom: scores[k],
                }
            })
            .collect())
    }
}

/// Figure of merit of one mask: sweep, impulse response, peak-power ratio.
pub fn evaluate_mask<P: ChannelProvider + ?Sized>(provider: &P, mask: &Mask, cfg: &FomConfig) -> Result<f64> {
    Evaluator::new(provider, cfg)?.evaluate(mask)
}

/// Evaluates every available mask in ascending index order.
pub fn exhaustive_search<P: ChannelProvider + ?Sized>(provider: &P, cfg: &FomConfig) -> Result<SearchResult> {
    let space = provider.available();
    if let MaskSpace::Full(n) = space {
        if n > EXHAUSTIVE_LIMIT {
            return Err(Error::GuardRefused {
                n_elements: n,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
    }
    let indices: Vec<u64> = (0..space.len()).map(|k| space.nth(k)).collect();
    let evaluator = Evaluator::new(provider, cfg)?;
    SearchResult::from_trace(evaluator.evaluate_all(&indices)?, provider.n_elements())
}

/// Greedy single-flip ascent.
///
/// Each pass visits elements `0..N` in order, flipping one at a time and
/// keeping the flip only if the figure of merit strictly improves. Stops
/// after a pass without improvement or after `max_sweeps` passes.
pub fn coordinate_descent<P: ChannelProvider + ?Sized>(
    provider: &P,
    start: &Mask,
    max_sweeps: usize,
    cfg: &FomConfig,
) -> Result<SearchResult> {
    let evaluator = Evaluator::new(provider, cfg)?;
    let mut memo = HashMap::new();
    let trace = descend(&evaluator, &mut memo, start, max_sweeps)?;
    SearchResult::from_trace(trace, provider.n_elements())
}

fn descend<P: ChannelProvider + ?Sized>(
    evaluator: &Evaluator<'_, P>,
    memo: &mut HashMap<u64, f64>,
    start: &Mask,
    max_sweeps: usize,
) -> Result<Vec<Evaluation>> {
    if max_sweeps < 1 {
        return Err(Error::domain("coordinate descent needs at least one pass"));
    }
    let mut score = |mask: &Mask| -> Result<Evaluation> {
        let fom = match memo.get(&mask.index()) {
            Some(&v) => v,
            None => {
                let v = evaluator.evaluate(mask)?;
                memo.insert(mask.index(), v);
                v
            }
        };
        Ok(Evaluation {
            mask_index: mask.index(),
            fom,
        })
    };
    let mut current = *start;
    let first = score(&current)?;
    let mut current_fom = first.fom;
    let mut trace = vec![first];
    for _ in 0..max_sweeps {
        let mut improved = false;
        for i in 0..current.len() {
            let candidate = current.flip(i)?;
            let e = score(&candidate)?;
            trace.push(e);
            if e.fom > current_fom {
                current = candidate;
                current_fom = e.fom;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(trace)
}

/// Uniformly drawn starting masks for multi-start search.
pub fn random_masks<P: ChannelProvider + ?Sized>(provider: &P, count: usize, seed: u64) -> Result<Vec<Mask>> {
    let space = provider.available();
    if space.is_empty() {
        return Err(Error::domain("provider has no masks"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Mask::from_index(space.nth(rng.gen_range(0..space.len())), provider.n_elements()))
        .collect()
}

/// Coordinate descent from `starts` seeded random masks; traces are
/// concatenated and share one memo.
pub fn multistart_descent<P: ChannelProvider + ?Sized>(
    provider: &P,
    starts: usize,
    seed: u64,
    max_sweeps: usize,
    cfg: &FomConfig,
) -> Result<SearchResult> {
    if starts < 1 {
        return Err(Error::domain("multi-start search needs at least one start"));
    }
    let evaluator = Evaluator::new(provider, cfg)?;
    let mut memo = HashMap::new();
    let mut trace = Vec::new();
    for start in random_masks(provider, starts, seed)? {
        trace.extend(descend(&evaluator, &mut memo, &start, max_sweeps)?);
    }
    SearchResult::from_trace(trace, provider.n_elements())
}

/// `n` masks drawn uniformly with replacement from a seeded generator.
pub fn random_search<P: ChannelProvider + ?Sized>(
    provider: &P,
    n: usize,
    seed: u64,
    cfg: &FomConfig,
) -> Result<SearchResult> {
    if n < 1 {
        return Err(Error::domain("random search needs at least one draw"));
    }
    let indices: Vec<u64> = random_masks(provider, n, seed)?.iter().map(Mask::index).collect();
    let evaluator = Evaluator::new(provider, cfg)?;
    SearchResult::from_trace(evaluator.evaluate_all(&indices)?, provider.n_elements())
}

/// The all-off and all-on masks, in that order.
pub fn baseline_masks(n: usize) -> Result<[Mask; 2]> {
    if n < 1 {
        return Err(Error::domain("baselines need at least one element"));
    }
    Ok([Mask::all_off(n)?, Mask::all_on(n)?])
}
