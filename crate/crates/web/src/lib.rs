//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Errors cross the boundary as plain strings, which JavaScript receives as
//! thrown values.

use chassis_ris::dsp::{
    cir_from_sweep, delay_spread, fom_with_peak, mask_std, select_band, FomConfig, DEFAULT_BAND_FRACTION,
};
use chassis_ris::optim::multistart_descent;
use chassis_ris::physics::{build_scene, ChannelModel, SceneConfig};
use chassis_ris::{FrequencyGrid, Mask, MaskSweepDataset, Origin};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

type JsResult<T> = Result<T, String>;

fn js<T>(r: chassis_ris::Result<T>) -> JsResult<T> {
    r.map_err(|e| e.to_string())
}

fn db(power: f64) -> f64 {
    10.0 * power.max(1e-30).log10()
}

/// One simulated chassis on a fixed grid.
#[wasm_bindgen]
pub struct Demo {
    model: ChannelModel,
    cfg: FomConfig,
}

#[wasm_bindgen]
impl Demo {
    /// Default cavity with `ris_elements` elements; `seed` places the
    /// antennas at random when nonzero, otherwise the fixed positions are used.
    #[wasm_bindgen(constructor)]
    pub fn new(ris_elements: usize, seed: u32, points: usize) -> JsResult<Demo> {
        let mut config = SceneConfig {
            ris_elements,
            seed: seed as u64,
            ..SceneConfig::default()
        };
        if seed != 0 {
            config.tx = None;
            config.rx = None;
        }
        let grid = js(FrequencyGrid::new(5.7e9, 6.1e9, points))?;
        let model = js(build_scene(&config).and_then(|scene| ChannelModel::new(scene, grid)))?;
        Ok(Demo {
            model,
            cfg: FomConfig::default(),
        })
    }

    pub fn elements(&self) -> usize {
        self.model.n_elements()
    }

    pub fn frequencies_ghz(&self) -> Vec<f64> {
        self.model.grid().frequencies().iter().map(|f| f * 1e-9).collect()
    }

    /// Spectrum, impulse response and figure of merit of one mask.
    pub fn analyze(&self, mask_index: u32) -> JsResult<Analysis> {
        let mask = js(Mask::from_index(mask_index as u64, self.elements()))?;
        let sweep = js(self.model.sweep(&mask))?;
        let cir = js(cir_from_sweep(&sweep, &self.cfg))?;
        let (fom, peak) = js(fom_with_peak(&cir, &self.cfg))?;
        let shown = ((self.cfg.cutoff() / cir.t_step()).floor() as usize + 1).min(cir.samples().len());
        Ok(Analysis {
            fom,
            delay_spread_ns: js(delay_spread(&cir, &self.cfg))? * 1e9,
            peak_ns: peak.t_o * 1e9,
            t_step_ns: cir.t_step() * 1e9,
            spectrum_db: sweep.samples().iter().map(|h| db(h.norm_sqr())).collect(),
            cir_db: cir.samples()[..shown].iter().map(|c| db(c.norm_sqr())).collect(),
        })
    }

    /// Multi-start coordinate descent; returns the best mask index.
    pub fn optimize(&self, starts: usize, seed: u32) -> JsResult<u32> {
        let res = js(multistart_descent(&self.model, starts, seed as u64, 20, &self.cfg))?;
        Ok(res.best_mask.index() as u32)
    }

    /// Spread of |H| over `masks` random masks and the band it selects.
    pub fn survey(&self, masks: usize, seed: u32) -> JsResult<Survey> {
        let n = self.elements();
        let total = 1usize << n;
        if masks < 2 || masks > total {
            return Err(format!("choose between 2 and {total} masks"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        let chosen: Vec<Mask> = js(index::sample(&mut rng, total, masks)
            .into_iter()
            .map(|i| Mask::from_index(i as u64, n))
            .collect())?;
        let sweeps = js(chosen.iter().map(|m| self.model.sweep(m)).collect())?;
        let ds = js(MaskSweepDataset::new(chosen, sweeps, Origin::Simulated))?;
        let std = mask_std(&ds);
        let band = js(select_band(&std, self.model.grid(), DEFAULT_BAND_FRACTION))?;
        Ok(Survey {
            std,
            band_start_ghz: band.grid.f_start() * 1e-9,
            band_stop_ghz: band.grid.f_stop() * 1e-9,
        })
    }
}

#[wasm_bindgen]
pub struct Analysis {
    fom: f64,
    delay_spread_ns: f64,
    peak_ns: f64,
    t_step_ns: f64,
    spectrum_db: Vec<f64>,
    cir_db: Vec<f64>,
}

#[wasm_bindgen]
impl Analysis {
    #[wasm_bindgen(getter)]
    pub fn fom(&self) -> f64 {
        self.fom
    }

    #[wasm_bindgen(getter)]
    pub fn delay_spread_ns(&self) -> f64 {
        self.delay_spread_ns
    }

    #[wasm_bindgen(getter)]
    pub fn peak_ns(&self) -> f64 {
        self.peak_ns
    }

    #[wasm_bindgen(getter)]
    pub fn t_step_ns(&self) -> f64 {
        self.t_step_ns
    }

    /// |H|^2 in dB per grid point.
    #[wasm_bindgen(getter)]
    pub fn spectrum_db(&self) -> Vec<f64> {
        self.spectrum_db.clone()
    }

    /// |h|^2 in dB from t = 0 to the cutoff.
    #[wasm_bindgen(getter)]
    pub fn cir_db(&self) -> Vec<f64> {
        self.cir_db.clone()
    }
}

#[wasm_bindgen]
pub struct Survey {
    std: Vec<f64>,
    band_start_ghz: f64,
    band_stop_ghz: f64,
}

#[wasm_bindgen]
impl Survey {
    #[wasm_bindgen(getter)]
    pub fn std(&self) -> Vec<f64> {
        self.std.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn band_start_ghz(&self) -> f64 {
        self.band_start_ghz
    }

    #[wasm_bindgen(getter)]
    pub fn band_stop_ghz(&self) -> f64 {
        self.band_stop_ghz
    }
}
