use chassis_ris::dsp::FomConfig;
use chassis_ris::optim::{
    baseline_masks, coordinate_descent, evaluate_mask, exhaustive_search, multistart_descent, random_search,
    ChannelProvider, DatasetProvider, MaskSpace,
};
use chassis_ris::physics::{build_scene, ChannelModel, SceneConfig};
use chassis_ris::{ChannelSweep, Complex64, Error, FrequencyGrid, Mask, MaskSweepDataset, Origin};

fn scene_model(n: usize, seed: u64) -> ChannelModel {
    let config = SceneConfig {
        ris_elements: n,
        seed,
        tx: None,
        rx: None,
        ..SceneConfig::default()
    };
    ChannelModel::new(build_scene(&config).unwrap(), FrequencyGrid::default_band()).unwrap()
}

#[test]
fn exhaustive_dominates_other_strategies() {
    let cfg = FomConfig::default();
    for seed in 0..3 {
        let model = scene_model(6, seed);
        let all = exhaustive_search(&model, &cfg).unwrap();
        assert_eq!(all.evaluations, 64);
        let idx: Vec<u64> = all.trace.iter().map(|e| e.mask_index).collect();
        assert_eq!(idx, (0..64).collect::<Vec<_>>());
        let max = all.trace.iter().map(|e| e.fom).fold(f64::MIN, f64::max);
        assert_eq!(all.best_fom, max);

        let cd = multistart_descent(&model, 4, seed, 10, &cfg).unwrap();
        let rs = random_search(&model, 20, seed, &cfg).unwrap();
        assert!(all.best_fom >= cd.best_fom && all.best_fom >= rs.best_fom);
        for m in baseline_masks(6).unwrap() {
            assert!(all.best_fom >= evaluate_mask(&model, &m, &cfg).unwrap());
        }
    }
}

#[test]
fn descent_ends_at_a_one_flip_local_maximum() {
    let cfg = FomConfig::default();
    let model = scene_model(8, 21);
    for start in [0u64, 0x5a, 0xff] {
        let start = Mask::from_index(start, 8).unwrap();
        let res = coordinate_descent(&model, &start, 50, &cfg).unwrap();
        assert_eq!(res.trace.len(), res.evaluations);
        let start_fom = evaluate_mask(&model, &start, &cfg).unwrap();
        assert!(res.best_fom >= start_fom);
        for i in 0..8 {
            let neighbour = res.best_mask.flip(i).unwrap();
            assert!(evaluate_mask(&model, &neighbour, &cfg).unwrap() <= res.best_fom);
        }
    }
}

#[test]
fn random_search_finds_the_optimum_of_a_small_scene() {
    let cfg = FomConfig::default();
    let model = scene_model(4, 8);
    let all = exhaustive_search(&model, &cfg).unwrap();
    let rs = random_search(&model, 65_536, 1, &cfg).unwrap();
    assert_eq!(rs.evaluations, 65_536);
    assert!(rs.trace.iter().any(|e| e.mask_index == all.best_mask.index()));
    assert_eq!(rs.best_mask, all.best_mask);
    assert_eq!(rs.best_fom, all.best_fom);
}

#[test]
fn multistart_reaches_near_global_optimum() {
    let cfg = FomConfig::default();
    let scenes = 20;
    let mut close = 0;
    for seed in 0..scenes {
        let model = scene_model(8, 1000 + seed);
        let best = exhaustive_search(&model, &cfg).unwrap().best_fom;
        let ms = multistart_descent(&model, 8, seed, 20, &cfg).unwrap();
        close += usize::from(ms.best_fom >= 0.9 * best);
    }
    assert!(close * 10 >= scenes as usize * 9, "{close}/{scenes}");
}

#[test]
fn searches_are_reproducible() {
    let cfg = FomConfig::default();
    let model = scene_model(8, 4);
    assert_eq!(
        multistart_descent(&model, 3, 9, 10, &cfg).unwrap(),
        multistart_descent(&model, 3, 9, 10, &cfg).unwrap()
    );
    assert_eq!(
        random_search(&model, 30, 2, &cfg).unwrap(),
        random_search(&model, 30, 2, &cfg).unwrap()
    );
    let m = Mask::from_index(77, 8).unwrap();
    assert_eq!(
        evaluate_mask(&model, &m, &cfg).unwrap(),
        evaluate_mask(&model, &m, &cfg).unwrap()
    );
}

fn recorded_dataset(n_masks: u64) -> MaskSweepDataset {
    let grid = FrequencyGrid::new(5.7e9, 6.1e9, 16).unwrap();
    let masks: Vec<Mask> = (0..n_masks).map(|i| Mask::from_index(i, 16).unwrap()).collect();
    let sweeps = masks
        .iter()
        .map(|m| {
            let k = m.index() as f64;
            let samples = (0..16)
                .map(|j| Complex64::from_polar(1.0 + 0.01 * ((k + j as f64) % 7.0), 0.3 * k * j as f64))
                .collect();
            ChannelSweep::new(grid, samples).unwrap()
        })
        .collect();
    MaskSweepDataset::new(masks, sweeps, Origin::Measured).unwrap()
}

#[test]
fn recorded_campaign_is_searched_over_its_masks_only() {
    let provider = DatasetProvider::new(recorded_dataset(1500));
    assert_eq!(provider.available().len(), 1500);
    let res = exhaustive_search(&provider, &FomConfig::default()).unwrap();
    assert_eq!(res.trace.len(), 1500);
    let unrecorded = Mask::from_index(4000, 16).unwrap();
    assert!(matches!(
        evaluate_mask(&provider, &unrecorded, &FomConfig::default()),
        Err(Error::MaskUnavailable(4000))
    ));
    assert!(matches!(provider.available(), MaskSpace::Recorded(_)));
}

#[test]
fn oversized_scenes_are_refused() {
    let config = SceneConfig {
        ris_elements: 25,
        ris_spacing: 0.015,
        ..SceneConfig::default()
    };
    let grid = FrequencyGrid::new(5.9e9, 6.0e9, 3).unwrap();
    let model = ChannelModel::new(build_scene(&config).unwrap(), grid).unwrap();
    let err = exhaustive_search(&model, &FomConfig::default()).unwrap_err();
    assert!(matches!(
        err,
        Error::GuardRefused {
            n_elements: 25,
            limit: 24
        }
    ));
}
