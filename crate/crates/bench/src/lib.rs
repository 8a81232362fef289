//! Fixtures shared by the criterion benches.

use fcomp_core::{
    build_grid, synthesize, Measurement, Normalization, RadarConfig, SceneDistribution,
    SynthesisModel, TaylorDictionary,
};

/// A `K`-target exact-model measurement together with an `N* x N*` dictionary
/// at `Ms = Mc = m`.
pub struct Fixture {
    pub cfg: RadarConfig,
    pub dict: TaylorDictionary,
    pub y: Measurement,
}

impl Fixture {
    pub fn new(m: usize, nstar: usize, k: usize, with_exact: bool) -> Self {
        let cfg = RadarConfig::k_band(m, m);
        let grid = build_grid(&cfg, nstar, nstar, Normalization::GridStep).expect("valid grid");
        let dict = if with_exact {
            TaylorDictionary::with_exact(&cfg, &grid)
        } else {
            TaylorDictionary::factorized(&cfg, &grid)
        }
        .expect("dictionary");
        let scene = SceneDistribution { k, seed: 7 }.sample(&cfg);
        let y = synthesize(&cfg, &scene, SynthesisModel::Exact, 0.0, 0).expect("synthesis");
        Self { cfg, dict, y }
    }
}
