//! Random scenes, single trials and parameter sweeps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::TaylorDictionary;
use crate::error::{Error, Result};
use crate::evaluation::metrics::TrialMetrics;
use crate::grid::{build_grid, Normalization};
use crate::signal::{synthesize, RadarConfig, Scene, SynthesisModel, Target};
use crate::solvers::{solve, Algorithm, SolverOptions};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed from `(base_seed, point, trial)`.
pub fn derive_seed(base_seed: u64, point: u64, trial: u64) -> u64 {
    mix(mix(mix(base_seed) ^ point) ^ trial)
}

/// `K` independent targets with `alpha ~ CN(0, 1)`, `r ~ U(R)`, `v ~ U(V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SceneDistribution {
    pub k: usize,
    pub seed: u64,
}

impl SceneDistribution {
    pub fn sample(&self, cfg: &RadarConfig) -> Scene {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let rmax = cfg.max_range();
        let vmax = cfg.max_speed();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let targets = (0..self.k)
            .map(|_| {
                // u in [0, 1) maps onto the half-open domains (0, rmax] and (-vmax, vmax]
                let r = rmax * (1.0 - rng.random::<f64>());
                let v = vmax - 2.0 * vmax * rng.random::<f64>();
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Target::new(r, v, Complex64::new(s * re, s * im))
            })
            .collect();
        Scene::new(targets)
    }
}

/// Everything a trial needs besides its seed. The dictionary is built once
/// and shared by all trials of a sweep point.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub cfg: RadarConfig,
    pub dict: TaylorDictionary,
    pub k: usize,
    pub synthesis: SynthesisModel,
    pub noise_sigma: f64,
    pub options: SolverOptions,
}

impl TrialSetup {
    pub fn new(
        cfg: RadarConfig,
        dict: TaylorDictionary,
        k: usize,
        synthesis: SynthesisModel,
        options: SolverOptions,
    ) -> Self {
        Self {
            cfg,
            dict,
            k,
            synthesis,
            noise_sigma: 0.0,
            options: SolverOptions { k, ..options },
        }
    }

    pub fn scene(&self, trial_seed: u64) -> Scene {
        SceneDistribution {
            k: self.k,
            seed: mix(trial_seed),
        }
        .sample(&self.cfg)
    }
}

fn evaluate(
    setup: &TrialSetup,
    scene: &Scene,
    y: &crate::signal::Measurement,
    algorithm: Algorithm,
) -> Result<TrialMetrics> {
    let report = solve(y, &setup.dict, &setup.options, algorithm)?;
    let truths: Vec<(f64, f64)> = scene.targets.iter().map(|t| (t.r, t.v)).collect();
    let est: Vec<(f64, f64)> = report.estimates.iter().map(|e| (e.r_hat, e.v_hat)).collect();
    TrialMetrics::from_estimates(&setup.cfg, &truths, &est, report.wall_time)
}

/// Samples a scene from `trial_seed`, synthesizes it and scores every
/// algorithm on the same measurement.
pub fn run_trial_all(
    setup: &TrialSetup,
    algorithms: &[Algorithm],
    trial_seed: u64,
) -> Result<Vec<TrialMetrics>> {
    let scene = setup.scene(trial_seed);
    let y = synthesize(
        &setup.cfg,
        &scene,
        setup.synthesis,
        setup.noise_sigma,
        mix(trial_seed ^ 0x5EED),
    )?;
    algorithms
        .iter()
        .map(|&a| evaluate(setup, &scene, &y, a))
        .collect()
}

pub fn run_trial(setup: &TrialSetup, algorithm: Algorithm, trial_seed: u64) -> Result<TrialMetrics> {
    Ok(run_trial_all(setup, &[algorithm], trial_seed)?.remove(0))
}

/// Radar parameters shared by every sweep point; `Tc = Ms Ts + chirp_gap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarTemplate {
    pub f0: f64,
    pub bandwidth: f64,
    pub ts: f64,
    pub chirp_gap: f64,
}

impl Default for RadarTemplate {
    fn default() -> Self {
        let k = RadarConfig::k_band(1, 1);
        Self {
            f0: k.f0,
            bandwidth: k.bandwidth,
            ts: k.ts,
            chirp_gap: 0.0,
        }
    }
}

impl RadarTemplate {
    pub fn config(&self, ms: usize, mc: usize) -> Result<RadarConfig> {
        RadarConfig::new(
            self.f0,
            self.bandwidth,
            self.ts,
            ms as f64 * self.ts + self.chirp_gap,
            ms,
            mc,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SweepPoint {
    pub ms: usize,
    pub mc: usize,
    pub nr: usize,
    pub nv: usize,
}

impl SweepPoint {
    /// `N*` when the grid is square.
    pub fn nstar(&self) -> Option<usize> {
        (self.nr == self.nv).then_some(self.nr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub radar: RadarTemplate,
    pub points: Vec<SweepPoint>,
    pub algorithms: Vec<Algorithm>,
    pub k: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub synthesis: SynthesisModel,
    pub noise_sigma: f64,
    pub normalization: Normalization,
    pub options: SolverOptions,
    /// Run trials of a point on the rayon pool.
    pub parallel: bool,
}

impl SweepSpec {
    /// Checks every precondition up front so no work starts on a bad spec.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidOptions("trials must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidOptions("k must be >= 1".into()));
        }
        if self.points.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidOptions("sweep needs at least one point and one algorithm".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidOptions("noise_sigma must be finite and >= 0".into()));
        }
        SolverOptions { k: self.k, ..self.options }.validate()?;
        let max_i = self.algorithms.iter().map(|a| a.interpolant_count()).max().unwrap_or(1);
        for p in &self.points {
            let cfg = self.radar.config(p.ms, p.mc)?;
            let grid = build_grid(&cfg, p.nr, p.nv, self.normalization)?;
            if self.k * max_i > cfg.m() || self.k > grid.len() {
                return Err(Error::InvalidOptions(format!(
                    "k = {} too large for Ms={} Mc={} Nr={} Nv={}",
                    self.k, p.ms, p.mc, p.nr, p.nv
                )));
            }
        }
        Ok(())
    }
}

/// Aggregated metrics of one `(algorithm, sweep point)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateEntry {
    pub algorithm: Algorithm,
    pub point_index: usize,
    pub point: SweepPoint,
    pub trials: usize,
    pub mean_mr: f64,
    pub se_mr: f64,
    /// Mean of per-trial AHE over trials with at least one hit.
    pub mean_ahe: Option<f64>,
    pub se_ahe: Option<f64>,
    pub ahe_trials: usize,
    pub mean_time: f64,
    pub se_time: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateResult {
    pub entries: Vec<AggregateEntry>,
}

impl AggregateResult {
    pub fn get(&self, algorithm: Algorithm, point_index: usize) -> Option<&AggregateEntry> {
        self.entries
            .iter()
            .find(|e| e.algorithm == algorithm && e.point_index == point_index)
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates per-trial metrics (in trial order) of one algorithm.
pub fn aggregate(
    algorithm: Algorithm,
    point_index: usize,
    point: SweepPoint,
    trials: &[TrialMetrics],
) -> AggregateEntry {
    let mr: Vec<f64> = trials.iter().map(|t| t.miss_rate).collect();
    let ahe: Vec<f64> = trials.iter().filter_map(|t| t.avg_hit_error).collect();
    let time: Vec<f64> = trials.iter().map(|t| t.solve_time).collect();
    let (mean_mr, se_mr) = mean_and_se(&mr);
    let (mean_time, se_time) = mean_and_se(&time);
    let (mean_ahe, se_ahe) = if ahe.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_and_se(&ahe);
        (Some(m), Some(s))
    };
    AggregateEntry {
        algorithm,
        point_index,
        point,
        trials: trials.len(),
        mean_mr,
        se_mr,
        mean_ahe,
        se_ahe,
        ahe_trials: ahe.len(),
        mean_time,
        se_time,
    }
}

/// Builds the setup of one sweep point.
pub fn point_setup(spec: &SweepSpec, point: &SweepPoint) -> Result<TrialSetup> {
    let cfg = spec.radar.config(point.ms, point.mc)?;
    let grid = build_grid(&cfg, point.nr, point.nv, spec.normalization)?;
    let dict = if spec.algorithms.iter().any(|a| !a.is_factorized()) {
        TaylorDictionary::with_exact(&cfg, &grid)?
    } else {
        TaylorDictionary::factorized(&cfg, &grid)?
    };
    let mut setup = TrialSetup::new(cfg, dict, spec.k, spec.synthesis, spec.options);
    setup.noise_sigma = spec.noise_sigma;
    Ok(setup)
}

/// Runs every algorithm on `trials` random scenes at each sweep point.
///
/// All algorithms see the same scenes. Trials may run in parallel; results are
/// gathered in trial order, so every non-timing value is reproducible.
pub fn run_sweep(spec: &SweepSpec) -> Result<AggregateResult> {
    spec.validate()?;
    let mut entries = Vec::new();
    for (pi, point) in spec.points.iter().enumerate() {
        let setup = point_setup(spec, point)?;
        let run = |t: usize| {
            run_trial_all(&setup, &spec.algorithms, derive_seed(spec.base_seed, pi as u64, t as u64))
        };
        let per_trial: Vec<Vec<TrialMetrics>> = if spec.parallel {
            (0..spec.trials).into_par_iter().map(run).collect::<Result<_>>()?
        } else {
            (0..spec.trials).map(run).collect::<Result<_>>()?
        };
        for (ai, &alg) in spec.algorithms.iter().enumerate() {
            let metrics: Vec<TrialMetrics> = per_trial.iter().map(|t| t[ai].clone()).collect();
            entries.push(aggregate(alg, pi, *point, &metrics));
        }
    }
    Ok(AggregateResult { entries })
}
