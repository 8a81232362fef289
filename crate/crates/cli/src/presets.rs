//! Canned sweeps.
//!
//! | preset | points | algorithms |
//! |---|---|---|
//! | `fig1` | `Ms = Mc = 16`, `N* = Nr = Nv` in {16, 32, 64} | all four |
//! | `fig2` | `Ms = Mc = 64`, `N*` in {64, 128, 256} | F-OMP, F-COMP |
//! | `fig3` | `Ms, Mc` in {8, 16, 32}, `Nr = 2 Ms`, `Nv = 2 Mc` | F-OMP, F-COMP |
//! | `custom` | from the config file | from the config file |
//!
//! Every preset uses `K = 5`, 200 trials, base seed 1 and exact synthesis
//! unless overridden.

use std::fmt;
use std::str::FromStr;

use fcomp_core::{
    Algorithm, Normalization, RadarTemplate, SolverOptions, SweepPoint, SweepSpec, SynthesisModel,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "custom" => Ok(Preset::Custom),
            _ => Err(CliError::invalid(format!(
                "unknown preset '{s}' (expected fig1, fig2, fig3 or custom)"
            ))),
        }
    }
}

/// Square grids `N* x N*` at `Ms = Mc = m`.
pub fn square_points(m: usize, nstars: &[usize]) -> Vec<SweepPoint> {
    nstars
        .iter()
        .map(|&n| SweepPoint { ms: m, mc: m, nr: n, nv: n })
        .collect()
}

/// `values x values` sample counts with twice-oversampled grids.
pub fn ratio_points(values: &[usize]) -> Vec<SweepPoint> {
    values
        .iter()
        .flat_map(|&ms| {
            values
                .iter()
                .map(move |&mc| SweepPoint { ms, mc, nr: 2 * ms, nv: 2 * mc })
        })
        .collect()
}

fn base_spec(points: Vec<SweepPoint>, algorithms: Vec<Algorithm>) -> SweepSpec {
    SweepSpec {
        radar: RadarTemplate::default(),
        points,
        algorithms,
        k: DEFAULT_K,
        trials: DEFAULT_TRIALS,
        base_seed: DEFAULT_SEED,
        synthesis: SynthesisModel::Exact,
        noise_sigma: 0.0,
        normalization: Normalization::GridStep,
        options: SolverOptions::new(DEFAULT_K),
        parallel: true,
    }
}

const FACTORIZED: [Algorithm; 2] = [Algorithm::FOmp, Algorithm::FComp];

/// Resolves a preset into a validated sweep. `trials` and `seed` take
/// precedence over the config, which takes precedence over the defaults.
pub fn build_spec(
    preset: Preset,
    config: Option<&ExperimentConfig>,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Result<SweepSpec> {
    let mut spec = match (preset, config) {
        (Preset::Fig1, None) => base_spec(square_points(16, &[16, 32, 64]), Algorithm::ALL.to_vec()),
        (Preset::Fig2, None) => base_spec(square_points(64, &[64, 128, 256]), FACTORIZED.to_vec()),
        (Preset::Fig3, None) => base_spec(ratio_points(&[8, 16, 32]), FACTORIZED.to_vec()),
        (Preset::Custom, Some(c)) => custom_spec(c)?,
        (Preset::Custom, None) => {
            return Err(CliError::invalid("the custom preset needs --config"));
        }
        (p, Some(_)) => {
            return Err(CliError::invalid(format!(
                "preset {p} is fixed; use --preset custom to run a config file"
            )));
        }
    };
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(s) = seed {
        spec.base_seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

fn custom_spec(c: &ExperimentConfig) -> Result<SweepSpec> {
    let k = c.k.unwrap_or(DEFAULT_K);
    let algorithms = c.algorithm_list()?.unwrap_or_else(|| Algorithm::ALL.to_vec());
    Ok(SweepSpec {
        radar: c.radar_template()?,
        points: c.sweep_points()?,
        algorithms,
        k,
        trials: c.trials.unwrap_or(DEFAULT_TRIALS),
        base_seed: c.seed.unwrap_or(DEFAULT_SEED),
        synthesis: c.synthesis(),
        noise_sigma: c.noise_sigma()?,
        normalization: c.normalization(),
        options: c.solver_options(k)?,
        parallel: true,
    })
}
