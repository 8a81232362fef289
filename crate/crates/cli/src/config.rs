//! Flat TOML experiment configuration.
//!
//! ```toml
//! ms = 16
//! mc = 16
//! nr = 32
//! nv = 32
//! k = 2
//! algorithm = "F-COMP"
//! targets = [[4.1, 12.5, 1.0, 0.0], [7.9, -3.0, 0.0, 0.5]]
//! ```
//!
//! Radar parameters default to the K-band setup (`f0` 24 GHz, `B` 200 MHz,
//! `Ts` 5 us, `Tc = Ms Ts + chirp_gap`). Unknown keys are rejected.

use std::fs;
use std::path::Path;

use fcomp_core::{
    Algorithm, IndexSelection, Normalization, RadarConfig, RadarTemplate, Scene, SolverOptions,
    SweepPoint, SynthesisModel, Target,
};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub f0: Option<f64>,
    pub bandwidth: Option<f64>,
    pub ts: Option<f64>,
    /// Chirp period; mutually exclusive with `chirp_gap`.
    pub tc: Option<f64>,
    pub chirp_gap: Option<f64>,
    pub ms: Option<usize>,
    pub mc: Option<usize>,
    pub nr: Option<usize>,
    pub nv: Option<usize>,
    pub normalization: Option<Normalization>,
    pub algorithm: Option<String>,
    pub algorithms: Option<Vec<String>>,
    /// Square grid sizes swept by the custom bench preset.
    pub nstar: Option<Vec<usize>>,
    pub ms_values: Option<Vec<usize>>,
    pub mc_values: Option<Vec<usize>>,
    /// `Nr = grid_factor Ms`, `Nv = grid_factor Mc` for `ms_values x mc_values` sweeps.
    pub grid_factor: Option<usize>,
    pub k: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub synthesis: Option<SynthesisModel>,
    pub noise_sigma: Option<f64>,
    pub index_selection: Option<IndexSelection>,
    pub correction_max_iters: Option<usize>,
    pub correction_tolerance: Option<f64>,
    pub clamp_deviations: Option<bool>,
    /// `[r, v, re(alpha), im(alpha)]` per target.
    pub targets: Option<Vec<[f64; 4]>>,
}

fn required<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| CliError::invalid(format!("missing config key '{key}'")))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::invalid(format!("config: {e}")))
    }

    pub fn radar_template(&self) -> Result<RadarTemplate> {
        if self.tc.is_some() && self.chirp_gap.is_some() {
            return Err(CliError::invalid("set either 'tc' or 'chirp_gap', not both"));
        }
        let base = RadarTemplate::default();
        Ok(RadarTemplate {
            f0: self.f0.unwrap_or(base.f0),
            bandwidth: self.bandwidth.unwrap_or(base.bandwidth),
            ts: self.ts.unwrap_or(base.ts),
            chirp_gap: self.chirp_gap.unwrap_or(base.chirp_gap),
        })
    }

    /// Radar setup of a single-point experiment.
    pub fn radar(&self) -> Result<RadarConfig> {
        let ms = required(self.ms, "ms")?;
        let mc = required(self.mc, "mc")?;
        let t = self.radar_template()?;
        let tc = self.tc.unwrap_or(ms as f64 * t.ts + t.chirp_gap);
        Ok(RadarConfig::new(t.f0, t.bandwidth, t.ts, tc, ms, mc)?)
    }

    /// `(Nr, Nv)`, defaulting to twice the sample counts.
    pub fn grid_size(&self, cfg: &RadarConfig) -> (usize, usize) {
        (self.nr.unwrap_or(2 * cfg.ms), self.nv.unwrap_or(2 * cfg.mc))
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization.unwrap_or_default()
    }

    pub fn synthesis(&self) -> SynthesisModel {
        self.synthesis.unwrap_or(SynthesisModel::Exact)
    }

    pub fn noise_sigma(&self) -> Result<f64> {
        let s = self.noise_sigma.unwrap_or(0.0);
        if !(s.is_finite() && s >= 0.0) {
            return Err(CliError::invalid("noise_sigma must be finite and >= 0"));
        }
        Ok(s)
    }

    pub fn scene(&self) -> Result<Scene> {
        let targets = self
            .targets
            .as_ref()
            .ok_or_else(|| CliError::invalid("missing config key 'targets'"))?;
        Ok(Scene::new(
            targets
                .iter()
                .map(|&[r, v, re, im]| Target::new(r, v, Complex64::new(re, im)))
                .collect(),
        ))
    }

    /// Solver options for `k` targets, with config overrides applied.
    pub fn solver_options(&self, k: usize) -> Result<SolverOptions> {
        let base = SolverOptions::new(k);
        let opts = SolverOptions {
            index_selection: self.index_selection.unwrap_or(base.index_selection),
            correction_max_iters: self.correction_max_iters.unwrap_or(base.correction_max_iters),
            correction_tolerance: self.correction_tolerance.unwrap_or(base.correction_tolerance),
            clamp_deviations: self.clamp_deviations.unwrap_or(base.clamp_deviations),
            ..base
        };
        opts.validate()?;
        Ok(opts)
    }

    /// `algorithms`, else `[algorithm]`, else `None`.
    pub fn algorithm_list(&self) -> Result<Option<Vec<Algorithm>>> {
        let names: Vec<&String> = match (&self.algorithms, &self.algorithm) {
            (Some(list), _) => list.iter().collect(),
            (None, Some(one)) => vec![one],
            (None, None) => return Ok(None),
        };
        let algs = names
            .into_iter()
            .map(|n| n.parse::<Algorithm>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if algs.is_empty() {
            return Err(CliError::invalid("algorithm list is empty"));
        }
        Ok(Some(algs))
    }

    /// Sweep points of the custom bench preset.
    ///
    /// `nstar` sweeps square grids at fixed `(ms, mc)`; `ms_values` and
    /// `mc_values` sweep the sample counts with `grid_factor`-times
    /// oversampled grids; otherwise the single point `(ms, mc, nr, nv)`.
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>> {
        if let Some(ns) = &self.nstar {
            let (ms, mc) = (required(self.ms, "ms")?, required(self.mc, "mc")?);
            return Ok(ns.iter().map(|&n| SweepPoint { ms, mc, nr: n, nv: n }).collect());
        }
        if self.ms_values.is_some() || self.mc_values.is_some() {
            let msv = self.ms_values.clone().map_or_else(|| required(self.ms, "ms").map(|m| vec![m]), Ok)?;
            let mcv = self.mc_values.clone().map_or_else(|| required(self.mc, "mc").map(|m| vec![m]), Ok)?;
            let f = self.grid_factor.unwrap_or(2);
            if f == 0 {
                return Err(CliError::invalid("grid_factor must be >= 1"));
            }
            let mut points = Vec::with_capacity(msv.len() * mcv.len());
            for &ms in &msv {
                for &mc in &mcv {
                    points.push(SweepPoint { ms, mc, nr: f * ms, nv: f * mc });
                }
            }
            return Ok(points);
        }
        let (ms, mc) = (required(self.ms, "ms")?, required(self.mc, "mc")?);
        Ok(vec![SweepPoint {
            ms,
            mc,
            nr: self.nr.unwrap_or(2 * ms),
            nv: self.nv.unwrap_or(2 * mc),
        }])
    }
}
