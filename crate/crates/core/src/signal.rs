//! Sampled FMCW radar signal model.
//!
//! A target at range `r` and radial speed `v` produces the atom
//! `a[mc*Ms + ms] = psi_ms(r + gamma*v) * phi_mc(v) * theta_{ms,mc}(r, v)`,
//! where `psi` and `phi` are the range and Doppler sub-atoms and `theta` is
//! the range-migration / quadratic-phase distortion. Dropping `theta` gives
//! the rank-1 factorized atom `A(r, v) = psi(r + gamma*v) phi(v)^T`.

use nalgebra::{DMatrix, DMatrixView};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Chirp and sampling parameters of a mono-static FMCW radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Lowest carrier frequency (Hz).
    pub f0: f64,
    /// Sweep bandwidth (Hz).
    pub bandwidth: f64,
    /// Sample period (s).
    pub ts: f64,
    /// Chirp period (s); may exceed `ms * ts` when gaps separate chirps.
    pub tc: f64,
    /// Samples per chirp.
    pub ms: usize,
    /// Number of chirps.
    pub mc: usize,
}

impl RadarConfig {
    pub fn new(f0: f64, bandwidth: f64, ts: f64, tc: f64, ms: usize, mc: usize) -> Result<Self> {
        let cfg = Self {
            f0,
            bandwidth,
            ts,
            tc,
            ms,
            mc,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// K-band system used throughout the benchmarks: `B = 200 MHz`,
    /// `f0 = 24 GHz`, `Ts = 5 us` and back-to-back chirps (`Tc = Ms * Ts`).
    pub fn k_band(ms: usize, mc: usize) -> Self {
        let ts = 5e-6;
        Self {
            f0: 24e9,
            bandwidth: 200e6,
            ts,
            tc: ms as f64 * ts,
            ms,
            mc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be finite and > 0, got {x}")))
            }
        };
        positive("f0", self.f0)?;
        positive("bandwidth", self.bandwidth)?;
        positive("ts", self.ts)?;
        positive("tc", self.tc)?;
        if self.ms == 0 || self.mc == 0 {
            return Err(Error::InvalidConfig(format!(
                "ms and mc must be >= 1, got ms={} mc={}",
                self.ms, self.mc
            )));
        }
        let chirp_span = self.ms as f64 * self.ts;
        if self.tc < chirp_span * (1.0 - 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "tc ({}) must be at least ms*ts ({chirp_span})",
                self.tc
            )));
        }
        Ok(())
    }

    /// Total number of samples `M = Ms * Mc`.
    pub fn m(&self) -> usize {
        self.ms * self.mc
    }

    /// Range/speed coupling `gamma = f0 * Ms * Ts / B` (seconds).
    pub fn gamma(&self) -> f64 {
        self.f0 * self.ms as f64 * self.ts / self.bandwidth
    }

    /// Range resolution `c / (2B)` (m).
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth)
    }

    /// Speed resolution `c / (4 f0 Mc Tc)` (m/s).
    pub fn speed_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (4.0 * self.f0 * self.mc as f64 * self.tc)
    }

    /// Upper end of the range domain `(0, Ms c / (2B)]`. This is also the
    /// period of the range sub-atom in `r'`.
    pub fn max_range(&self) -> f64 {
        self.ms as f64 * SPEED_OF_LIGHT / (2.0 * self.bandwidth)
    }

    /// Upper end of the speed domain `(-c/(4 f0 Tc), c/(4 f0 Tc)]`.
    pub fn max_speed(&self) -> f64 {
        SPEED_OF_LIGHT / (4.0 * self.f0 * self.tc)
    }

    pub fn range_in_domain(&self, r: f64) -> bool {
        r > 0.0 && r <= self.max_range()
    }

    pub fn speed_in_domain(&self, v: f64) -> bool {
        let vmax = self.max_speed();
        v > -vmax && v <= vmax
    }

    /// Maps a range onto the domain `(0, max_range]` modulo its period.
    pub fn wrap_range(&self, r: f64) -> f64 {
        let period = self.max_range();
        let w = r.rem_euclid(period);
        if w == 0.0 {
            period
        } else {
            w
        }
    }

    /// Phase slope of the range sub-atom per sample and per meter.
    fn range_rate(&self) -> f64 {
        2.0 * PI * (self.bandwidth / self.ms as f64) * 2.0 / SPEED_OF_LIGHT
    }

    /// Phase slope of the Doppler sub-atom per chirp and per m/s.
    fn speed_rate(&self) -> f64 {
        2.0 * PI * self.f0 * self.tc * 2.0 / SPEED_OF_LIGHT
    }
}

/// A point target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub r: f64,
    pub v: f64,
    pub alpha: Complex64,
}

impl Target {
    pub fn new(r: f64, v: f64, alpha: Complex64) -> Self {
        Self { r, v, alpha }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub targets: Vec<Target>,
}

impl Scene {
    pub fn new(targets: Vec<Target>) -> Self {
        Self { targets }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Rejects the first target lying outside the parameter domain of `cfg`.
    pub fn validate(&self, cfg: &RadarConfig) -> Result<()> {
        for (index, t) in self.targets.iter().enumerate() {
            if !cfg.range_in_domain(t.r) {
                return Err(Error::TargetOutOfDomain {
                    index,
                    reason: format!("range {} not in (0, {}]", t.r, cfg.max_range()),
                });
            }
            if !cfg.speed_in_domain(t.v) {
                let vmax = cfg.max_speed();
                return Err(Error::TargetOutOfDomain {
                    index,
                    reason: format!("speed {} not in (-{vmax}, {vmax}]", t.v),
                });
            }
            if !(t.alpha.re.is_finite() && t.alpha.im.is_finite()) {
                return Err(Error::TargetOutOfDomain {
                    index,
                    reason: "non-finite scattering coefficient".into(),
                });
            }
        }
        Ok(())
    }

    /// Index pairs of targets sharing the same `(r, v)`.
    pub fn duplicate_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.targets.len() {
            for j in i + 1..self.targets.len() {
                let (a, b) = (&self.targets[i], &self.targets[j]);
                if a.r == b.r && a.v == b.v {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }
}

/// Sampled measurement `y` of length `M`, with the `Ms x Mc` matrix view
/// `Y[ms, mc] = y[mc*Ms + ms]` (column-major, so the view is a reinterpretation).
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    ms: usize,
    mc: usize,
    samples: Vec<Complex64>,
}

impl Measurement {
    pub fn from_samples(ms: usize, mc: usize, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != ms * mc {
            return Err(Error::LengthMismatch {
                expected: ms * mc,
                got: samples.len(),
            });
        }
        Ok(Self { ms, mc, samples })
    }

    pub fn from_matrix(y: &DMatrix<Complex64>) -> Self {
        Self {
            ms: y.nrows(),
            mc: y.ncols(),
            samples: y.as_slice().to_vec(),
        }
    }

    pub fn zeros(ms: usize, mc: usize) -> Self {
        Self {
            ms,
            mc,
            samples: vec![Complex64::new(0.0, 0.0); ms * mc],
        }
    }

    pub fn ms(&self) -> usize {
        self.ms
    }

    pub fn mc(&self) -> usize {
        self.mc
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn at(&self, ms: usize, mc: usize) -> Complex64 {
        self.samples[mc * self.ms + ms]
    }

    pub fn matrix(&self) -> DMatrixView<'_, Complex64> {
        DMatrixView::from_slice(&self.samples, self.ms, self.mc)
    }

    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Which forward model generates synthetic measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthesisModel {
    Exact,
    Factorized,
}

/// Range sub-atom `psi(r')`, length `Ms`.
pub fn sub_atom_psi(cfg: &RadarConfig, r_prime: f64) -> Vec<Complex64> {
    let k = cfg.range_rate() * r_prime;
    (0..cfg.ms)
        .map(|ms| Complex64::from_polar(1.0, -k * ms as f64))
        .collect()
}

/// Doppler sub-atom `phi(v)`, length `Mc`.
pub fn sub_atom_phi(cfg: &RadarConfig, v: f64) -> Vec<Complex64> {
    let k = cfg.speed_rate() * v;
    (0..cfg.mc)
        .map(|mc| Complex64::from_polar(1.0, -k * mc as f64))
        .collect()
}

/// `d psi / d r'`.
pub fn sub_atom_psi_derivative(cfg: &RadarConfig, r_prime: f64) -> Vec<Complex64> {
    let rate = cfg.range_rate();
    sub_atom_psi(cfg, r_prime)
        .into_iter()
        .enumerate()
        .map(|(ms, z)| Complex64::new(0.0, -rate * ms as f64) * z)
        .collect()
}

/// `d phi / d v`.
pub fn sub_atom_phi_derivative(cfg: &RadarConfig, v: f64) -> Vec<Complex64> {
    let rate = cfg.speed_rate();
    sub_atom_phi(cfg, v)
        .into_iter()
        .enumerate()
        .map(|(mc, z)| Complex64::new(0.0, -rate * mc as f64) * z)
        .collect()
}

/// Per-sample phase of the exact atom and its partial derivatives.
struct PhaseModel {
    range_rate: f64,
    speed_rate: f64,
    gamma: f64,
    // 2*pi*B / (c*Ms)
    migration: f64,
    // pi*B / (Ms*Ts*c^2)
    quadratic: f64,
    c_ts: f64,
    ts: f64,
    tc: f64,
}

impl PhaseModel {
    fn new(cfg: &RadarConfig) -> Self {
        let c = SPEED_OF_LIGHT;
        Self {
            range_rate: cfg.range_rate(),
            speed_rate: cfg.speed_rate(),
            gamma: cfg.gamma(),
            migration: 2.0 * PI * cfg.bandwidth / (c * cfg.ms as f64),
            quadratic: PI * cfg.bandwidth / (cfg.ms as f64 * cfg.ts * c * c),
            c_ts: c * cfg.ts,
            ts: cfg.ts,
            tc: cfg.tc,
        }
    }

    /// Phase of `theta` alone.
    fn theta(&self, r: f64, v: f64, ms: usize, mc: usize) -> f64 {
        let t = mc as f64 * self.tc + ms as f64 * self.ts;
        -self.migration * (r / self.c_ts + ms as f64) * v * t + self.quadratic * v * v * t * t
    }

    /// Total phase `(Phi, dPhi/dr, dPhi/dv)`.
    fn phase(&self, r: f64, v: f64, ms: usize, mc: usize) -> (f64, f64, f64) {
        let (msf, mcf) = (ms as f64, mc as f64);
        let t = mcf * self.tc + msf * self.ts;
        let phi = -self.range_rate * (r + self.gamma * v) * msf - self.speed_rate * v * mcf
            + self.theta(r, v, ms, mc);
        let d_r = -self.range_rate * msf - self.migration / self.c_ts * v * t;
        let d_v = -self.range_rate * self.gamma * msf - self.speed_rate * mcf
            - self.migration * (r / self.c_ts + msf) * t
            + 2.0 * self.quadratic * v * t * t;
        (phi, d_r, d_v)
    }
}

/// Distortion term `theta(r, v)` as an `Ms x Mc` matrix.
pub fn distortion_theta(cfg: &RadarConfig, r: f64, v: f64) -> DMatrix<Complex64> {
    let model = PhaseModel::new(cfg);
    DMatrix::from_fn(cfg.ms, cfg.mc, |ms, mc| {
        Complex64::from_polar(1.0, model.theta(r, v, ms, mc))
    })
}

/// Exact atom `a(r, v)`, length `M`.
pub fn exact_atom(cfg: &RadarConfig, r: f64, v: f64) -> Vec<Complex64> {
    let model = PhaseModel::new(cfg);
    let mut out = Vec::with_capacity(cfg.m());
    for mc in 0..cfg.mc {
        for ms in 0..cfg.ms {
            out.push(Complex64::from_polar(1.0, model.phase(r, v, ms, mc).0));
        }
    }
    out
}

/// Exact atom together with `da/dr` and `da/dv`.
pub fn exact_atom_with_gradient(
    cfg: &RadarConfig,
    r: f64,
    v: f64,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let model = PhaseModel::new(cfg);
    let m = cfg.m();
    let (mut a, mut d_r, mut d_v) = (
        Vec::with_capacity(m),
        Vec::with_capacity(m),
        Vec::with_capacity(m),
    );
    for mc in 0..cfg.mc {
        for ms in 0..cfg.ms {
            let (phi, gr, gv) = model.phase(r, v, ms, mc);
            let z = Complex64::from_polar(1.0, phi);
            a.push(z);
            d_r.push(Complex64::new(0.0, gr) * z);
            d_v.push(Complex64::new(0.0, gv) * z);
        }
    }
    (a, d_r, d_v)
}

/// Rank-1 factorized atom `A(r, v) = psi(r + gamma v) phi(v)^T`.
pub fn factorized_atom(cfg: &RadarConfig, r: f64, v: f64) -> DMatrix<Complex64> {
    let psi = sub_atom_psi(cfg, r + cfg.gamma() * v);
    let phi = sub_atom_phi(cfg, v);
    DMatrix::from_fn(cfg.ms, cfg.mc, |ms, mc| psi[ms] * phi[mc])
}

/// Synthesizes `y = sum_k alpha_k a(r_k, v_k) + noise` under the chosen model.
///
/// Noise is i.i.d. centered complex normal with variance `noise_sigma^2`,
/// drawn from a stream seeded by `seed`; with `noise_sigma = 0` the seed is unused.
pub fn synthesize(
    cfg: &RadarConfig,
    scene: &Scene,
    model: SynthesisModel,
    noise_sigma: f64,
    seed: u64,
) -> Result<Measurement> {
    cfg.validate()?;
    scene.validate(cfg)?;
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise_sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let mut y = Measurement::zeros(cfg.ms, cfg.mc);
    for t in &scene.targets {
        match model {
            SynthesisModel::Exact => {
                for (yi, ai) in y.samples.iter_mut().zip(exact_atom(cfg, t.r, t.v)) {
                    *yi += t.alpha * ai;
                }
            }
            SynthesisModel::Factorized => {
                let psi = sub_atom_psi(cfg, t.r + cfg.gamma() * t.v);
                let phi = sub_atom_phi(cfg, t.v);
                for (mc, p) in phi.iter().enumerate() {
                    let col = &mut y.samples[mc * cfg.ms..(mc + 1) * cfg.ms];
                    for (yi, s) in col.iter_mut().zip(&psi) {
                        *yi += t.alpha * s * p;
                    }
                }
            }
        }
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma / std::f64::consts::SQRT_2)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for yi in &mut y.samples {
            *yi += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(y)
}
