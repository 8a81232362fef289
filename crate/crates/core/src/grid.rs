//! Separable range x speed grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::RadarConfig;

/// Choice of the normalization constants used by the Taylor interpolants and
/// the mapping function.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `(R~, V~) = (dr, dv)`: deviations are measured in grid cells.
    #[default]
    GridStep,
    /// `(R~, V~) = (rho_r, rho_v)`.
    Resolution,
}

/// Uniform separable grid `Omega_R x Omega_V` with linear index
/// `n = nv * Nr + nr`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    range_bins: Vec<f64>,
    speed_bins: Vec<f64>,
    range_step: f64,
    speed_step: f64,
    range_scale: f64,
    speed_scale: f64,
}

/// Builds the uniform grid covering `(0, max_range] x (-max_speed, max_speed]`
/// with bin centers half a step away from the domain edges.
pub fn build_grid(
    cfg: &RadarConfig,
    nr: usize,
    nv: usize,
    normalization: Normalization,
) -> Result<ParamGrid> {
    cfg.validate()?;
    if nr < 2 || nv < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 bins per axis, got nr={nr} nv={nv}"
        )));
    }
    let vmax = cfg.max_speed();
    let range_step = cfg.max_range() / nr as f64;
    let speed_step = 2.0 * vmax / nv as f64;
    let range_bins = (0..nr).map(|i| (i as f64 + 0.5) * range_step).collect();
    let speed_bins = (0..nv)
        .map(|j| -vmax + (j as f64 + 0.5) * speed_step)
        .collect();
    let (range_scale, speed_scale) = match normalization {
        Normalization::GridStep => (range_step, speed_step),
        Normalization::Resolution => (cfg.range_resolution(), cfg.speed_resolution()),
    };
    Ok(ParamGrid {
        range_bins,
        speed_bins,
        range_step,
        speed_step,
        range_scale,
        speed_scale,
    })
}

impl ParamGrid {
    /// Grid over arbitrary uniformly spaced bins. Mostly useful for tests.
    pub fn from_bins(
        range_bins: Vec<f64>,
        speed_bins: Vec<f64>,
        range_scale: f64,
        speed_scale: f64,
    ) -> Result<Self> {
        fn step(bins: &[f64], axis: &str) -> Result<f64> {
            if bins.len() < 2 {
                return Err(Error::InvalidGrid(format!("{axis} axis needs at least 2 bins")));
            }
            let d = bins[1] - bins[0];
            let uniform = bins
                .windows(2)
                .all(|w| w[1] > w[0] && ((w[1] - w[0]) - d).abs() <= 1e-9 * d.abs());
            if !uniform || d <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "{axis} bins must be strictly increasing and uniform"
                )));
            }
            Ok(d)
        }
        let range_step = step(&range_bins, "range")?;
        let speed_step = step(&speed_bins, "speed")?;
        if !(range_scale > 0.0 && speed_scale > 0.0) {
            return Err(Error::InvalidGrid("normalization constants must be > 0".into()));
        }
        Ok(Self {
            range_bins,
            speed_bins,
            range_step,
            speed_step,
            range_scale,
            speed_scale,
        })
    }

    pub fn nr(&self) -> usize {
        self.range_bins.len()
    }

    pub fn nv(&self) -> usize {
        self.speed_bins.len()
    }

    /// Total node count `N = Nr * Nv`.
    pub fn len(&self) -> usize {
        self.nr() * self.nv()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range_bins(&self) -> &[f64] {
        &self.range_bins
    }

    pub fn speed_bins(&self) -> &[f64] {
        &self.speed_bins
    }

    pub fn range_step(&self) -> f64 {
        self.range_step
    }

    pub fn speed_step(&self) -> f64 {
        self.speed_step
    }

    /// `R~`.
    pub fn range_scale(&self) -> f64 {
        self.range_scale
    }

    /// `V~`.
    pub fn speed_scale(&self) -> f64 {
        self.speed_scale
    }

    pub fn linear_index(&self, nr: usize, nv: usize) -> usize {
        nv * self.nr() + nr
    }

    pub fn split_index(&self, n: usize) -> (usize, usize) {
        (n % self.nr(), n / self.nr())
    }

    /// `(r_bar, v_bar)` of node `n`.
    pub fn node(&self, n: usize) -> Result<(f64, f64)> {
        if n >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.len(),
            });
        }
        let (nr, nv) = self.split_index(n);
        Ok((self.range_bins[nr], self.speed_bins[nv]))
    }

    /// Largest admissible normalized deviations: half a cell on each axis.
    pub fn deviation_limits(&self) -> (f64, f64) {
        (
            0.5 * self.range_step / self.range_scale,
            0.5 * self.speed_step / self.speed_scale,
        )
    }

    /// Node minimizing `max(|r - r_bar| / dr, |v - v_bar| / dv)`; among ties
    /// the smallest linear index wins.
    pub fn nearest_node(&self, r: f64, v: f64) -> usize {
        let range_dist = |i: usize| (r - self.range_bins[i]).abs() / self.range_step;
        let speed_dist = |j: usize| (v - self.speed_bins[j]).abs() / self.speed_step;
        let best_r = (0..self.nr()).map(range_dist).fold(f64::INFINITY, f64::min);
        let best_v = (0..self.nv()).map(speed_dist).fold(f64::INFINITY, f64::min);
        let level = best_r.max(best_v);
        // smallest n means smallest nv first, then smallest nr
        let nv = (0..self.nv()).find(|&j| speed_dist(j) <= level).unwrap_or(0);
        let nr = (0..self.nr()).find(|&i| range_dist(i) <= level).unwrap_or(0);
        self.linear_index(nr, nv)
    }
}

/// Order-1 Taylor mapping function `C_n(r, v) = (1, (r - r_bar)/R~, (v - v_bar)/V~)`.
pub fn mapping_coefficients(grid: &ParamGrid, n: usize, r: f64, v: f64) -> Result<[f64; 3]> {
    let (rb, vb) = grid.node(n)?;
    Ok([1.0, (r - rb) / grid.range_scale, (v - vb) / grid.speed_scale])
}
