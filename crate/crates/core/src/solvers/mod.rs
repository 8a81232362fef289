//! Greedy estimators: OMP and F-OMP on the grid, COMP and F-COMP off the grid.
//!
//! All four share the same loop: select a node, refit every picked
//! interpolant jointly, update the residual. The continuous variants then run
//! the off-grid correction once per pick.

mod correction;
mod least_squares;
mod select;

pub use correction::{correct_offgrid, Correction, CorrectionParams};
pub use least_squares::{
    exact_residual, factorized_residual, joint_ls_columns, joint_ls_exact, joint_ls_factorized,
    LsSolution,
};
pub use select::{
    select_index_factorized, select_index_factorized_full, select_index_full,
    select_index_simplified, Selection,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::dictionary::{FactorizedDictionary, InterpolantBank, TaylorDictionary, TAYLOR_INTERPOLANTS};
use crate::error::{Error, Result};
use crate::grid::ParamGrid;
use crate::linalg::norm_sqr;
use crate::signal::Measurement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Omp,
    FOmp,
    Comp,
    FComp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Omp, Algorithm::Comp, Algorithm::FOmp, Algorithm::FComp];

    pub fn is_factorized(self) -> bool {
        matches!(self, Algorithm::FOmp | Algorithm::FComp)
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, Algorithm::Comp | Algorithm::FComp)
    }

    /// Interpolants used per node: 1 on the grid, 3 with order-1 Taylor.
    pub fn interpolant_count(self) -> usize {
        if self.is_continuous() {
            TAYLOR_INTERPOLANTS
        } else {
            1
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Omp => "OMP",
            Algorithm::FOmp => "F-OMP",
            Algorithm::Comp => "COMP",
            Algorithm::FComp => "F-COMP",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "omp" => Ok(Algorithm::Omp),
            "fomp" => Ok(Algorithm::FOmp),
            "comp" => Ok(Algorithm::Comp),
            "fcomp" => Ok(Algorithm::FComp),
            _ => Err(Error::InvalidOptions(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSelection {
    /// Correlation with the first interpolant only, `O(MN)`.
    #[default]
    Simplified,
    /// Per-node least squares on all interpolants, `O(IMN)`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Number of targets to extract.
    pub k: usize,
    pub index_selection: IndexSelection,
    pub correction_max_iters: usize,
    pub correction_tolerance: f64,
    /// Keep corrected deviations within half a grid cell.
    pub clamp_deviations: bool,
}

impl SolverOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidOptions("k must be >= 1".into()));
        }
        if self.correction_max_iters == 0 {
            return Err(Error::InvalidOptions("correction_max_iters must be >= 1".into()));
        }
        if !(self.correction_tolerance > 0.0) {
            return Err(Error::InvalidOptions("correction_tolerance must be > 0".into()));
        }
        Ok(())
    }

    pub fn correction_params(&self, grid: &ParamGrid) -> CorrectionParams {
        CorrectionParams {
            max_iters: self.correction_max_iters,
            tolerance: self.correction_tolerance,
            limits: self.clamp_deviations.then(|| grid.deviation_limits()),
        }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            k: 1,
            index_selection: IndexSelection::Simplified,
            correction_max_iters: 50,
            correction_tolerance: 1e-10,
            clamp_deviations: true,
        }
    }
}

/// Grid node of a pick: a linear index on the exact path, `(nr, nv)` on the
/// factorized path where `nr` indexes the `r' = r + gamma v` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridNode {
    Linear(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PickedAtom {
    pub node: GridNode,
    /// `beta_k`, one coefficient per interpolant.
    pub beta: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub r_hat: f64,
    pub v_hat: f64,
    pub alpha_hat: Complex64,
    /// Normalized off-grid deviations (zero for on-grid solvers).
    pub delta_r: f64,
    pub delta_v: f64,
    pub source: PickedAtom,
}

/// Per-iteration diagnostics of the greedy loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PickDiagnostics {
    pub selection_score: f64,
    pub zero_correlation: bool,
    pub regularized_selection_nodes: usize,
    pub regularized_ls: bool,
    /// Residual norm after this iteration's joint least squares.
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub algorithm: Algorithm,
    pub estimates: Vec<Estimate>,
    pub residual_norm: f64,
    /// Wall time of the solve call in seconds (dictionary build excluded).
    pub wall_time: f64,
    pub iterations_detail: Vec<PickDiagnostics>,
    /// Picks whose correction hit the iteration cap.
    pub unconverged_corrections: usize,
}

/// Outcome of the greedy loop before correction.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome<T> {
    pub picks: Vec<T>,
    pub betas: Vec<Vec<Complex64>>,
    pub diagnostics: Vec<PickDiagnostics>,
}

impl<T> GreedyOutcome<T> {
    pub fn residual_norm(&self) -> f64 {
        self.diagnostics.last().map_or(0.0, |d| d.residual_norm)
    }
}

/// Greedy loop on an exact-path bank with `interp_count` interpolants per node.
pub fn greedy_exact<B: InterpolantBank + ?Sized>(
    y: &[Complex64],
    bank: &B,
    interp_count: usize,
    k: usize,
    selection: IndexSelection,
) -> Result<GreedyOutcome<usize>> {
    if y.len() != bank.signal_len() {
        return Err(Error::LengthMismatch {
            expected: bank.signal_len(),
            got: y.len(),
        });
    }
    let mut residual = y.to_vec();
    let mut picks = Vec::with_capacity(k);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(k * interp_count);
    let mut betas = Vec::new();
    let mut diagnostics = Vec::with_capacity(k);
    for _ in 0..k {
        let sel = match selection {
            IndexSelection::Simplified => select_index_simplified(&residual, bank, &picks)?,
            IndexSelection::Full => select_index_full(&residual, bank, interp_count, &picks)?,
        };
        picks.push(sel.index);
        if interp_count == 1 {
            columns.push(bank.atom(sel.index).into_owned());
        } else {
            columns.extend(bank.interpolants(sel.index).into_iter().take(interp_count));
        }
        let ls = joint_ls_columns(y, &columns, interp_count)?;
        residual = exact_residual(y, &columns, &ls.betas);
        betas = ls.betas;
        diagnostics.push(PickDiagnostics {
            selection_score: sel.score,
            zero_correlation: sel.zero_correlation,
            regularized_selection_nodes: sel.regularized_nodes,
            regularized_ls: ls.regularized,
            residual_norm: norm_sqr(&residual).sqrt(),
        });
    }
    Ok(GreedyOutcome {
        picks,
        betas,
        diagnostics,
    })
}

/// Greedy loop on the factorized dictionary.
pub fn greedy_factorized(
    y: &Measurement,
    dict: &FactorizedDictionary,
    interp_count: usize,
    k: usize,
    selection: IndexSelection,
) -> Result<GreedyOutcome<(usize, usize)>> {
    let mut residual = y.clone();
    let mut picks = Vec::with_capacity(k);
    let mut betas = Vec::new();
    let mut diagnostics = Vec::with_capacity(k);
    for _ in 0..k {
        let sel = match selection {
            IndexSelection::Simplified => select_index_factorized(&residual, dict, &picks)?,
            IndexSelection::Full => {
                select_index_factorized_full(&residual, dict, interp_count, &picks)?
            }
        };
        picks.push(sel.index);
        let ls = joint_ls_factorized(y, dict, &picks, interp_count)?;
        residual = factorized_residual(y, dict, &picks, &ls.betas)?;
        betas = ls.betas;
        diagnostics.push(PickDiagnostics {
            selection_score: sel.score,
            zero_correlation: sel.zero_correlation,
            regularized_selection_nodes: sel.regularized_nodes,
            regularized_ls: ls.regularized,
            residual_norm: residual.norm(),
        });
    }
    Ok(GreedyOutcome {
        picks,
        betas,
        diagnostics,
    })
}

fn taylor_beta(beta: &[Complex64]) -> [Complex64; 3] {
    [beta[0], beta[1], beta[2]]
}

/// Runs `algorithm` on `y` and converts the picks into `(r, v, alpha)` estimates.
///
/// On the factorized path the range estimate is `r' - gamma v` wrapped into the
/// range domain.
pub fn solve(
    y: &Measurement,
    dict: &TaylorDictionary,
    options: &SolverOptions,
    algorithm: Algorithm,
) -> Result<SolverReport> {
    options.validate()?;
    let cfg = dict.config();
    let grid = dict.grid();
    if y.ms() != cfg.ms || y.mc() != cfg.mc {
        return Err(Error::LengthMismatch {
            expected: cfg.m(),
            got: y.len(),
        });
    }
    let interp_count = algorithm.interpolant_count();
    if options.k * interp_count > cfg.m() {
        return Err(Error::InvalidOptions(format!(
            "k * I = {} exceeds the number of samples {}",
            options.k * interp_count,
            cfg.m()
        )));
    }
    if options.k > grid.len() {
        return Err(Error::InvalidOptions(format!(
            "k = {} exceeds the number of grid nodes {}",
            options.k,
            grid.len()
        )));
    }
    let correction = options.correction_params(grid);

    let start = Instant::now();
    let mut unconverged = 0;
    let (estimates, diagnostics) = if algorithm.is_factorized() {
        let out = greedy_factorized(
            y,
            dict.factorized_part(),
            interp_count,
            options.k,
            options.index_selection,
        )?;
        let gamma = cfg.gamma();
        let estimates = out
            .picks
            .iter()
            .zip(&out.betas)
            .map(|(&(nr, nv), beta)| {
                let (r_prime, v) = (grid.range_bins()[nr], grid.speed_bins()[nv]);
                let (alpha, dr, dv) = if algorithm.is_continuous() {
                    let c = correct_offgrid(taylor_beta(beta), &correction);
                    unconverged += (!c.converged) as usize;
                    (c.alpha, c.delta_r, c.delta_v)
                } else {
                    (beta[0], 0.0, 0.0)
                };
                let v_hat = v + grid.speed_scale() * dv;
                let r_prime_hat = r_prime + grid.range_scale() * dr;
                Estimate {
                    r_hat: cfg.wrap_range(r_prime_hat - gamma * v_hat),
                    v_hat,
                    alpha_hat: alpha,
                    delta_r: dr,
                    delta_v: dv,
                    source: PickedAtom {
                        node: GridNode::Pair(nr, nv),
                        beta: beta.clone(),
                    },
                }
            })
            .collect();
        (estimates, out.diagnostics)
    } else {
        let bank = dict
            .exact_part()
            .ok_or(Error::MissingExactDictionary(algorithm.label()))?;
        let out = greedy_exact(y.samples(), bank, interp_count, options.k, options.index_selection)?;
        let estimates = out
            .picks
            .iter()
            .zip(&out.betas)
            .map(|(&n, beta)| {
                let (r, v) = grid.node(n)?;
                let (alpha, dr, dv) = if algorithm.is_continuous() {
                    let c = correct_offgrid(taylor_beta(beta), &correction);
                    unconverged += (!c.converged) as usize;
                    (c.alpha, c.delta_r, c.delta_v)
                } else {
                    (beta[0], 0.0, 0.0)
                };
                Ok(Estimate {
                    r_hat: r + grid.range_scale() * dr,
                    v_hat: v + grid.speed_scale() * dv,
                    alpha_hat: alpha,
                    delta_r: dr,
                    delta_v: dv,
                    source: PickedAtom {
                        node: GridNode::Linear(n),
                        beta: beta.clone(),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        (estimates, out.diagnostics)
    };
    let wall_time = start.elapsed().as_secs_f64();

    Ok(SolverReport {
        algorithm,
        residual_norm: diagnostics.last().map_or(y.norm(), |d| d.residual_norm),
        estimates,
        wall_time,
        iterations_detail: diagnostics,
        unconverged_corrections: unconverged,
    })
}
