use crate::error::{Error, Result};
use crate::evaluation::assignment::hungarian;
use crate::signal::RadarConfig;

/// Normalized estimation error
/// `E = sqrt(((r_hat - r)/rho_r)^2 + ((v_hat - v)/rho_v)^2)`.
pub fn error_ek(cfg: &RadarConfig, truth: (f64, f64), est: (f64, f64)) -> f64 {
    let dr = (est.0 - truth.0) / cfg.range_resolution();
    let dv = (est.1 - truth.1) / cfg.speed_resolution();
    dr.hypot(dv)
}

/// An estimate is a miss when `E > 1`.
pub fn is_miss(e: f64) -> bool {
    !(e <= 1.0)
}

// Stand-in for non-finite errors so the assignment costs stay finite.
const HUGE_ERROR: f64 = 1e12;

/// Error matrix `E[i][j]` between truth `i` and estimate `j`.
pub fn error_matrix(cfg: &RadarConfig, truths: &[(f64, f64)], estimates: &[(f64, f64)]) -> Vec<Vec<f64>> {
    truths
        .iter()
        .map(|&t| {
            estimates
                .iter()
                .map(|&e| {
                    let err = error_ek(cfg, t, e);
                    if err.is_finite() {
                        err
                    } else {
                        HUGE_ERROR
                    }
                })
                .collect()
        })
        .collect()
}

/// One-to-one association of estimates to truths minimizing first the number
/// of misses, then the total error. Returns `perm` with truth `i` matched to
/// estimate `perm[i]`.
pub fn associate(
    cfg: &RadarConfig,
    truths: &[(f64, f64)],
    estimates: &[(f64, f64)],
) -> Result<Vec<usize>> {
    if truths.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            expected: truths.len(),
            got: estimates.len(),
        });
    }
    let errors = error_matrix(cfg, truths, estimates);
    let k = truths.len() as f64;
    let max_err = errors.iter().flatten().cloned().fold(0.0, f64::max);
    // one extra miss must outweigh any achievable total error
    let big = k * max_err + 1.0;
    let cost: Vec<Vec<f64>> = errors
        .iter()
        .map(|row| {
            row.iter()
                .map(|&e| if is_miss(e) { big + e } else { e })
                .collect()
        })
        .collect();
    Ok(hungarian(&cost))
}

/// Metrics of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    /// `E_k` per truth, in truth order.
    pub per_target_error: Vec<f64>,
    pub miss_flags: Vec<bool>,
    pub miss_rate: f64,
    /// Mean `E_k` over hits; `None` when every target is missed.
    pub avg_hit_error: Option<f64>,
    pub solve_time: f64,
}

impl TrialMetrics {
    pub fn from_estimates(
        cfg: &RadarConfig,
        truths: &[(f64, f64)],
        estimates: &[(f64, f64)],
        solve_time: f64,
    ) -> Result<Self> {
        let perm = associate(cfg, truths, estimates)?;
        let per_target_error: Vec<f64> = truths
            .iter()
            .zip(&perm)
            .map(|(&t, &j)| error_ek(cfg, t, estimates[j]))
            .collect();
        let miss_flags: Vec<bool> = per_target_error.iter().map(|&e| is_miss(e)).collect();
        let misses = miss_flags.iter().filter(|&&m| m).count();
        let k = truths.len();
        let hits: Vec<f64> = per_target_error
            .iter()
            .zip(&miss_flags)
            .filter(|(_, &m)| !m)
            .map(|(&e, _)| e)
            .collect();
        Ok(Self {
            miss_rate: if k == 0 { 0.0 } else { misses as f64 / k as f64 },
            avg_hit_error: (!hits.is_empty()).then(|| hits.iter().sum::<f64>() / hits.len() as f64),
            per_target_error,
            miss_flags,
            solve_time,
        })
    }
}
