//! Off-the-grid correction of the order-1 Taylor coefficients.
//!
//! Given `beta ~ alpha * (1, delta_r, delta_v)`, find `(alpha, delta_r,
//! delta_v)` with real deviations minimizing `||alpha C - beta||^2`. The
//! stationarity conditions are
//!
//! ```text
//! alpha   = (beta1 + beta2 delta_r + beta3 delta_v) / (1 + delta_r^2 + delta_v^2)
//! delta_r = Re(beta2 / alpha)
//! delta_v = Re(beta3 / alpha)
//! ```
//!
//! and are solved by fixed-point iteration from `delta = 0`.

use num_complex::Complex64;

/// Result of the correction step. Deviations are normalized by `R~` and `V~`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub alpha: Complex64,
    pub delta_r: f64,
    pub delta_v: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Iteration controls for [`correct_offgrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionParams {
    pub max_iters: usize,
    pub tolerance: f64,
    /// Bounds on `|delta_r|`, `|delta_v|` applied at every iterate, if any.
    pub limits: Option<(f64, f64)>,
}

pub fn correct_offgrid(beta: [Complex64; 3], params: &CorrectionParams) -> Correction {
    let [b1, b2, b3] = beta;
    if b1 == Complex64::new(0.0, 0.0) {
        return Correction {
            alpha: b1,
            delta_r: 0.0,
            delta_v: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let clamp = |d: f64, lim: f64| d.clamp(-lim, lim);
    let alpha_of = |dr: f64, dv: f64| (b1 + b2 * dr + b3 * dv) / (1.0 + dr * dr + dv * dv);

    let (mut dr, mut dv) = (0.0, 0.0);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        iterations += 1;
        let alpha = alpha_of(dr, dv);
        if alpha == Complex64::new(0.0, 0.0) || !alpha.re.is_finite() || !alpha.im.is_finite() {
            break;
        }
        let (mut nr, mut nv) = ((b2 / alpha).re, (b3 / alpha).re);
        if let Some((lr, lv)) = params.limits {
            nr = clamp(nr, lr);
            nv = clamp(nv, lv);
        }
        let change = (nr - dr).abs().max((nv - dv).abs());
        dr = nr;
        dv = nv;
        if change < params.tolerance {
            converged = true;
            break;
        }
    }
    Correction {
        alpha: alpha_of(dr, dv),
        delta_r: dr,
        delta_v: dv,
        iterations,
        converged,
    }
}
