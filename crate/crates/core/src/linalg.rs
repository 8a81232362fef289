//! Small dense complex kernels used by the pursuit solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative ridge added to a singular Gram matrix: `RIDGE * trace`.
pub const RIDGE: f64 = 1e-10;

// Squared pivot ratio below which a Cholesky factor is treated as singular.
const PIVOT_FLOOR: f64 = 1e-13;

/// `<a, b> = a^H b`.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Solution of a Hermitian positive semi-definite system.
#[derive(Debug, Clone)]
pub struct HermitianSolution {
    pub x: DVector<Complex64>,
    /// The system was numerically singular and was solved with a ridge.
    pub regularized: bool,
}

fn cholesky_solve(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    let chol = a.clone().cholesky()?;
    let l = chol.l_dirty();
    let n = a.nrows();
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for i in 0..n {
        let d = l[(i, i)].re;
        max = max.max(d);
        min = min.min(d);
    }
    if !min.is_finite() || max <= 0.0 || min * min < PIVOT_FLOOR * max * max {
        return None;
    }
    Some(chol.solve(b))
}

/// Solves `a x = b` for Hermitian positive semi-definite `a`.
///
/// Falls back to `(a + RIDGE * tr(a) I) x = b` when `a` is numerically singular.
pub fn solve_hermitian(a: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Result<HermitianSolution> {
    assert!(a.is_square() && a.nrows() == b.len());
    if a.nrows() == 0 {
        return Ok(HermitianSolution {
            x: DVector::zeros(0),
            regularized: false,
        });
    }
    if let Some(x) = cholesky_solve(a, b) {
        return Ok(HermitianSolution {
            x,
            regularized: false,
        });
    }
    let trace: f64 = (0..a.nrows()).map(|i| a[(i, i)].re).sum();
    // an all-zero system still gets a usable ridge
    let ridge = if trace > 0.0 { RIDGE * trace } else { RIDGE };
    let mut reg = a.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += Complex64::new(ridge, 0.0);
    }
    let x = reg
        .cholesky()
        .map(|c| c.solve(b))
        .ok_or_else(|| Error::Numeric("Gram matrix is not positive semi-definite".into()))?;
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Numeric("non-finite least-squares solution".into()));
    }
    Ok(HermitianSolution {
        x,
        regularized: true,
    })
}
