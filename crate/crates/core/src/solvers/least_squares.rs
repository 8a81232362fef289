//! Joint least squares over all picked interpolants.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dictionary::{FactorizedDictionary, InterpolantBank, TAYLOR_INTERPOLANTS};
use crate::error::{Error, Result};
use crate::linalg::{inner, solve_hermitian};
use crate::signal::Measurement;

/// Coefficients `beta_k` (one vector of length `I` per pick).
#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub betas: Vec<Vec<Complex64>>,
    /// The Gram matrix was numerically singular and a ridge was applied.
    pub regularized: bool,
}

fn check_interp_count(interp_count: usize) -> Result<()> {
    if interp_count == 0 || interp_count > TAYLOR_INTERPOLANTS {
        return Err(Error::InvalidOptions(format!(
            "interpolant count must be in 1..={TAYLOR_INTERPOLANTS}, got {interp_count}"
        )));
    }
    Ok(())
}

fn check_unique<T: PartialEq>(picks: &[T]) -> Result<()> {
    for (i, p) in picks.iter().enumerate() {
        if picks[..i].contains(p) {
            return Err(Error::DuplicatePick(i));
        }
    }
    Ok(())
}

fn split_betas(x: &DVector<Complex64>, interp_count: usize) -> Vec<Vec<Complex64>> {
    x.as_slice()
        .chunks(interp_count)
        .map(<[Complex64]>::to_vec)
        .collect()
}

/// Least squares of `y` on `columns`, grouped `interp_count` per pick, through
/// the normal equations.
pub fn joint_ls_columns(
    y: &[Complex64],
    columns: &[Vec<Complex64>],
    interp_count: usize,
) -> Result<LsSolution> {
    check_interp_count(interp_count)?;
    if !columns.len().is_multiple_of(interp_count) {
        return Err(Error::InvalidOptions(
            "column count is not a multiple of the interpolant count".into(),
        ));
    }
    if let Some(bad) = columns.iter().find(|c| c.len() != y.len()) {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            got: bad.len(),
        });
    }
    let p = columns.len();
    let mut gram = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let g = inner(&columns[a], &columns[b]);
            gram[(a, b)] = g;
            gram[(b, a)] = g.conj();
        }
    }
    let f = DVector::from_iterator(p, columns.iter().map(|c| inner(c, y)));
    let sol = solve_hermitian(&gram, &f)?;
    Ok(LsSolution {
        betas: split_betas(&sol.x, interp_count),
        regularized: sol.regularized,
    })
}

/// `argmin sum_k sum_i beta_k^(i) d^(i)[n_k] - y` on the exact path.
pub fn joint_ls_exact<B: InterpolantBank + ?Sized>(
    y: &[Complex64],
    bank: &B,
    picks: &[usize],
    interp_count: usize,
) -> Result<LsSolution> {
    check_interp_count(interp_count)?;
    check_unique(picks)?;
    let mut columns = Vec::with_capacity(picks.len() * interp_count);
    for &n in picks {
        if n >= bank.node_count() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: bank.node_count(),
            });
        }
        columns.extend(bank.interpolants(n).into_iter().take(interp_count));
    }
    joint_ls_columns(y, &columns, interp_count)
}

/// `y - sum_k sum_i beta_k^(i) column_(k,i)`.
pub fn exact_residual(
    y: &[Complex64],
    columns: &[Vec<Complex64>],
    betas: &[Vec<Complex64>],
) -> Vec<Complex64> {
    let mut r = y.to_vec();
    for (col, beta) in columns.iter().zip(betas.iter().flatten()) {
        for (ri, ci) in r.iter_mut().zip(col) {
            *ri -= beta * ci;
        }
    }
    r
}

/// Joint least squares on the factorized path with `H = H_xi (.) H_eta` and
/// `f_(k,i) = xi^H Y conj(eta)`, never forming the `M`-long columns.
pub fn joint_ls_factorized(
    y: &Measurement,
    dict: &FactorizedDictionary,
    picks: &[(usize, usize)],
    interp_count: usize,
) -> Result<LsSolution> {
    check_interp_count(interp_count)?;
    check_unique(picks)?;
    if y.ms() != dict.ms() || y.mc() != dict.mc() {
        return Err(Error::LengthMismatch {
            expected: dict.ms() * dict.mc(),
            got: y.len(),
        });
    }
    let mut xi = Vec::with_capacity(picks.len() * interp_count);
    let mut eta = Vec::with_capacity(picks.len() * interp_count);
    for &(nr, nv) in picks {
        let f = dict.factorized_interpolants(nr, nv)?;
        xi.extend_from_slice(&f.xi[..interp_count]);
        eta.extend_from_slice(&f.eta[..interp_count]);
    }
    let p = xi.len();
    let mut gram = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let g = inner(xi[a], xi[b]) * inner(eta[a], eta[b]);
            gram[(a, b)] = g;
            gram[(b, a)] = g.conj();
        }
    }
    let ms = y.ms();
    let samples = y.samples();
    let f = DVector::from_iterator(
        p,
        (0..p).map(|a| {
            eta[a]
                .iter()
                .enumerate()
                .map(|(mc, e)| e.conj() * inner(xi[a], &samples[mc * ms..(mc + 1) * ms]))
                .sum::<Complex64>()
        }),
    );
    let sol = solve_hermitian(&gram, &f)?;
    Ok(LsSolution {
        betas: split_betas(&sol.x, interp_count),
        regularized: sol.regularized,
    })
}

/// `Y - sum_k sum_i beta_k^(i) xi^(i)[nr_k] (eta^(i)[nv_k])^T`.
pub fn factorized_residual(
    y: &Measurement,
    dict: &FactorizedDictionary,
    picks: &[(usize, usize)],
    betas: &[Vec<Complex64>],
) -> Result<Measurement> {
    let ms = y.ms();
    let mut r = y.clone();
    for (&(nr, nv), beta) in picks.iter().zip(betas) {
        let f = dict.factorized_interpolants(nr, nv)?;
        for (i, b) in beta.iter().enumerate() {
            let samples = r.samples_mut();
            for (mc, e) in f.eta[i].iter().enumerate() {
                let be = b * e;
                for (ri, x) in samples[mc * ms..(mc + 1) * ms].iter_mut().zip(f.xi[i]) {
                    *ri -= be * x;
                }
            }
        }
    }
    Ok(r)
}
