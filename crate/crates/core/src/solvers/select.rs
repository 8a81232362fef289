//! Index selection kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dictionary::{FactorizedDictionary, InterpolantBank};
use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, solve_hermitian};
use crate::signal::Measurement;

/// Outcome of one index selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection<T> {
    pub index: T,
    /// `|<d^(1), r>|` for the correlation rules, the attained objective
    /// `min_beta ||sum beta_i d^(i) - r||^2` for the full rule.
    pub score: f64,
    /// Every candidate scored zero (e.g. zero residual); the pick is the
    /// first admissible node.
    pub zero_correlation: bool,
    /// Nodes whose local interpolant Gram matrix needed a ridge.
    pub regularized_nodes: usize,
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

fn no_candidate() -> Error {
    Error::InvalidOptions("every grid node is already picked".into())
}

/// `argmax_n |<d^(1)[n], r>|`, skipping `excluded`; ties go to the smaller `n`.
pub fn select_index_simplified<B: InterpolantBank + ?Sized>(
    residual: &[Complex64],
    bank: &B,
    excluded: &[usize],
) -> Result<Selection<usize>> {
    check_len(residual.len(), bank.signal_len())?;
    let mut best: Option<(usize, f64)> = None;
    for n in 0..bank.node_count() {
        if excluded.contains(&n) {
            continue;
        }
        let score = inner(&bank.atom(n), residual).norm();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((n, score));
        }
    }
    let (index, score) = best.ok_or_else(no_candidate)?;
    Ok(Selection {
        index,
        score,
        zero_correlation: score == 0.0,
        regularized_nodes: 0,
    })
}

/// Gain `f^H G^{-1} f` of projecting onto the span of a node's interpolants.
fn projection_gain(gram: &DMatrix<Complex64>, f: &DVector<Complex64>) -> Result<(f64, bool)> {
    let sol = solve_hermitian(gram, f)?;
    let gain = f.iter().zip(sol.x.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    Ok((gain, sol.regularized))
}

struct FullScan {
    best: Option<(usize, f64)>,
    regularized: usize,
}

impl FullScan {
    fn new() -> Self {
        Self {
            best: None,
            regularized: 0,
        }
    }

    fn offer(&mut self, n: usize, gram: &DMatrix<Complex64>, f: &DVector<Complex64>) -> Result<()> {
        let (gain, regularized) = projection_gain(gram, f)?;
        self.regularized += regularized as usize;
        if self.best.is_none_or(|(_, g)| gain > g) {
            self.best = Some((n, gain));
        }
        Ok(())
    }

    fn finish<T>(self, residual_energy: f64, index: impl Fn(usize) -> T) -> Result<Selection<T>> {
        let (n, gain) = self.best.ok_or_else(no_candidate)?;
        Ok(Selection {
            index: index(n),
            score: (residual_energy - gain).max(0.0),
            zero_correlation: gain == 0.0,
            regularized_nodes: self.regularized,
        })
    }
}

/// `argmin_n min_beta ||sum_i beta_i d^(i)[n] - r||^2` over the first
/// `interp_count` interpolants, solved per node through the normal equations.
pub fn select_index_full<B: InterpolantBank + ?Sized>(
    residual: &[Complex64],
    bank: &B,
    interp_count: usize,
    excluded: &[usize],
) -> Result<Selection<usize>> {
    check_len(residual.len(), bank.signal_len())?;
    let mut scan = FullScan::new();
    for n in 0..bank.node_count() {
        if excluded.contains(&n) {
            continue;
        }
        let d = bank.interpolants(n);
        let d = &d[..interp_count];
        let gram = DMatrix::from_fn(interp_count, interp_count, |a, b| inner(&d[a], &d[b]));
        let f = DVector::from_iterator(interp_count, d.iter().map(|di| inner(di, residual)));
        scan.offer(n, &gram, &f)?;
    }
    scan.finish(norm_sqr(residual), |n| n)
}

/// Correlations `xi[nr]^H R conj(eta[nv])` for every node, laid out as
/// `n = nv * Nr + nr`. The cheaper axis is contracted last so the second
/// stage costs `O(N min(Ms, Mc))`.
fn correlation_map<'a>(
    residual: &Measurement,
    nr_count: usize,
    nv_count: usize,
    xi: impl Fn(usize) -> &'a [Complex64],
    eta: impl Fn(usize) -> &'a [Complex64],
) -> Vec<Complex64> {
    let (ms, mc) = (residual.ms(), residual.mc());
    let y = residual.samples();
    let mut out = vec![Complex64::new(0.0, 0.0); nr_count * nv_count];
    if mc <= ms {
        // P[nr][mc] = xi[nr]^H Y[:, mc]
        let mut p = Vec::with_capacity(nr_count * mc);
        for nr in 0..nr_count {
            let x = xi(nr);
            p.extend((0..mc).map(|c| inner(x, &y[c * ms..(c + 1) * ms])));
        }
        for nv in 0..nv_count {
            let e = eta(nv);
            for nr in 0..nr_count {
                let row = &p[nr * mc..(nr + 1) * mc];
                // sum_mc P[nr][mc] conj(eta[mc]) = conj(<P_row, eta>)
                out[nv * nr_count + nr] = inner(row, e).conj();
            }
        }
    } else {
        // Q[nv][ms] = sum_mc Y[ms, mc] conj(eta[nv][mc])
        let mut q = vec![Complex64::new(0.0, 0.0); nv_count * ms];
        for nv in 0..nv_count {
            let e = eta(nv);
            let row = &mut q[nv * ms..(nv + 1) * ms];
            for (c, ec) in e.iter().enumerate() {
                let ec = ec.conj();
                for (qs, ys) in row.iter_mut().zip(&y[c * ms..(c + 1) * ms]) {
                    *qs += ys * ec;
                }
            }
        }
        for nv in 0..nv_count {
            let row = &q[nv * ms..(nv + 1) * ms];
            for nr in 0..nr_count {
                out[nv * nr_count + nr] = inner(xi(nr), row);
            }
        }
    }
    out
}

fn check_matrix(residual: &Measurement, dict: &FactorizedDictionary) -> Result<()> {
    if residual.ms() != dict.ms() || residual.mc() != dict.mc() {
        return Err(Error::LengthMismatch {
            expected: dict.ms() * dict.mc(),
            got: residual.len(),
        });
    }
    Ok(())
}

/// `argmax_(nr, nv) |xi^(1)[nr]^H R conj(eta^(1)[nv])|` through the two-stage
/// product; ties go to the smaller linear index.
pub fn select_index_factorized(
    residual: &Measurement,
    dict: &FactorizedDictionary,
    excluded: &[(usize, usize)],
) -> Result<Selection<(usize, usize)>> {
    check_matrix(residual, dict)?;
    let grid = dict.grid();
    let corr = correlation_map(
        residual,
        grid.nr(),
        grid.nv(),
        |nr| dict.range_atom(nr),
        |nv| dict.speed_atom(nv),
    );
    let mut best: Option<(usize, f64)> = None;
    for (n, c) in corr.iter().enumerate() {
        if excluded.contains(&grid.split_index(n)) {
            continue;
        }
        let score = c.norm();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((n, score));
        }
    }
    let (n, score) = best.ok_or_else(no_candidate)?;
    Ok(Selection {
        index: grid.split_index(n),
        score,
        zero_correlation: score == 0.0,
        regularized_nodes: 0,
    })
}

// Which of the two distinct range (resp. speed) sub-atoms the i-th
// interpolant uses: xi = (psi, R~psi', psi), eta = (phi, phi, V~phi').
const XI_SLOT: [usize; 3] = [0, 1, 0];
const ETA_SLOT: [usize; 3] = [0, 0, 1];

/// Full index selection on the factorized model, using
/// `<D^(a), D^(b)>_F = <xi_a, xi_b> <eta_a, eta_b>` for the local Gram matrices.
pub fn select_index_factorized_full(
    residual: &Measurement,
    dict: &FactorizedDictionary,
    interp_count: usize,
    excluded: &[(usize, usize)],
) -> Result<Selection<(usize, usize)>> {
    check_matrix(residual, dict)?;
    let grid = dict.grid();
    let (nr_count, nv_count) = (grid.nr(), grid.nv());
    let xi_of = |slot: usize, nr: usize| {
        if slot == 0 {
            dict.range_atom(nr)
        } else {
            dict.range_derivative(nr)
        }
    };
    let eta_of = |slot: usize, nv: usize| {
        if slot == 0 {
            dict.speed_atom(nv)
        } else {
            dict.speed_derivative(nv)
        }
    };
    let corr: Vec<Vec<Complex64>> = (0..interp_count)
        .map(|i| {
            correlation_map(
                residual,
                nr_count,
                nv_count,
                |nr| xi_of(XI_SLOT[i], nr),
                |nv| eta_of(ETA_SLOT[i], nv),
            )
        })
        .collect();
    let xi_gram: Vec<[[Complex64; 2]; 2]> = (0..nr_count)
        .map(|nr| {
            let g = |a, b| inner(xi_of(a, nr), xi_of(b, nr));
            [[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]]
        })
        .collect();
    let eta_gram: Vec<[[Complex64; 2]; 2]> = (0..nv_count)
        .map(|nv| {
            let g = |a, b| inner(eta_of(a, nv), eta_of(b, nv));
            [[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]]
        })
        .collect();

    let mut scan = FullScan::new();
    for n in 0..grid.len() {
        let (nr, nv) = grid.split_index(n);
        if excluded.contains(&(nr, nv)) {
            continue;
        }
        let gram = DMatrix::from_fn(interp_count, interp_count, |a, b| {
            xi_gram[nr][XI_SLOT[a]][XI_SLOT[b]] * eta_gram[nv][ETA_SLOT[a]][ETA_SLOT[b]]
        });
        let f = DVector::from_iterator(interp_count, corr.iter().map(|c| c[n]));
        scan.offer(n, &gram, &f)?;
    }
    scan.finish(residual.samples().iter().map(|z| z.norm_sqr()).sum(), |n| {
        grid.split_index(n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{ExactDictionary, TAYLOR_INTERPOLANTS};
    use crate::grid::{build_grid, Normalization};
    use crate::signal::RadarConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn fixture() -> (RadarConfig, ExactDictionary, FactorizedDictionary) {
        let cfg = RadarConfig::k_band(8, 4);
        let grid = build_grid(&cfg, 8, 8, Normalization::GridStep).unwrap();
        (
            cfg,
            ExactDictionary::build(&cfg, &grid).unwrap(),
            FactorizedDictionary::build(&cfg, &grid).unwrap(),
        )
    }

    #[test]
    fn atom_residual_selects_its_node() {
        let (_, exact, _) = fixture();
        for n0 in [0, 13, 63] {
            let r = exact.atom(n0).into_owned();
            assert_eq!(select_index_simplified(&r, &exact, &[]).unwrap().index, n0);
            let full = select_index_full(&r, &exact, TAYLOR_INTERPOLANTS, &[]).unwrap();
            assert_eq!(full.index, n0);
            assert!(full.score < 1e-9);
        }
    }

    #[test]
    fn span_residual_has_zero_objective() {
        let (_, exact, _) = fixture();
        let d = exact.exact_interpolants(27).unwrap();
        let r: Vec<Complex64> = (0..d[0].len())
            .map(|i| d[0][i] * 0.7 + d[1][i] * Complex64::new(0.1, 0.2) - d[2][i] * 0.3)
            .collect();
        let sel = select_index_full(&r, &exact, 3, &[]).unwrap();
        assert_eq!(sel.index, 27);
        assert!(sel.score < 1e-9 * norm_sqr(&r));
    }

    #[test]
    fn zero_residual_is_flagged() {
        let (cfg, exact, fact) = fixture();
        let zero = vec![Complex64::new(0.0, 0.0); cfg.m()];
        let sel = select_index_simplified(&zero, &exact, &[]).unwrap();
        assert_eq!((sel.index, sel.zero_correlation), (0, true));
        let sel = select_index_simplified(&zero, &exact, &[0]).unwrap();
        assert_eq!(sel.index, 1);
        let sel = select_index_factorized(&Measurement::zeros(8, 4), &fact, &[]).unwrap();
        assert_eq!((sel.index, sel.zero_correlation), ((0, 0), true));
    }

    #[test]
    fn exclusion_takes_next_best() {
        let (_, exact, _) = fixture();
        let r = exact.atom(10).into_owned();
        let sel = select_index_simplified(&r, &exact, &[10]).unwrap();
        assert_ne!(sel.index, 10);
        assert!(select_index_simplified(&r, &exact, &(0..64).collect::<Vec<_>>()).is_err());
    }

    #[test]
    fn simplified_matches_exhaustive_scan() {
        let (cfg, exact, _) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let r = random_vec(&mut rng, cfg.m());
            let mut best = (0, -1.0);
            for n in 0..64 {
                let a = exact.atom(n);
                let c: Complex64 = a.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
                if c.norm() > best.1 {
                    best = (n, c.norm());
                }
            }
            assert_eq!(select_index_simplified(&r, &exact, &[]).unwrap().index, best.0);
        }
    }

    /// Independent per-node least squares by Gaussian elimination.
    fn node_objective(d: &[Vec<Complex64>], r: &[Complex64]) -> f64 {
        let k = d.len();
        let mut a = vec![vec![Complex64::new(0.0, 0.0); k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                a[i][j] = d[i].iter().zip(&d[j]).map(|(x, y)| x.conj() * y).sum();
            }
            a[i][k] = d[i].iter().zip(r).map(|(x, y)| x.conj() * y).sum();
        }
        for c in 0..k {
            let p = (c..k).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm())).unwrap();
            a.swap(c, p);
            for row in 0..k {
                if row != c {
                    let f = a[row][c] / a[c][c];
                    for col in c..=k {
                        let v = a[c][col];
                        a[row][col] -= f * v;
                    }
                }
            }
        }
        let beta: Vec<Complex64> = (0..k).map(|i| a[i][k] / a[i][i]).collect();
        r.iter()
            .enumerate()
            .map(|(m, y)| {
                let fit: Complex64 = (0..k).map(|i| beta[i] * d[i][m]).sum();
                (y - fit).norm_sqr()
            })
            .sum()
    }

    #[test]
    fn full_matches_exhaustive_least_squares() {
        let (cfg, exact, _) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let r = random_vec(&mut rng, cfg.m());
            let mut best = (0, f64::INFINITY);
            for n in 0..64 {
                let obj = node_objective(&exact.interpolants(n), &r);
                if obj < best.1 {
                    best = (n, obj);
                }
            }
            let sel = select_index_full(&r, &exact, 3, &[]).unwrap();
            assert_eq!(sel.index, best.0);
            assert!((sel.score - best.1).abs() < 1e-9 * norm_sqr(&r));
        }
    }

    #[test]
    fn factorized_selection_matches_vectorized() {
        for (ms, mc) in [(8, 4), (4, 8)] {
            let cfg = RadarConfig::k_band(ms, mc);
            let grid = build_grid(&cfg, 6, 9, Normalization::GridStep).unwrap();
            let fact = FactorizedDictionary::build(&cfg, &grid).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(ms as u64);
            for _ in 0..10 {
                let y = Measurement::from_samples(ms, mc, random_vec(&mut rng, cfg.m())).unwrap();
                let a = select_index_factorized(&y, &fact, &[]).unwrap();
                let b = select_index_simplified(y.samples(), &fact.vectorized(), &[]).unwrap();
                assert_eq!(grid.linear_index(a.index.0, a.index.1), b.index);
                assert!((a.score - b.score).abs() <= 1e-9 * b.score);

                let a = select_index_factorized_full(&y, &fact, 3, &[]).unwrap();
                let b = select_index_full(y.samples(), &fact.vectorized(), 3, &[]).unwrap();
                assert_eq!(grid.linear_index(a.index.0, a.index.1), b.index);
                assert!((a.score - b.score).abs() <= 1e-9 * norm_sqr(y.samples()));
            }
        }
    }
}
