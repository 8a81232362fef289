//! Order-1 Taylor interpolated dictionaries.
//!
//! Each grid node `n` carries `I = 3` interpolants: the atom itself and its
//! partial derivatives in range and speed, scaled by `R~` and `V~`. Together
//! with the mapping coefficients `C_n(r, v)` they approximate any off-grid
//! atom near the node to second order.
//!
//! The exact path interpolates `a(r, v)` over the `(r, v)` grid. The factorized
//! path interpolates `A(r', v) = psi(r') phi(v)^T` over the `(r', v)` grid with
//! sub-atoms `xi^(i)` and `eta^(i)` such that `D^(i) = xi^(i) (eta^(i))^T`:
//!
//! | i | xi          | eta         |
//! |---|-------------|-------------|
//! | 1 | psi         | phi         |
//! | 2 | R~ psi'     | phi         |
//! | 3 | psi         | V~ phi'     |
//!
//! Since `psi` is periodic in `r'` with period `max_range`, the range bins of
//! the grid also cover every `r' = r + gamma v` modulo that period.

use num_complex::Complex64;
use rayon::prelude::*;
use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::grid::ParamGrid;
use crate::signal::{
    exact_atom, exact_atom_with_gradient, sub_atom_phi, sub_atom_phi_derivative, sub_atom_psi,
    sub_atom_psi_derivative, RadarConfig,
};

/// Number of interpolants per node for the order-1 Taylor scheme.
pub const TAYLOR_INTERPOLANTS: usize = 3;

/// A finite family of vector interpolants indexed by grid node.
///
/// The exact-path kernels only see this trait, so they run unchanged on the
/// exact dictionary and on the vectorized factorized dictionary.
pub trait InterpolantBank: Sync {
    /// Length `M` of every interpolant.
    fn signal_len(&self) -> usize;

    fn node_count(&self) -> usize;

    /// First interpolant `d^(1)[n]`.
    fn atom(&self, n: usize) -> Cow<'_, [Complex64]>;

    /// All `I` interpolants at node `n`.
    fn interpolants(&self, n: usize) -> [Vec<Complex64>; TAYLOR_INTERPOLANTS];
}

/// Exact-model dictionary with `d^(1)` materialized for every node.
#[derive(Debug, Clone)]
pub struct ExactDictionary {
    cfg: RadarConfig,
    grid: ParamGrid,
    atoms: Vec<Complex64>,
}

impl ExactDictionary {
    pub fn build(cfg: &RadarConfig, grid: &ParamGrid) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.m();
        let mut atoms = vec![Complex64::new(0.0, 0.0); m * grid.len()];
        atoms.par_chunks_mut(m).enumerate().for_each(|(n, out)| {
            let (r, v) = grid.node(n).expect("index within grid");
            out.copy_from_slice(&exact_atom(cfg, r, v));
        });
        Ok(Self {
            cfg: *cfg,
            grid: grid.clone(),
            atoms,
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    /// `(d^(1), d^(2), d^(3)) = (a, R~ da/dr, V~ da/dv)` at node `n`.
    pub fn exact_interpolants(&self, n: usize) -> Result<[Vec<Complex64>; TAYLOR_INTERPOLANTS]> {
        let (r, v) = self.grid.node(n)?;
        let (a, d_r, d_v) = exact_atom_with_gradient(&self.cfg, r, v);
        let rs = self.grid.range_scale();
        let vs = self.grid.speed_scale();
        Ok([
            a,
            d_r.into_iter().map(|z| z * rs).collect(),
            d_v.into_iter().map(|z| z * vs).collect(),
        ])
    }
}

impl InterpolantBank for ExactDictionary {
    fn signal_len(&self) -> usize {
        self.cfg.m()
    }

    fn node_count(&self) -> usize {
        self.grid.len()
    }

    fn atom(&self, n: usize) -> Cow<'_, [Complex64]> {
        let m = self.cfg.m();
        Cow::Borrowed(&self.atoms[n * m..(n + 1) * m])
    }

    fn interpolants(&self, n: usize) -> [Vec<Complex64>; TAYLOR_INTERPOLANTS] {
        self.exact_interpolants(n).expect("node index within grid")
    }
}

/// Interpolant sub-atoms at one `(nr, nv)` node.
#[derive(Debug, Clone, Copy)]
pub struct FactorizedInterpolants<'a> {
    pub xi: [&'a [Complex64]; TAYLOR_INTERPOLANTS],
    pub eta: [&'a [Complex64]; TAYLOR_INTERPOLANTS],
}

impl FactorizedInterpolants<'_> {
    /// Vectorized `D^(i) = xi^(i) (eta^(i))^T`.
    pub fn outer(&self, i: usize) -> Vec<Complex64> {
        let (xi, eta) = (self.xi[i], self.eta[i]);
        let mut out = Vec::with_capacity(xi.len() * eta.len());
        for e in eta {
            out.extend(xi.iter().map(|x| x * e));
        }
        out
    }
}

/// Factorized dictionary: range sub-atoms over the `r'` bins and Doppler
/// sub-atoms over the speed bins. Memory is `O(I (Nr Ms + Nv Mc))`.
#[derive(Debug, Clone)]
pub struct FactorizedDictionary {
    cfg: RadarConfig,
    grid: ParamGrid,
    psi: Vec<Complex64>,
    psi_deriv: Vec<Complex64>,
    phi: Vec<Complex64>,
    phi_deriv: Vec<Complex64>,
}

impl FactorizedDictionary {
    pub fn build(cfg: &RadarConfig, grid: &ParamGrid) -> Result<Self> {
        cfg.validate()?;
        let rs = grid.range_scale();
        let vs = grid.speed_scale();
        let mut psi = Vec::with_capacity(grid.nr() * cfg.ms);
        let mut psi_deriv = Vec::with_capacity(grid.nr() * cfg.ms);
        for &r in grid.range_bins() {
            psi.extend(sub_atom_psi(cfg, r));
            psi_deriv.extend(sub_atom_psi_derivative(cfg, r).into_iter().map(|z| z * rs));
        }
        let mut phi = Vec::with_capacity(grid.nv() * cfg.mc);
        let mut phi_deriv = Vec::with_capacity(grid.nv() * cfg.mc);
        for &v in grid.speed_bins() {
            phi.extend(sub_atom_phi(cfg, v));
            phi_deriv.extend(sub_atom_phi_derivative(cfg, v).into_iter().map(|z| z * vs));
        }
        Ok(Self {
            cfg: *cfg,
            grid: grid.clone(),
            psi,
            psi_deriv,
            phi,
            phi_deriv,
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn ms(&self) -> usize {
        self.cfg.ms
    }

    pub fn mc(&self) -> usize {
        self.cfg.mc
    }

    /// `xi^(1)[nr] = psi(r_bar)`.
    pub fn range_atom(&self, nr: usize) -> &[Complex64] {
        let ms = self.cfg.ms;
        &self.psi[nr * ms..(nr + 1) * ms]
    }

    /// `xi^(2)[nr] = R~ psi'(r_bar)`.
    pub fn range_derivative(&self, nr: usize) -> &[Complex64] {
        let ms = self.cfg.ms;
        &self.psi_deriv[nr * ms..(nr + 1) * ms]
    }

    /// `eta^(1)[nv] = phi(v_bar)`.
    pub fn speed_atom(&self, nv: usize) -> &[Complex64] {
        let mc = self.cfg.mc;
        &self.phi[nv * mc..(nv + 1) * mc]
    }

    /// `eta^(3)[nv] = V~ phi'(v_bar)`.
    pub fn speed_derivative(&self, nv: usize) -> &[Complex64] {
        let mc = self.cfg.mc;
        &self.phi_deriv[nv * mc..(nv + 1) * mc]
    }

    pub fn factorized_interpolants(&self, nr: usize, nv: usize) -> Result<FactorizedInterpolants<'_>> {
        if nr >= self.grid.nr() {
            return Err(Error::IndexOutOfRange {
                index: nr,
                len: self.grid.nr(),
            });
        }
        if nv >= self.grid.nv() {
            return Err(Error::IndexOutOfRange {
                index: nv,
                len: self.grid.nv(),
            });
        }
        let (xi1, xi2) = (self.range_atom(nr), self.range_derivative(nr));
        let (eta1, eta3) = (self.speed_atom(nv), self.speed_derivative(nv));
        Ok(FactorizedInterpolants {
            xi: [xi1, xi2, xi1],
            eta: [eta1, eta1, eta3],
        })
    }

    /// View of the vectorized outer-product dictionary `vec(D^(i)[nr, nv])`
    /// indexed by `n = nv * Nr + nr`.
    pub fn vectorized(&self) -> VectorizedFactorized<'_> {
        VectorizedFactorized { dict: self }
    }
}

/// The factorized dictionary seen as an exact-path [`InterpolantBank`].
#[derive(Debug, Clone, Copy)]
pub struct VectorizedFactorized<'a> {
    dict: &'a FactorizedDictionary,
}

impl InterpolantBank for VectorizedFactorized<'_> {
    fn signal_len(&self) -> usize {
        self.dict.cfg.m()
    }

    fn node_count(&self) -> usize {
        self.dict.grid.len()
    }

    fn atom(&self, n: usize) -> Cow<'_, [Complex64]> {
        let (nr, nv) = self.dict.grid.split_index(n);
        let f = self.dict.factorized_interpolants(nr, nv).expect("node within grid");
        Cow::Owned(f.outer(0))
    }

    fn interpolants(&self, n: usize) -> [Vec<Complex64>; TAYLOR_INTERPOLANTS] {
        let (nr, nv) = self.dict.grid.split_index(n);
        let f = self.dict.factorized_interpolants(nr, nv).expect("node within grid");
        [f.outer(0), f.outer(1), f.outer(2)]
    }
}

/// Both dictionary forms over one grid. The exact form is optional because it
/// costs `O(M N)` memory.
#[derive(Debug, Clone)]
pub struct TaylorDictionary {
    factorized: FactorizedDictionary,
    exact: Option<ExactDictionary>,
}

impl TaylorDictionary {
    /// Factorized dictionary only.
    pub fn factorized(cfg: &RadarConfig, grid: &ParamGrid) -> Result<Self> {
        Ok(Self {
            factorized: FactorizedDictionary::build(cfg, grid)?,
            exact: None,
        })
    }

    /// Factorized and exact dictionaries.
    pub fn with_exact(cfg: &RadarConfig, grid: &ParamGrid) -> Result<Self> {
        Ok(Self {
            factorized: FactorizedDictionary::build(cfg, grid)?,
            exact: Some(ExactDictionary::build(cfg, grid)?),
        })
    }

    pub fn config(&self) -> &RadarConfig {
        self.factorized.config()
    }

    pub fn grid(&self) -> &ParamGrid {
        self.factorized.grid()
    }

    pub fn factorized_part(&self) -> &FactorizedDictionary {
        &self.factorized
    }

    pub fn exact_part(&self) -> Option<&ExactDictionary> {
        self.exact.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Normalization};
    use crate::linalg::inner;
    use crate::signal::factorized_atom;

    fn setup(ms: usize, mc: usize, nr: usize, nv: usize) -> (RadarConfig, ParamGrid) {
        let cfg = RadarConfig::k_band(ms, mc);
        let grid = build_grid(&cfg, nr, nv, Normalization::GridStep).unwrap();
        (cfg, grid)
    }

    #[test]
    fn first_interpolant_is_the_atom() {
        let (cfg, grid) = setup(8, 8, 12, 10);
        let dict = ExactDictionary::build(&cfg, &grid).unwrap();
        for n in [0, 7, 55, grid.len() - 1] {
            let (r, v) = grid.node(n).unwrap();
            assert_eq!(dict.atom(n).as_ref(), exact_atom(&cfg, r, v).as_slice());
            let d = dict.exact_interpolants(n).unwrap();
            assert_eq!(d[0], exact_atom(&cfg, r, v));
            assert_eq!(d[1][0], Complex64::new(0.0, 0.0));
            assert_eq!(d[2][0], Complex64::new(0.0, 0.0));
        }
        assert!(dict.exact_interpolants(grid.len()).is_err());
    }

    #[test]
    fn factorized_identities() {
        let (cfg, grid) = setup(8, 16, 16, 32);
        let dict = FactorizedDictionary::build(&cfg, &grid).unwrap();
        let f = dict.factorized_interpolants(3, 20).unwrap();
        assert_eq!(f.xi[0], f.xi[2]);
        assert_eq!(f.eta[0], f.eta[1]);
        assert_eq!(f.xi[1][0], Complex64::new(0.0, 0.0));
        assert_eq!(f.eta[2][0], Complex64::new(0.0, 0.0));
        // D^(1) is the factorized atom at (r', v) = node, i.e. r = r' - gamma v
        let (rb, vb) = (grid.range_bins()[3], grid.speed_bins()[20]);
        let a = factorized_atom(&cfg, rb - cfg.gamma() * vb, vb);
        for (x, y) in f.outer(0).iter().zip(a.as_slice()) {
            assert!((x - y).norm() < 1e-9);
        }
        assert!(dict.factorized_interpolants(16, 0).is_err());
        assert!(dict.factorized_interpolants(0, 32).is_err());
    }

    #[test]
    fn critical_grid_sub_atoms_are_orthogonal() {
        let (cfg, grid) = setup(16, 16, 16, 16);
        let dict = FactorizedDictionary::build(&cfg, &grid).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                let want = if a == b { 16.0 } else { 0.0 };
                let g_r = inner(dict.range_atom(a), dict.range_atom(b));
                let g_v = inner(dict.speed_atom(a), dict.speed_atom(b));
                assert!((g_r - want).norm() < 1e-9, "range gram ({a},{b}) = {g_r}");
                assert!((g_v - want).norm() < 1e-9, "speed gram ({a},{b}) = {g_v}");
            }
        }
    }

    #[test]
    fn vectorized_view_matches_outer_products() {
        let (cfg, grid) = setup(4, 8, 6, 5);
        let dict = FactorizedDictionary::build(&cfg, &grid).unwrap();
        let bank = dict.vectorized();
        assert_eq!(bank.node_count(), 30);
        assert_eq!(bank.signal_len(), 32);
        let n = grid.linear_index(4, 2);
        let d = bank.interpolants(n);
        let f = dict.factorized_interpolants(4, 2).unwrap();
        for i in 0..3 {
            assert_eq!(d[i], f.outer(i));
            for ms in 0..4 {
                for mc in 0..8 {
                    assert_eq!(d[i][mc * 4 + ms], f.xi[i][ms] * f.eta[i][mc]);
                }
            }
        }
    }
}
