//! Off-the-grid range/speed estimation for FMCW radar.
//!
//! The crate provides
//!
//! - the exact sampled signal model and its rank-1 factorized approximation
//!   ([`signal`]),
//! - separable grids and order-1 Taylor interpolated dictionaries in exact and
//!   factorized form ([`grid`], [`dictionary`]),
//! - four greedy estimators, OMP and F-OMP on the grid and COMP and F-COMP off
//!   the grid ([`solvers`]),
//! - error metrics, optimal ground-truth association and a seeded Monte-Carlo
//!   sweep engine ([`evaluation`]).
//!
//! ```
//! use fcomp_core::{build_grid, solve, synthesize, Algorithm, Normalization, RadarConfig,
//!     Scene, SolverOptions, SynthesisModel, TaylorDictionary, Target};
//! use num_complex::Complex64;
//!
//! let cfg = RadarConfig::k_band(16, 16);
//! let grid = build_grid(&cfg, 32, 32, Normalization::GridStep).unwrap();
//! let dict = TaylorDictionary::factorized(&cfg, &grid).unwrap();
//! let scene = Scene::new(vec![Target::new(4.1, 12.3, Complex64::new(1.0, 0.0))]);
//! let y = synthesize(&cfg, &scene, SynthesisModel::Exact, 0.0, 0).unwrap();
//! let report = solve(&y, &dict, &SolverOptions::new(1), Algorithm::FComp).unwrap();
//! assert_eq!(report.estimates.len(), 1);
//! ```

pub mod dictionary;
pub mod error;
pub mod evaluation;
pub mod grid;
pub mod linalg;
pub mod signal;
pub mod solvers;

pub use dictionary::{
    ExactDictionary, FactorizedDictionary, FactorizedInterpolants, InterpolantBank,
    TaylorDictionary, VectorizedFactorized, TAYLOR_INTERPOLANTS,
};
pub use error::{Error, Result};
pub use evaluation::{
    associate, error_ek, run_sweep, run_trial, AggregateEntry, AggregateResult, RadarTemplate,
    SceneDistribution, SweepPoint, SweepSpec, TrialMetrics, TrialSetup,
};
pub use grid::{build_grid, mapping_coefficients, Normalization, ParamGrid};
pub use signal::{
    distortion_theta, exact_atom, exact_atom_with_gradient, factorized_atom, sub_atom_phi,
    sub_atom_phi_derivative, sub_atom_psi, sub_atom_psi_derivative, synthesize, Measurement,
    RadarConfig, Scene, SynthesisModel, Target, SPEED_OF_LIGHT,
};
pub use solvers::{
    correct_offgrid, solve, Algorithm, Correction, CorrectionParams, Estimate, GridNode,
    IndexSelection, PickedAtom, SolverOptions, SolverReport,
};
