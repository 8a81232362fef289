//! Ground-truth association, error metrics and the Monte-Carlo engine.

mod assignment;
mod metrics;
mod monte_carlo;

pub use assignment::hungarian;
pub use metrics::{associate, error_ek, error_matrix, is_miss, TrialMetrics};
pub use monte_carlo::{
    aggregate, derive_seed, point_setup, run_sweep, run_trial, run_trial_all, AggregateEntry,
    AggregateResult, RadarTemplate, SceneDistribution, SweepPoint, SweepSpec, TrialSetup,
};
