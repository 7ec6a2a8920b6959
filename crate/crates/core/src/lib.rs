//! Budget dynamics of an average consumer with a fixed income.
//!
//! The budget `b(t)` obeys `db/dt = y0 - c(b)` (optionally with an interest
//! term), where the expenditure rate `c(b)` grows with the budget while solvent
//! and is pinned at the minimum `c0` in debt. The crate provides:
//!
//! - [`model`]: constants, expenditure rules, drift, regimes and equilibria;
//! - [`analytic`]: closed-form trajectories for each regime and their composition;
//! - [`numeric`]: fixed-step Euler/RK4 integration, the per-period recurrence and
//!   zero-crossing detection;
//! - [`scenario`]: phase portraits, sweeps and closed-form vs numerical validation.

pub mod analytic;
pub mod error;
pub mod model;
pub mod numeric;
pub mod scenario;

pub use analytic::{
    compose, solve_balanced, solve_debt, solve_deficit, solve_surplus, time_to_zero,
    AnalyticSolution, CompositeSolution, Segment,
};
pub use error::{ModelError, Result};
pub use model::{
    ExpenditureRule, FixedPoint, FixedPointReport, Model, ModelParams, Regime, Stability,
};
pub use numeric::{
    integrate, iterate_discrete, CrossingDirection, IntegratorConfig, Method, Sample,
    Trajectory, TrajectorySource, ZeroCrossing,
};
pub use scenario::{
    phase_portrait, sweep, validate, PortraitPoint, SweepOutput, SweepParam, SweepRow,
    SweepSpec, Tolerances, ValidationReport,
};
