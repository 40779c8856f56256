//! Exact linear programming and constraint generation.

pub mod engine;
pub mod simplex;

pub use engine::{
    optimize_linear, solve_max_eps, ConstraintRecord, EngineOptions, LpResult, RecordKind, SeparationOracle,
    TraceLine,
};
pub use simplex::{exact_lp_solve, ExactLp, LinearRow, LpSolution, LpStatus, Relation, Sense};
