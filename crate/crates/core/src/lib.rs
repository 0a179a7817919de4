//! Sparse recovery by iterative soft/hard thresholding with homotopy
//! continuation (ISTC/IHTC).
//!
//! The crate provides sensing operators ([`linop`]), the thresholding maps
//! ([`thresholding`]), the continuation and baseline solvers with their
//! convergence-theory helpers ([`solver`]), BIC path selection
//! ([`modelselect`]), seeded problem generators ([`probgen`]), recovery metrics
//! ([`metrics`]) and the experiment drivers ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod linop;
pub mod metrics;
pub mod modelselect;
pub mod probgen;
pub mod seed;
pub mod solver;
pub mod thresholding;

pub use error::{Error, Result};
pub use linop::{mutual_coherence, CoherenceReport, DenseMatrix, MatvecCounter, SensingOperator};
pub use metrics::{psnr, reconstruction_metrics, Metrics};
pub use modelselect::{bic_score, run_full_path, select, select_bic, BicScore, BicSelection, Criterion};
pub use probgen::{gen_problem, MatrixKind, Problem, ProblemSpec, SignalKind};
pub use solver::{
    baseline_solve, continuation_solve, gamma_lower_bound, inner_iterate, lambda_star,
    theoretical_error_bound, Lambda0, LambdaStar, PathResult, SolverConfig, StopReason,
    TheoryParams,
};
pub use thresholding::{hard_threshold, soft_threshold, threshold_vector, Penalty};
