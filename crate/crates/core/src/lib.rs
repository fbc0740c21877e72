//! εq-norms, double-sparsity (DS) norms and their duals, proximal solvers for
//! the generalized sparse-group LASSO
//!
//! ```text
//! minimize  ‖y − Xβ‖₂² + λ Σ_g ( τ‖β_g‖₁ + (1−τ) w_g ‖β_g‖_{α_g} )
//! ```
//!
//! with duality-gap certificates, and closed-form error-bound calculators with
//! a Monte Carlo harness to check them.
//!
//! The runnable programs under `examples/` walk through each capability.

pub mod cli;
pub mod ds;
pub mod error;
pub mod linalg;
pub mod norms;
pub mod prox;
pub mod simulate;
pub mod solver;
pub mod theory;

pub use ds::{ds_dual_norm, ds_norm, ds_norm_via_dual_identity, mixed_norm, DsParams, GroupStructure, MixedOuter};
pub use error::{Error, Result};
pub use norms::{epsq_ball_boundary, epsq_decompose, epsq_dual_norm, epsq_norm, Decomposition, EpsQ};
pub use prox::{prox_ds, prox_group, ProxSettings};
pub use solver::{solve, solve_with, Problem, SolveOptions, SolveResult};
pub use theory::{
    case_specialization, kappa1, kappa2, l2_error_bound, lambda_recommendation, noise_dual_bound, DesignModel,
    L2Bound, SparsityLevel, SpecialCase, TheoryReport,
};
