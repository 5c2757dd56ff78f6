//! Green's-operator eigensolvers for bound-state coupling constants.
//!
//! For a Hamiltonian `T − λV` and a fixed energy `ε` below the spectrum of
//! `T`, the coupling constant `λ` that makes `ε` an eigenvalue solves
//! `|u⟩ = λ G_ε V |u⟩` with `G_ε = (T − ε)⁻¹`. This crate computes `λ(ε)`
//! with the original power-type iteration and with a 2×2 subspace variant,
//! sweeps it over ε grids, inverts the curve by interpolation and flags
//! sweep points that break the smooth trend.
//!
//! ```
//! use waxman::{green::make_green, model::fixture, solver::{modified_solve, SolverConfig}};
//!
//! let problem = fixture("identityV").unwrap();
//! let g = make_green(&problem, 1.0).unwrap();
//! let report = modified_solve(&g, &SolverConfig::default()).unwrap();
//! assert!((report.lambda_final - 1.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod green;
pub mod io;
pub mod linalg;
pub mod model;
pub mod solver;
pub mod sweep;

pub use green::{make_green, Branch, GreenError, GreenOperator, SymmetricOperator};
pub use linalg::{SymMatrix, Vector};
pub use model::{fixture, generate, ModelProblem, ModelSpec};
pub use solver::{
    modified_solve, power_solve, power_solve_ref, ConvergenceReport, Scheme, SolveError,
    SolverConfig, Status,
};
