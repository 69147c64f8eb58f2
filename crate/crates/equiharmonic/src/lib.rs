//! Curves of constrained-harmonic solutions for semilinear two-point
//! boundary value problems at resonance.
//!
//! The library solves
//!
//! ```text
//! u'' + G(u) = sum_{k in H} mu_k phi_k + e(x),   u(0) = u(L) = 0,
//! integral of u(x) phi_k(x) dx = xi_k            for every k in H,
//! ```
//!
//! where `phi_k(x) = sin(k pi x / L)` are the Dirichlet eigenfunctions, the
//! projections `xi_k` are prescribed, and the coefficients `mu_k` are part
//! of the unknown. Prescribing the projections turns the resonant boundary
//! value problem into a well-posed one: each Newton step linearizes the
//! equation and solves the constrained linear problem by shooting
//! (superposition of initial value problems plus a small dense system).
//! Sweeping `xi` yields the solution curve `mu(xi)` whose sign changes,
//! asymptotes, and crossing counts answer existence and multiplicity
//! questions for the original problem.
//!
//! # Example
//!
//! Trace a short piece of the solution curve of a built-in problem and
//! check one record independently:
//!
//! ```
//! use equiharmonic::*;
//!
//! let grid = Grid::new(std::f64::consts::PI, 128)?;
//! let problem = get_builtin_with_grid("fig3", grid)?;
//! let curve = trace_curve(&problem, 1, 0.0, 2.0, 0.5, &[], &SolverOptions::default())?;
//! assert_eq!(curve.records.len(), 5);
//!
//! let record = &curve.records[2];
//! assert!(record.converged);
//! assert!(verify_by_reintegration(record, &problem).passed);
//! # Ok::<(), equiharmonic::Error>(())
//! ```
//!
//! Modules:
//! - [`grid`]: uniform grid, grid functions, Simpson quadrature, sine basis.
//! - [`expr`]: expression parsing and dual-number derivatives for `G`, `e`.
//! - [`ivp`]: fixed-step RK4 for the second-order initial value problems.
//! - [`linear`]: the constrained linear solver and the spectral advisory.
//! - [`newton`]: problem definition and the Newton iteration.
//! - [`continuation`]: curve tracing, homotopy in `k`, root finding on a
//!   curve, and the multi-harmonic outer solve.
//! - [`problems`]: built-in problem library.
//! - [`verifier`]: independent verification by nonlinear reintegration.

pub mod continuation;
pub mod error;
pub mod expr;
pub mod grid;
pub mod harmonics;
pub mod ivp;
pub mod linear;
pub mod newton;
pub mod problems;
pub mod verifier;

pub use continuation::{
    find_signature_for_target, homotopy_in_k, solve_for_mu, trace_curve, CurveMetadata,
    HomotopyCurve, HomotopyPoint, OuterOptions, SolutionCurve,
};
pub use error::{Error, Result};
pub use expr::Expr;
pub use grid::{eigenpair, eigenvalue, harmonic_projection, integrate, Eigenpair, Grid, GridFunction};
pub use harmonics::{HarmonicSet, MuVector, Signature};
pub use ivp::{forcing_with_mu, integrate_linear, integrate_nonlinear, IvpSolution};
pub use linear::{check_spectral_condition, solve_constrained, LinearSolution, SpectralReport};
pub use newton::{
    cold_start_guess, equation_residual_sup, newton_solve, newton_solve_cold,
    projected_mu_identity, ProblemSpec, SolutionRecord, SolverOptions,
};
pub use problems::{builtin_info, builtin_names, get_builtin, get_builtin_with_grid, BuiltinProblem};
pub use verifier::{verify_by_reintegration, verify_initial_data, VerificationReport};
