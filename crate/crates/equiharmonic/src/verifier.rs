//! Independent verification of computed solutions: reintegrate the full
//! nonlinear equation as an initial value problem from `u(0) = 0` and the
//! record's `u'(0)`, then check the far boundary and the signature.
//!
//! The reintegration shares nothing with the constrained solve but the RK4
//! kernel: it uses only the record's initial slope and coefficients, so a
//! wrong `(u, mu)` pair cannot pass by construction.

use crate::error::Result;
use crate::grid::{harmonic_projection, GridFunction};
use crate::harmonics::{MuVector, Signature};
use crate::ivp::integrate_nonlinear;
use crate::newton::{ProblemSpec, SolutionRecord};
use std::collections::BTreeMap;

/// Relative verification tolerance. Looser than the solver tolerances since
/// the reintegration accumulates its own discretization error.
pub const VERIFY_TOL: f64 = 1e-5;

/// Outcome of a reintegration check.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// `|v(L)|` of the reintegrated solution.
    pub boundary_defect: f64,
    /// `max_j |v(x_j) - u(x_j)|` when the record's samples are available.
    pub max_pointwise_deviation: Option<f64>,
    /// `|integral of v phi_k - xi_k|` per constrained harmonic.
    pub signature_defects: BTreeMap<usize, f64>,
    /// Sup norm of the stored solution, the scale of the pass thresholds.
    pub sup_norm_u: f64,
    pub passed: bool,
    /// Set when the reintegration itself failed (overflow, domain error).
    pub failure: Option<String>,
}

impl VerificationReport {
    fn failed(sup_norm_u: f64, reason: String) -> Self {
        VerificationReport {
            boundary_defect: f64::INFINITY,
            max_pointwise_deviation: None,
            signature_defects: BTreeMap::new(),
            sup_norm_u,
            passed: false,
            failure: Some(reason),
        }
    }
}

/// Verify a record against its problem by nonlinear reintegration.
pub fn verify_by_reintegration(record: &SolutionRecord, problem: &ProblemSpec) -> VerificationReport {
    verify_initial_data(
        problem,
        &record.xi,
        &record.mu,
        record.uprime0,
        record.sup_norm_u(),
        Some(&record.u),
    )
}

/// Reintegration check from stored scalars only: `(xi, mu, u'(0), ||u||)`.
/// Used when the full sample vector was not persisted.
pub fn verify_initial_data(
    problem: &ProblemSpec,
    xi: &Signature,
    mu: &MuVector,
    uprime0: f64,
    sup_norm_u: f64,
    u: Option<&GridFunction>,
) -> VerificationReport {
    let v = match integrate_nonlinear(problem.nonlinearity(), problem.forcing(), mu, 0.0, uprime0)
    {
        Ok(sol) => sol,
        Err(e) => return VerificationReport::failed(sup_norm_u, e.to_string()),
    };

    let boundary_defect = v.u.boundary_value().abs();
    let max_pointwise_deviation = u.and_then(|u| v.u.sup_distance(u).ok());

    let signature_defects: Result<BTreeMap<usize, f64>> = xi
        .iter()
        .map(|(k, want)| Ok((k, (harmonic_projection(&v.u, k)? - want).abs())))
        .collect();
    let signature_defects = match signature_defects {
        Ok(d) => d,
        Err(e) => return VerificationReport::failed(sup_norm_u, e.to_string()),
    };

    let boundary_ok = boundary_defect <= VERIFY_TOL * (1.0 + sup_norm_u);
    let signature_ok = xi
        .iter()
        .all(|(k, want)| signature_defects[&k] <= VERIFY_TOL * (1.0 + want.abs()));

    VerificationReport {
        boundary_defect,
        max_pointwise_deviation,
        signature_defects,
        sup_norm_u,
        passed: boundary_ok && signature_ok,
        failure: None,
    }
}
