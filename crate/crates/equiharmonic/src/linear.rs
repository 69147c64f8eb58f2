//! Constrained linear solver: given `a(x)`, `f(x)` and target projections
//! `xi_k`, find `u` and coefficients `mu_k` with
//!
//! ```text
//! u'' + a(x) u = sum_{k in H} mu_k phi_k + f(x),   u(0) = u(L) = 0,
//! integral of u phi_k dx = xi_k   for every k in H.
//! ```
//!
//! The solve is by superposition of initial value problems: particular
//! solutions `Y_k` (unit `phi_k` forcing) and `Y_f` (forcing `f`) with zero
//! initial slope, plus the homogeneous solution `u_1` with unit slope. The
//! boundary condition at `L` and the projection constraints give a dense
//! `(m+1) x (m+1)` system in `(mu_{k_1}, ..., mu_{k_m}, c_1)`.

use crate::error::{Error, Result};
use crate::grid::{eigenpair, eigenvalue, harmonic_projection, GridFunction};
use crate::harmonics::{HarmonicSet, MuVector, Signature};
use crate::ivp::integrate_linear;
use crate::Expr;

/// Result of a constrained linear solve.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub u: GridFunction,
    pub uprime: GridFunction,
    /// Initial slope `u'(0)` of the combined solution.
    pub uprime0: f64,
    pub mu: MuVector,
    /// Coefficient of the homogeneous solution in the superposition.
    pub c1: f64,
    /// Ratio of largest to smallest pivot magnitude in the dense solve;
    /// a cheap conditioning proxy, always >= 1.
    pub condition_estimate: f64,
}

/// Dense linear solve by Gaussian elimination with partial pivoting.
///
/// Returns the solution and the pivot-ratio condition proxy. Fails with
/// `SingularSystem` when the smallest pivot drops below `1e-12` times the
/// largest.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty column");
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        let pivot = a[col][col];
        max_pivot = max_pivot.max(pivot.abs());
        min_pivot = min_pivot.min(pivot.abs());
        if pivot.abs() < 1e-12 * max_pivot || pivot == 0.0 {
            return Err(Error::SingularSystem {
                condition: if min_pivot > 0.0 {
                    max_pivot / min_pivot
                } else {
                    f64::INFINITY
                },
            });
        }

        let (pivot_rows, rest) = a.split_at_mut(col + 1);
        let pivot_row_values = &pivot_rows[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let factor = row[col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for (dst, src) in row[col..].iter_mut().zip(&pivot_row_values[col..]) {
                *dst -= factor * src;
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for c in row + 1..n {
            sum -= a[row][c] * x[c];
        }
        x[row] = sum / a[row][row];
    }
    let condition = max_pivot / min_pivot;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularSystem { condition });
    }
    Ok((x, condition))
}

pub fn solve_constrained(
    a: &GridFunction,
    f: &GridFunction,
    xi: &Signature,
) -> Result<LinearSolution> {
    solve_constrained_with_slopes(a, f, xi, 0.0)
}

/// Implementation with a configurable initial slope for the particular
/// solutions. Any value yields the same `(u, mu)` since the homogeneous
/// term absorbs slope; only `c1` differs. Exposed for tests.
pub(crate) fn solve_constrained_with_slopes(
    a: &GridFunction,
    f: &GridFunction,
    xi: &Signature,
    particular_slope: f64,
) -> Result<LinearSolution> {
    a.check_same_grid(f)?;
    let grid = a.grid();
    let h = xi.harmonics()?;
    let m = h.len();

    let mut particulars = Vec::with_capacity(m);
    for k in h.iter() {
        let phi = eigenpair(k, grid)?.eigenfunction;
        particulars.push(integrate_linear(a, &phi, 0.0, particular_slope)?);
    }
    let y_f = integrate_linear(a, f, 0.0, particular_slope)?;
    let homogeneous = integrate_linear(a, &GridFunction::zeros(grid), 0.0, 1.0)?;

    // Unknowns (mu_{k_1}, ..., mu_{k_m}, c_1).
    // Row 0: u(L) = 0. Rows 1..=m: projections onto phi_k equal xi_k.
    let dim = m + 1;
    let mut matrix = vec![vec![0.0; dim]; dim];
    let mut rhs = vec![0.0; dim];

    for (col, y) in particulars.iter().enumerate() {
        matrix[0][col] = y.u.boundary_value();
    }
    matrix[0][m] = homogeneous.u.boundary_value();
    rhs[0] = -y_f.u.boundary_value();

    for (row, k) in h.iter().enumerate() {
        for (col, y) in particulars.iter().enumerate() {
            matrix[row + 1][col] = harmonic_projection(&y.u, k)?;
        }
        matrix[row + 1][m] = harmonic_projection(&homogeneous.u, k)?;
        rhs[row + 1] = xi.get(k).expect("key in harmonics") - harmonic_projection(&y_f.u, k)?;
    }

    let (solution, condition_estimate) = solve_dense(matrix, rhs)?;
    let c1 = solution[m];

    let mut terms: Vec<(f64, &GridFunction)> = Vec::with_capacity(m + 2);
    let mut slope_terms: Vec<(f64, &GridFunction)> = Vec::with_capacity(m + 2);
    for (coeff, y) in solution[..m].iter().zip(&particulars) {
        terms.push((*coeff, &y.u));
        slope_terms.push((*coeff, &y.uprime));
    }
    terms.push((1.0, &y_f.u));
    slope_terms.push((1.0, &y_f.uprime));
    terms.push((c1, &homogeneous.u));
    slope_terms.push((c1, &homogeneous.uprime));
    let u = GridFunction::linear_combination(&terms)?;
    let uprime = GridFunction::linear_combination(&slope_terms)?;
    let uprime0 = uprime.value(0);

    let mu = MuVector::from_pairs(h.iter().zip(solution[..m].iter().copied()))?;
    Ok(LinearSolution {
        u,
        uprime,
        uprime0,
        mu,
        c1,
        condition_estimate,
    })
}

/// Advisory report on the uniqueness window `lambda_{i-1} < G'(u) < lambda_{n+1}`
/// for `i = min(H)`, `n = max(H)`.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub derivative_min: f64,
    pub derivative_max: f64,
    /// `lambda_{i-1}` when `i > 1`; no lower constraint at the principal harmonic.
    pub lambda_lower: Option<f64>,
    /// `lambda_{n+1}`.
    pub lambda_upper: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    /// Whether the harmonic set is a contiguous range; the uniqueness theory
    /// covers contiguous ranges only, other sets are outside proved theory.
    pub contiguous: bool,
    pub u_range: (f64, f64),
}

impl SpectralReport {
    pub fn passes(&self) -> bool {
        self.upper_ok && self.lower_ok
    }

    pub fn summary(&self) -> String {
        let window = match self.lambda_lower {
            Some(lo) => format!("({lo}, {})", self.lambda_upper),
            None => format!("(-inf, {})", self.lambda_upper),
        };
        let status = if self.passes() { "pass" } else { "WARN" };
        let extra = if self.contiguous {
            ""
        } else {
            "; non-contiguous harmonic set is outside proved theory"
        };
        format!(
            "{status}: G' in [{:.6}, {:.6}] vs window {window} on u in [{}, {}]{extra}",
            self.derivative_min, self.derivative_max, self.u_range.0, self.u_range.1
        )
    }
}

/// Sample `G'(u)` over `u_range` and compare with the spectral window of the
/// harmonic set. Advisory only: never blocks a solve.
pub fn check_spectral_condition(
    g: &Expr,
    h: &HarmonicSet,
    length: f64,
    u_range: (f64, f64),
) -> Result<SpectralReport> {
    const SAMPLES: usize = 10_000;
    let (lo, hi) = u_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "invalid u range [{lo}, {hi}]"
        )));
    }
    let mut dmin = f64::INFINITY;
    let mut dmax = f64::NEG_INFINITY;
    for i in 0..SAMPLES {
        let u = lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64;
        let (_, d) = g.eval_with_derivative(u)?;
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let lambda_upper = eigenvalue(h.max_index() + 1, length);
    let lambda_lower = (h.min_index() > 1).then(|| eigenvalue(h.min_index() - 1, length));
    Ok(SpectralReport {
        derivative_min: dmin,
        derivative_max: dmax,
        lambda_lower,
        lambda_upper,
        upper_ok: dmax < lambda_upper,
        lower_ok: lambda_lower.is_none_or(|lo| dmin > lo),
        contiguous: h.is_contiguous(),
        u_range,
    })
}
