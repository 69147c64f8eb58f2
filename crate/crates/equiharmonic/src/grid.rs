//! Uniform grid on `[0, L]`, grid functions, composite Simpson quadrature,
//! and the sine eigenbasis of the one-dimensional Dirichlet Laplacian.
//!
//! The grid stores `2N + 1` samples at spacing `L / (2N)`: the `N + 1` nodes
//! of the integrator step `h = L / N` and the `N` midpoints between them.
//! Keeping both lets the RK4 integrator read exact midpoint values of
//! coefficient functions while Simpson quadrature reuses the same samples.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Uniform grid on `[0, L]` with `N` integrator intervals and `2N + 1` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    n_intervals: usize,
}

impl Grid {
    /// Default number of integrator intervals.
    pub const DEFAULT_N: usize = 1024;

    pub fn new(length: f64, n_intervals: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n_intervals < 2 || !n_intervals.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_intervals must be an even integer >= 2, got {n_intervals}"
            )));
        }
        Ok(Grid {
            length,
            n_intervals,
        })
    }

    /// Grid on `[0, pi]` with the default resolution.
    pub fn standard() -> Self {
        Grid::new(PI, Self::DEFAULT_N).expect("default grid is valid")
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of RK4 steps `N`.
    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    /// Number of stored samples, `2N + 1`.
    pub fn n_samples(&self) -> usize {
        2 * self.n_intervals + 1
    }

    /// Integrator step `h = L / N`.
    pub fn step(&self) -> f64 {
        self.length / self.n_intervals as f64
    }

    /// Sample spacing `L / (2N)` (half the integrator step).
    pub fn spacing(&self) -> f64 {
        self.length / (2 * self.n_intervals) as f64
    }

    /// Coordinate of sample `j`, `x_j = j L / (2N)`.
    pub fn sample_x(&self, j: usize) -> f64 {
        j as f64 * self.length / (2 * self.n_intervals) as f64
    }

    /// Iterator over all sample coordinates.
    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples()).map(move |j| self.sample_x(j))
    }
}

/// A real-valued function sampled on every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(Error::SampleCountMismatch {
                got: values.len(),
                expected: grid.n_samples(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "grid function values".into(),
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.n_samples()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::from_values(grid, vec![c; grid.n_samples()])
    }

    /// Sample a closure at every grid point.
    pub fn sample(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(grid, grid.samples().map(f).collect())
    }

    /// Sample a fallible closure at every grid point.
    pub fn try_sample(grid: Grid, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.samples().map(f).collect::<Result<Vec<_>>>()?;
        Self::from_values(grid, values)
    }

    /// Apply a fallible scalar map to the values of an existing function.
    pub fn try_sample_from(
        source: &GridFunction,
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<GridFunction> {
        let values = source
            .values
            .iter()
            .map(|&v| f(v))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::from_values(source.grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Value at the right endpoint `x = L`.
    pub fn boundary_value(&self) -> f64 {
        *self.values.last().expect("grid functions are non-empty")
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        let sq = GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * v).collect(),
        };
        integrate(&sq).max(0.0).sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul_pointwise(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    /// Sup-norm of the pointwise difference.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `sum_i coeff_i * f_i` over functions on one grid.
    pub fn linear_combination(terms: &[(f64, &GridFunction)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let grid = first.1.grid;
        let mut values = vec![0.0; grid.n_samples()];
        for (c, f) in terms {
            f.check_same_grid(first.1)?;
            for (acc, v) in values.iter_mut().zip(&f.values) {
                *acc += c * v;
            }
        }
        GridFunction::from_values(grid, values)
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "L = {} / N = {} vs L = {} / N = {}",
                self.grid.length,
                self.grid.n_intervals,
                other.grid.length,
                other.grid.n_intervals
            )));
        }
        Ok(())
    }
}

/// Eigenpair of `-u'' = lambda u`, `u(0) = u(L) = 0`: `lambda_k = (k pi / L)^2`
/// with the unnormalized eigenfunction `phi_k(x) = sin(k pi x / L)`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub index: usize,
    pub eigenvalue: f64,
    pub eigenfunction: GridFunction,
}

/// `lambda_k = (k pi / L)^2`.
pub fn eigenvalue(k: usize, length: f64) -> f64 {
    let w = k as f64 * PI / length;
    w * w
}

/// Eigenpair `(lambda_k, phi_k)` sampled on the grid.
///
/// The eigenfunction argument is reduced modulo the period before calling
/// `sin`, so samples at integer multiples of the half period (in particular
/// both endpoints) are exactly zero.
pub fn eigenpair(k: usize, grid: Grid) -> Result<Eigenpair> {
    if k == 0 {
        return Err(Error::InvalidHarmonics("harmonic index must be >= 1".into()));
    }
    let two_n = 2 * grid.n_intervals();
    let mut values = Vec::with_capacity(grid.n_samples());
    for j in 0..grid.n_samples() {
        // phi_k(x_j) = sin(pi * k * j / (2N)); one period is 4N units of k*j.
        let r = (k * j) % (4 * grid.n_intervals());
        if r.is_multiple_of(two_n) {
            values.push(0.0);
        } else {
            values.push((PI * r as f64 / two_n as f64).sin());
        }
    }
    Ok(Eigenpair {
        index: k,
        eigenvalue: eigenvalue(k, grid.length()),
        eigenfunction: GridFunction::from_values(grid, values)?,
    })
}

/// Composite Simpson quadrature over all `2N + 1` samples; `O(h^4)` for
/// smooth integrands and exact for cubics.
pub fn integrate(f: &GridFunction) -> f64 {
    let values = f.values();
    let n = values.len();
    let mut odd = 0.0;
    let mut even = 0.0;
    for (j, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if j % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even) * f.grid().spacing() / 3.0
}

/// `integral of u(x) sin(k pi x / L) dx` over `[0, L]`.
pub fn harmonic_projection(u: &GridFunction, k: usize) -> Result<f64> {
    let phi = eigenpair(k, u.grid())?.eigenfunction;
    Ok(integrate(&u.mul_pointwise(&phi)?))
}
