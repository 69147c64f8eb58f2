//! Fixed-step classical RK4 for second-order initial value problems
//! `u'' = F(x, u)` on the grid, recording `u` and `u'` at all `2N + 1`
//! samples.
//!
//! The march runs over the `N` integrator steps `h = L / N`; the stage
//! values at `x + h/2` read the stored midpoint samples of the coefficient
//! functions exactly. Each midpoint of the solution is then filled by one
//! extra RK4 half-step from the preceding node. The half-step needs
//! coefficient values at quarter points, which are off the sample grid;
//! they are obtained by fourth-order cubic interpolation, which keeps the
//! filled values at the accuracy of the march.

use crate::error::{Error, Result};
use crate::grid::{eigenpair, Grid, GridFunction};
use crate::harmonics::MuVector;
use crate::Expr;

/// Solution of a second-order IVP recorded on the grid.
#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub u: GridFunction,
    pub uprime: GridFunction,
    pub u0: f64,
    pub up0: f64,
}

/// Coefficient values interpolated at the quarter points `x_{2i} + h/4`,
/// one per integrator interval. Fourth-order 4-point stencils.
fn quarter_values(f: &GridFunction) -> Vec<f64> {
    let v = f.values();
    let n = f.grid().n_intervals();
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let j = 2 * i;
        let value = if j == 0 {
            (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0
        } else {
            (-v[j - 1] + 9.0 * v[j] + 9.0 * v[j + 1] - v[j + 2]) / 16.0
        };
        q.push(value);
    }
    q
}

#[derive(Clone, Copy)]
struct State {
    u: f64,
    v: f64,
}

impl State {
    fn advance(self, dt: f64, k: State) -> State {
        State {
            u: self.u + dt * k.u,
            v: self.v + dt * k.v,
        }
    }

    fn rk4_combine(self, dt: f64, k1: State, k2: State, k3: State, k4: State) -> State {
        State {
            u: self.u + dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            v: self.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
        }
    }

    fn finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Shared march: `accel(slot, u)` returns `u''` where `slot` indexes the
/// precomputed coefficient table (samples `0..2N`, then quarters `2N+1..`).
fn rk4_march<F>(grid: Grid, u0: f64, up0: f64, mut accel: F) -> Result<IvpSolution>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let n = grid.n_intervals();
    let h = grid.step();
    let quarter_slot = |i: usize| grid.n_samples() + i;

    let mut u = vec![0.0; grid.n_samples()];
    let mut v = vec![0.0; grid.n_samples()];
    let mut y = State { u: u0, v: up0 };
    u[0] = u0;
    v[0] = up0;

    for i in 0..n {
        let j = 2 * i;
        let f = |slot: usize, s: State, accel: &mut F| -> Result<State> {
            Ok(State {
                u: s.v,
                v: accel(slot, s.u)?,
            })
        };

        // Full step h over [x_j, x_{j+2}]; midpoint coefficients are exact samples.
        let k1 = f(j, y, &mut accel)?;
        let k2 = f(j + 1, y.advance(0.5 * h, k1), &mut accel)?;
        let k3 = f(j + 1, y.advance(0.5 * h, k2), &mut accel)?;
        let k4 = f(j + 2, y.advance(h, k3), &mut accel)?;
        let y_next = y.rk4_combine(h, k1, k2, k3, k4);

        // Half step h/2 from x_j fills the midpoint sample x_{j+1}.
        let tau = 0.5 * h;
        let q1 = k1;
        let q2 = f(quarter_slot(i), y.advance(0.5 * tau, q1), &mut accel)?;
        let q3 = f(quarter_slot(i), y.advance(0.5 * tau, q2), &mut accel)?;
        let q4 = f(j + 1, y.advance(tau, q3), &mut accel)?;
        let y_mid = y.rk4_combine(tau, q1, q2, q3, q4);

        if !y_next.finite() || !y_mid.finite() {
            return Err(Error::Overflow {
                step: i,
                x: grid.sample_x(j),
            });
        }

        u[j + 1] = y_mid.u;
        v[j + 1] = y_mid.v;
        u[j + 2] = y_next.u;
        v[j + 2] = y_next.v;
        y = y_next;
    }

    Ok(IvpSolution {
        u: GridFunction::from_values(grid, u)?,
        uprime: GridFunction::from_values(grid, v)?,
        u0,
        up0,
    })
}

/// Solve `u'' + a(x) u = rhs(x)`, `u(0) = u0`, `u'(0) = up0`.
pub fn integrate_linear(
    a: &GridFunction,
    rhs: &GridFunction,
    u0: f64,
    up0: f64,
) -> Result<IvpSolution> {
    a.check_same_grid(rhs)?;
    let grid = a.grid();
    let n_samples = grid.n_samples();
    let (qa, qr) = (quarter_values(a), quarter_values(rhs));
    rk4_march(grid, u0, up0, |slot, u| {
        let (av, rv) = if slot < n_samples {
            (a.value(slot), rhs.value(slot))
        } else {
            (qa[slot - n_samples], qr[slot - n_samples])
        };
        Ok(rv - av * u)
    })
}

/// Total right-hand side `sum_k mu_k phi_k + e` on the grid.
pub fn forcing_with_mu(e: &GridFunction, mu: &MuVector) -> Result<GridFunction> {
    let mut total = e.clone();
    for (k, mu_k) in mu.iter() {
        let phi = eigenpair(k, e.grid())?.eigenfunction;
        total = total.add(&phi.scaled(mu_k))?;
    }
    Ok(total)
}

/// Solve `u'' = sum_k mu_k phi_k + e(x) - G(u)`, `u(0) = u0`, `u'(0) = up0`.
pub fn integrate_nonlinear(
    g: &Expr,
    e: &GridFunction,
    mu: &MuVector,
    u0: f64,
    up0: f64,
) -> Result<IvpSolution> {
    let grid = e.grid();
    let n_samples = grid.n_samples();
    let forcing = forcing_with_mu(e, mu)?;
    let qf = quarter_values(&forcing);
    rk4_march(grid, u0, up0, |slot, u| {
        let fv = if slot < n_samples {
            forcing.value(slot)
        } else {
            qf[slot - n_samples]
        };
        Ok(fv - g.eval(u)?)
    })
}
