//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line. Run with `--nocapture` to see the lines:
//!
//! ```text
//! cargo test -p equiharmonic --test acceptance -- --nocapture
//! ```

use equiharmonic::*;
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const DXI: f64 = 0.5;

struct TracedCurve {
    curve: SolutionCurve,
    elapsed: Duration,
}

fn trace(name: &str, lo: f64, hi: f64, dxi: f64) -> TracedCurve {
    let problem = get_builtin(name).unwrap_or_else(|e| panic!("problem {name}: {e}"));
    let start = Instant::now();
    let curve = trace_curve(&problem, 1, lo, hi, dxi, &[], &SolverOptions::default())
        .unwrap_or_else(|e| panic!("trace of {name} failed: {e}"));
    TracedCurve {
        curve,
        elapsed: start.elapsed(),
    }
}

static FIG3: Lazy<TracedCurve> = Lazy::new(|| trace("fig3", -50.0, 50.0, DXI));
static FIG3_HALVED: Lazy<TracedCurve> = Lazy::new(|| trace("fig3", -50.0, 50.0, DXI / 2.0));
static FIG2: Lazy<TracedCurve> = Lazy::new(|| trace("fig2", -60.0, 60.0, DXI));
static FIG1: Lazy<TracedCurve> = Lazy::new(|| trace("fig1", -40.0, 40.0, DXI));
static HIGHER_EV: Lazy<SolutionRecord> = Lazy::new(|| {
    let problem = get_builtin("higher-ev").unwrap();
    let target = MuVector::from_pairs([(1, 1.0), (2, 0.0)]).unwrap();
    find_signature_for_target(&problem, &target, &OuterOptions::default())
        .unwrap_or_else(|e| panic!("higher-ev outer solve failed: {e}"))
});

type CheckResult = std::result::Result<(), String>;

/// Run one criterion, print its pass/fail line, and fail the test on error.
fn criterion(name: &str, body: impl FnOnce() -> CheckResult) {
    match body() {
        Ok(()) => println!("acceptance {name}: PASS"),
        Err(message) => {
            println!("acceptance {name}: FAIL ({message})");
            panic!("acceptance criterion `{name}` failed: {message}");
        }
    }
}

fn check(ok: bool, message: String) -> CheckResult {
    if ok {
        Ok(())
    } else {
        Err(message)
    }
}

fn mu_at(traced: &TracedCurve, xi: f64) -> f64 {
    let rec = traced
        .curve
        .records
        .iter()
        .find(|r| (traced.curve.free_xi(r) - xi).abs() < 1e-9)
        .unwrap_or_else(|| panic!("no record at xi = {xi}"));
    rec.mu.get(1).unwrap()
}

/// The curve of the bounded monotone problem reaches the sine averages
/// +-4/pi of the nonlinearity's limits at infinity.
#[test]
fn landesman_lazer_asymptote() {
    criterion("landesman-lazer asymptote", || {
        let limit = 4.0 / PI;
        let hi = mu_at(&FIG3, 50.0);
        let lo = mu_at(&FIG3, -50.0);
        check(
            (hi - limit).abs() <= 0.05,
            format!("mu(50) = {hi}, limit {limit}"),
        )?;
        check(
            (lo + limit).abs() <= 0.05,
            format!("mu(-50) = {lo}, limit {}", -limit),
        )?;
        check(
            FIG3.elapsed < Duration::from_secs(60),
            format!("trace took {:?}, budget 60 s", FIG3.elapsed),
        )?;
        check(FIG3.curve.records.len() == 201, format!("{} records", FIG3.curve.records.len()))
    });
}

/// A strictly increasing nonlinearity derivative gives a strictly
/// increasing solution curve.
#[test]
fn monotone_curve() {
    criterion("monotone curve", || {
        let samples = FIG3.curve.xi_mu_samples();
        for pair in samples.windows(2) {
            let ((xa, ma), (xb, mb)) = (pair[0], pair[1]);
            check(
                mb - ma > 0.0,
                format!("mu not increasing between xi = {xa} ({ma}) and xi = {xb} ({mb})"),
            )?;
        }
        Ok(())
    });
}

/// Odd nonlinearity plus a forcing that is odd about the midpoint: the
/// reflection u -> -u(L - x) maps solutions to solutions, so
/// mu(-xi) = -mu(xi) at mirrored mesh points.
#[test]
fn odd_symmetry() {
    criterion("odd symmetry", || {
        let records = &FIG3.curve.records;
        let n = records.len();
        for i in 0..n {
            let a = &records[i];
            let b = &records[n - 1 - i];
            let defect = (a.mu.get(1).unwrap() + b.mu.get(1).unwrap()).abs();
            check(
                defect <= 1e-6,
                format!(
                    "|mu({}) + mu({})| = {defect:.3e}",
                    FIG3.curve.free_xi(a),
                    FIG3.curve.free_xi(b)
                ),
            )?;
        }
        Ok(())
    });
}

/// Vanishing bounded nonlinearity: two solutions inside the window,
/// none outside, and the curve decays at both ends.
#[test]
fn multiplicity_window() {
    criterion("multiplicity window", || {
        let problem = get_builtin("fig2").unwrap();
        let opts = SolverOptions::default();
        let two = solve_for_mu(&problem, &FIG2.curve, -0.4, &opts)
            .map_err(|e| e.to_string())?;
        check(two.len() == 2, format!("mu = -0.4: {} solutions", two.len()))?;
        let none = solve_for_mu(&problem, &FIG2.curve, 1.0, &opts)
            .map_err(|e| e.to_string())?;
        check(none.is_empty(), format!("mu = 1.0: {} solutions", none.len()))?;

        let tail_hi = mu_at(&FIG2, 60.0);
        let tail_lo = mu_at(&FIG2, -60.0);
        check(tail_hi.abs() <= 0.05, format!("mu(60) = {tail_hi}"))?;
        check(tail_lo.abs() <= 0.05, format!("mu(-60) = {tail_lo}"))?;

        let mus: Vec<f64> = FIG2.curve.xi_mu_samples().iter().map(|s| s.1).collect();
        let max = mus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = mus.iter().cloned().fold(f64::INFINITY, f64::min);
        check(max > 0.0, format!("interior maximum {max}"))?;
        check(min < 0.0, format!("interior minimum {min}"))
    });
}

/// Sign-definite unbounded perturbation: mu changes sign across the range,
/// so the resonant problem (mu = 0) is solvable.
#[test]
fn resonant_solvability() {
    criterion("resonant solvability", || {
        let hi = mu_at(&FIG1, 40.0);
        let lo = mu_at(&FIG1, -40.0);
        check(hi > 0.0, format!("mu(40) = {hi}"))?;
        check(lo < 0.0, format!("mu(-40) = {lo}"))?;
        let problem = get_builtin("fig1").unwrap();
        let roots = solve_for_mu(&problem, &FIG1.curve, 0.0, &SolverOptions::default())
            .map_err(|e| e.to_string())?;
        check(!roots.is_empty(), "no solution at mu = 0".into())
    });
}

/// Resonance at the second eigenvalue: the two-harmonic outer solve hits
/// the target coefficients and the result verifies by reintegration.
#[test]
fn higher_eigenvalue_resonance() {
    criterion("higher-eigenvalue resonance", || {
        let rec = &*HIGHER_EV;
        check(rec.converged, "record not converged".into())?;
        let mu2 = rec.mu.get(2).unwrap();
        check(mu2.abs() <= 1e-7, format!("|mu_2| = {:.3e}", mu2.abs()))?;
        let problem = get_builtin("higher-ev").unwrap();
        let report = verify_by_reintegration(rec, &problem);
        check(report.passed, format!("verification report: {report:?}"))
    });
}

/// The constrained linear solver reproduces both closed forms: the zero
/// coefficient case and the resonant constant coefficient case.
#[test]
fn linear_solver_closed_forms() {
    criterion("linear-solver closed forms", || {
        let grid = Grid::standard();

        let a = GridFunction::zeros(grid);
        let f = GridFunction::zeros(grid);
        let xi = Signature::single(1, 1.0).unwrap();
        let sol = solve_constrained(&a, &f, &xi).map_err(|e| e.to_string())?;
        let mu_err = (sol.mu.get(1).unwrap() + 2.0 / PI).abs();
        check(mu_err <= 1e-7, format!("zero-coefficient mu error {mu_err:.3e}"))?;
        let exact = GridFunction::sample(grid, |x| 2.0 / PI * x.sin()).unwrap();
        let u_err = sol.u.sup_distance(&exact).unwrap();
        check(u_err <= 1e-7, format!("zero-coefficient u error {u_err:.3e}"))?;

        let a = GridFunction::constant(grid, 1.0).unwrap();
        let f = GridFunction::sample(grid, |x| (2.0 * x).sin()).unwrap();
        let xi = Signature::single(1, PI / 2.0).unwrap();
        let sol = solve_constrained(&a, &f, &xi).map_err(|e| e.to_string())?;
        let mu_err = sol.mu.get(1).unwrap().abs();
        check(mu_err <= 1e-7, format!("resonant mu error {mu_err:.3e}"))?;
        let exact =
            GridFunction::sample(grid, |x| x.sin() - (2.0 * x).sin() / 3.0).unwrap();
        let u_err = sol.u.sup_distance(&exact).unwrap();
        check(u_err <= 1e-7, format!("resonant u error {u_err:.3e}"))
    });
}

/// Measured convergence orders of the RK4 endpoint error and the Simpson
/// quadrature error across N in {64, 128, 256}.
#[test]
fn convergence_orders() {
    criterion("convergence orders", || {
        let rk4_err = |n: usize| {
            let grid = Grid::new(PI, n).unwrap();
            let one = GridFunction::constant(grid, 1.0).unwrap();
            let zero = GridFunction::zeros(grid);
            integrate_linear(&one, &zero, 0.0, 1.0)
                .unwrap()
                .u
                .boundary_value()
                .abs()
        };
        let simpson_err = |n: usize| {
            let grid = Grid::new(PI, n).unwrap();
            let f = GridFunction::sample(grid, |x| x.exp()).unwrap();
            (integrate(&f) - (PI.exp() - 1.0)).abs()
        };
        for (label, err) in [
            ("rk4", &rk4_err as &dyn Fn(usize) -> f64),
            ("simpson", &simpson_err),
        ] {
            for n in [64usize, 128] {
                let order = (err(n) / err(2 * n)).log2();
                check(
                    order >= 3.8,
                    format!("{label} order {order:.2} from N = {n} to {}", 2 * n),
                )?;
            }
        }
        Ok(())
    });
}

/// Every record of every curve above passes the independent reintegration
/// check, and small equation residuals imply small reintegration defects.
#[test]
fn reintegration_verification() {
    criterion("reintegration verification", || {
        let curves = [
            ("fig3", &*FIG3),
            ("fig2", &*FIG2),
            ("fig1", &*FIG1),
        ];
        for (name, traced) in curves {
            let problem = get_builtin(name).unwrap();
            for rec in &traced.curve.records {
                let report = verify_by_reintegration(rec, &problem);
                check(
                    report.passed,
                    format!(
                        "{name} xi = {}: boundary defect {:.3e}, signature defects {:?}",
                        traced.curve.free_xi(rec),
                        report.boundary_defect,
                        report.signature_defects
                    ),
                )?;
                if rec.residual_sup <= 1e-6 {
                    check(
                        report.boundary_defect <= 1e-5 * (1.0 + rec.sup_norm_u()),
                        format!(
                            "{name} xi = {}: residual {:.3e} but boundary defect {:.3e}",
                            traced.curve.free_xi(rec),
                            rec.residual_sup,
                            report.boundary_defect
                        ),
                    )?;
                }
            }
        }
        let problem = get_builtin("higher-ev").unwrap();
        let report = verify_by_reintegration(&HIGHER_EV, &problem);
        check(report.passed, format!("higher-ev: {report:?}"))
    });
}

/// The solution at a fixed signature is unique: Newton lands on it from
/// five unrelated guesses, a homotopy in k ends on the direct solve, and
/// halving the trace step changes nothing at shared mesh points.
#[test]
fn uniqueness_and_path_independence() {
    criterion("uniqueness and path independence", || {
        let problem = get_builtin("fig3").unwrap();
        let opts = SolverOptions::default();
        let grid = problem.grid();
        let xi = Signature::single(1, 3.0).unwrap();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let coeffs: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let random_smooth = GridFunction::sample(grid, |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * x).sin())
                .sum()
        })
        .unwrap();
        let from_curve = FIG3
            .curve
            .nearest_record(2.5)
            .expect("curve has records")
            .u
            .clone();

        let guesses = [
            GridFunction::zeros(grid),
            GridFunction::constant(grid, 50.0).unwrap(),
            GridFunction::constant(grid, -50.0).unwrap(),
            random_smooth,
            from_curve,
        ];
        let reference = newton_solve(&problem, &xi, &guesses[0], &opts)
            .map_err(|e| e.to_string())?;
        check(reference.converged, "reference solve not converged".into())?;
        for (i, guess) in guesses.iter().enumerate() {
            let rec = newton_solve(&problem, &xi, guess, &opts).map_err(|e| e.to_string())?;
            check(rec.converged, format!("guess {i} not converged"))?;
            let du = rec.u.sup_distance(&reference.u).unwrap();
            let dmu = (rec.mu.get(1).unwrap() - reference.mu.get(1).unwrap()).abs();
            check(
                du <= 1e-6 && dmu <= 1e-6,
                format!("guess {i}: |du| = {du:.3e}, |dmu| = {dmu:.3e}"),
            )?;
        }

        // Homotopy in k against the direct solve of the full problem.
        let base = ProblemSpec::from_sources(
            "homotopy-demo",
            grid,
            "0*u",
            "sin(2*x)",
            HarmonicSet::single(1).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let g0 = Expr::parse("0*u", "u").unwrap();
        let g1 = Expr::parse("u/sqrt(u^2+1)", "u").unwrap();
        let xi_h = Signature::single(1, PI / 2.0).unwrap();
        let homotopy = homotopy_in_k(&base, &g0, &g1, &xi_h, 0.0, 1.0, 0.1, &opts)
            .map_err(|e| e.to_string())?;
        let direct = newton_solve_cold(
            &base
                .with_nonlinearity(g0.plus_scaled(1.0, &g1).unwrap())
                .unwrap(),
            &xi_h,
            &opts,
        )
        .map_err(|e| e.to_string())?;
        let end = homotopy.endpoint();
        let du = end.u.sup_distance(&direct.u).unwrap();
        let dmu = (end.mu.get(1).unwrap() - direct.mu.get(1).unwrap()).abs();
        check(
            du <= 1e-7 && dmu <= 1e-7,
            format!("homotopy endpoint: |du| = {du:.3e}, |dmu| = {dmu:.3e}"),
        )?;

        // Step-size independence at shared mesh points.
        for rec in &FIG3.curve.records {
            let xi_v = FIG3.curve.free_xi(rec);
            let halved = FIG3_HALVED
                .curve
                .records
                .iter()
                .find(|r| (FIG3_HALVED.curve.free_xi(r) - xi_v).abs() < 1e-9)
                .ok_or_else(|| format!("halved curve missing xi = {xi_v}"))?;
            let dmu = (rec.mu.get(1).unwrap() - halved.mu.get(1).unwrap()).abs();
            check(
                dmu <= 1e-6,
                format!("step halving changed mu by {dmu:.3e} at xi = {xi_v}"),
            )?;
        }
        Ok(())
    });
}
