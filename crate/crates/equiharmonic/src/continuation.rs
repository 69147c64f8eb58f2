//! Continuation machinery: trace `mu(xi)` curves over a signature range,
//! continue in the homotopy parameter `k` at fixed signature, locate
//! `mu(xi) = mu*` on a traced curve, and solve the multi-harmonic outer
//! problem `mu(xi) = target`.

use crate::error::{Error, Result};
use crate::grid::{eigenvalue, integrate, GridFunction};
use crate::harmonics::{MuVector, Signature};
use crate::linear::{check_spectral_condition, solve_dense, SpectralReport};
use crate::newton::{
    newton_solve, newton_solve_cold, ProblemSpec, SolutionRecord, SolverOptions,
};
use crate::Expr;
use std::time::{SystemTime, UNIX_EPOCH};

/// Curve metadata captured at trace time.
#[derive(Debug, Clone)]
pub struct CurveMetadata {
    pub grid_n: usize,
    pub length: f64,
    pub harmonics: Vec<usize>,
    pub step_tol_rel: f64,
    pub residual_tol_rel: f64,
    pub timestamp_epoch_s: u64,
}

/// An ordered family of converged solution records along one free signature
/// component; the one-dimensional slice of the solution manifold.
#[derive(Debug, Clone)]
pub struct SolutionCurve {
    pub problem_name: String,
    pub problem_hash: String,
    pub free_harmonic: usize,
    pub dxi: f64,
    pub records: Vec<SolutionRecord>,
    pub metadata: CurveMetadata,
}

impl SolutionCurve {
    /// Traced signature component of a record.
    pub fn free_xi(&self, record: &SolutionRecord) -> f64 {
        record.xi.get(self.free_harmonic).unwrap_or(f64::NAN)
    }

    /// `(xi, mu)` samples of the free harmonic along the curve.
    pub fn xi_mu_samples(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .map(|r| {
                (
                    r.xi.get(self.free_harmonic).unwrap_or(f64::NAN),
                    r.mu.get(self.free_harmonic).unwrap_or(f64::NAN),
                )
            })
            .collect()
    }

    /// Record whose traced component is closest to `xi`.
    pub fn nearest_record(&self, xi: f64) -> Option<&SolutionRecord> {
        self.records.iter().min_by(|a, b| {
            (self.free_xi(a) - xi)
                .abs()
                .total_cmp(&(self.free_xi(b) - xi).abs())
        })
    }
}

fn now_epoch_s() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn metadata_for(problem: &ProblemSpec, opts: &SolverOptions) -> CurveMetadata {
    CurveMetadata {
        grid_n: problem.grid().n_intervals(),
        length: problem.length(),
        harmonics: problem.harmonics().indices().to_vec(),
        step_tol_rel: opts.step_tol_rel,
        residual_tol_rel: opts.residual_tol_rel,
        timestamp_epoch_s: now_epoch_s(),
    }
}

/// Uniform parameter mesh from `from` to `to` with nominal spacing `step`.
/// The final point is pinned to `to` exactly.
fn parameter_mesh(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if step == 0.0 || !step.is_finite() {
        return Err(Error::InvalidArgument("step must be nonzero".into()));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(Error::InvalidArgument("non-finite parameter range".into()));
    }
    if from == to {
        return Ok(vec![from]);
    }
    let span = to - from;
    let step = step.abs() * span.signum();
    let count = (span / step).round();
    let mesh_divides = (from + count * step - to).abs() <= 1e-9 * (1.0 + to.abs());
    let n = if mesh_divides {
        count as usize
    } else {
        (span / step).abs().floor() as usize
    };
    let mut mesh: Vec<f64> = (0..=n).map(|i| from + i as f64 * step).collect();
    if mesh_divides {
        *mesh.last_mut().unwrap() = to;
    } else {
        mesh.push(to);
    }
    Ok(mesh)
}

const MAX_BISECTIONS: u32 = 4;

/// Warm-started march over a parameter mesh. On a failed step the interval
/// is bisected (recursively, up to 4 levels) before giving up. Only mesh
/// points are recorded.
fn march<F>(mesh: &[f64], mut solve_at: F) -> std::result::Result<Vec<SolutionRecord>, (Vec<SolutionRecord>, f64, String)>
where
    F: FnMut(f64, Option<&GridFunction>) -> Result<SolutionRecord>,
{
    fn advance<F>(
        solve_at: &mut F,
        from_param: f64,
        from: &SolutionRecord,
        to: f64,
        depth: u32,
    ) -> std::result::Result<SolutionRecord, String>
    where
        F: FnMut(f64, Option<&GridFunction>) -> Result<SolutionRecord>,
    {
        let attempt = solve_at(to, Some(&from.u));
        let reason = match attempt {
            Ok(rec) if rec.converged => return Ok(rec),
            Ok(rec) => format!(
                "no convergence after {} iterations (residual {:.3e})",
                rec.newton_iterations, rec.residual_sup
            ),
            Err(e) => e.to_string(),
        };
        if depth >= MAX_BISECTIONS {
            return Err(reason);
        }
        let mid = 0.5 * (from_param + to);
        let half = advance(solve_at, from_param, from, mid, depth + 1)?;
        advance(solve_at, mid, &half, to, depth + 1)
    }

    let mut records: Vec<SolutionRecord> = Vec::with_capacity(mesh.len());
    for (i, &p) in mesh.iter().enumerate() {
        if i == 0 {
            match solve_at(p, None) {
                Ok(rec) if rec.converged => records.push(rec),
                Ok(rec) => {
                    return Err((
                        records,
                        p,
                        format!(
                            "cold start did not converge (residual {:.3e})",
                            rec.residual_sup
                        ),
                    ))
                }
                Err(e) => return Err((records, p, e.to_string())),
            }
            continue;
        }
        let prev = records.last().expect("first point recorded");
        let prev_param = mesh[i - 1];
        match advance(&mut solve_at, prev_param, prev, p, 0) {
            Ok(rec) => records.push(rec),
            Err(reason) => return Err((records, p, reason)),
        }
    }
    Ok(records)
}

/// Trace the solution curve `xi -> mu` for the free harmonic over
/// `[xi_from, xi_to]` with step `dxi`. Components of multi-harmonic
/// signatures not listed in `fixed` are held at zero.
pub fn trace_curve(
    problem: &ProblemSpec,
    free_harmonic: usize,
    xi_from: f64,
    xi_to: f64,
    dxi: f64,
    fixed: &[(usize, f64)],
    opts: &SolverOptions,
) -> Result<SolutionCurve> {
    if !problem.harmonics().contains(free_harmonic) {
        return Err(Error::InvalidArgument(format!(
            "free harmonic {free_harmonic} is not in the problem's set {:?}",
            problem.harmonics().indices()
        )));
    }
    let mut base = Signature::zeros(problem.harmonics());
    for &(k, value) in fixed {
        if !problem.harmonics().contains(k) || k == free_harmonic {
            return Err(Error::InvalidArgument(format!(
                "fixed component {k} is not a non-free harmonic of the problem"
            )));
        }
        base = base.with_component(k, value);
    }

    let mesh = parameter_mesh(xi_from, xi_to, dxi)?;
    let solve_at = |xi_value: f64, warm: Option<&GridFunction>| {
        let xi = base.with_component(free_harmonic, xi_value);
        match warm {
            Some(guess) => newton_solve(problem, &xi, guess, opts),
            None => newton_solve_cold(problem, &xi, opts),
        }
    };

    let build = |records: Vec<SolutionRecord>| SolutionCurve {
        problem_name: problem.name().to_string(),
        problem_hash: problem.fingerprint(),
        free_harmonic,
        dxi,
        records,
        metadata: metadata_for(problem, opts),
    };

    match march(&mesh, solve_at) {
        Ok(records) => Ok(build(records)),
        Err((partial, at, reason)) => Err(Error::TraceAborted {
            partial: Box::new(build(partial)),
            parameter: "xi",
            at,
            reason,
        }),
    }
}

/// One point of a homotopy continuation in `k`.
#[derive(Debug, Clone)]
pub struct HomotopyPoint {
    pub k: f64,
    pub record: SolutionRecord,
}

/// Continuation in `k` of `u'' + G0(u) + k G1(u) = sum mu phi + e` at a
/// fixed signature.
#[derive(Debug, Clone)]
pub struct HomotopyCurve {
    pub xi: Signature,
    pub points: Vec<HomotopyPoint>,
    /// Spectral advisory evaluated for the nonlinearity at the final `k`.
    pub advisory: SpectralReport,
}

impl HomotopyCurve {
    pub fn endpoint(&self) -> &SolutionRecord {
        &self.points.last().expect("homotopy has at least one point").record
    }
}

/// Continue the fixed-signature solution of `u'' + G0(u) + k G1(u) = ...`
/// from `k_from` (where the problem is linear when `G0` is linear) to
/// `k_to`. Grid, forcing, and harmonics come from `base`; its own
/// nonlinearity is ignored.
#[allow(clippy::too_many_arguments)]
pub fn homotopy_in_k(
    base: &ProblemSpec,
    linear_part: &Expr,
    nonlinear_part: &Expr,
    xi: &Signature,
    k_from: f64,
    k_to: f64,
    dk: f64,
    opts: &SolverOptions,
) -> Result<HomotopyCurve> {
    let advisory = check_spectral_condition(
        &linear_part.plus_scaled(k_to, nonlinear_part)?,
        base.harmonics(),
        base.length(),
        (-100.0, 100.0),
    )?;

    let mesh = parameter_mesh(k_from, k_to, dk)?;
    let mut problems = Vec::with_capacity(mesh.len());
    for &k in &mesh {
        let g_k = linear_part.plus_scaled(k, nonlinear_part)?;
        problems.push(base.with_nonlinearity(g_k)?);
    }
    // Bisection may probe intermediate k values; rebuild the problem there.
    let solve_at = |k: f64, warm: Option<&GridFunction>| -> Result<SolutionRecord> {
        let problem = match mesh.iter().position(|&m| m == k) {
            Some(i) => problems[i].clone(),
            None => base.with_nonlinearity(linear_part.plus_scaled(k, nonlinear_part)?)?,
        };
        match warm {
            Some(guess) => newton_solve(&problem, xi, guess, opts),
            None => newton_solve_cold(&problem, xi, opts),
        }
    };

    match march(&mesh, solve_at) {
        Ok(records) => Ok(HomotopyCurve {
            xi: xi.clone(),
            points: mesh
                .iter()
                .zip(records)
                .map(|(&k, record)| HomotopyPoint { k, record })
                .collect(),
            advisory,
        }),
        Err((_, at, reason)) => Err(Error::TraceAborted {
            partial: Box::new(SolutionCurve {
                problem_name: base.name().to_string(),
                problem_hash: base.fingerprint(),
                free_harmonic: base.harmonics().min_index(),
                dxi: dk,
                records: Vec::new(),
                metadata: metadata_for(base, opts),
            }),
            parameter: "k",
            at,
            reason,
        }),
    }
}

/// Tolerance on `|mu - target|` for curve root refinement.
const ROOT_TOL: f64 = 1e-7;

/// All solutions of `mu(xi) = mu_target` on the traced range, found by
/// sign-change scan over consecutive records and bisection refinement in
/// `xi` (each probe is a full Newton solve).
///
/// Only transversal crossings are detectable: a tangency that touches the
/// target inside one mesh cell without a sign change is not reported.
pub fn solve_for_mu(
    problem: &ProblemSpec,
    curve: &SolutionCurve,
    mu_target: f64,
    opts: &SolverOptions,
) -> Result<Vec<SolutionRecord>> {
    let k = curve.free_harmonic;
    let records = &curve.records;
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let defect =
        |r: &SolutionRecord| r.mu.get(k).map(|m| m - mu_target).unwrap_or(f64::NAN);

    let on_mesh: Vec<bool> = records.iter().map(|r| defect(r).abs() <= ROOT_TOL).collect();
    let mut roots: Vec<SolutionRecord> = records
        .iter()
        .zip(&on_mesh)
        .filter(|(_, hit)| **hit)
        .map(|(r, _)| r.clone())
        .collect();

    for i in 0..records.len() - 1 {
        if on_mesh[i] || on_mesh[i + 1] {
            continue;
        }
        let (f_lo, f_hi) = (defect(&records[i]), defect(&records[i + 1]));
        if f_lo * f_hi >= 0.0 {
            continue;
        }
        let mut lo = curve.free_xi(&records[i]);
        let mut hi = curve.free_xi(&records[i + 1]);
        let mut f_lo = f_lo;
        let mut warm = records[i].u.clone();
        let mut found = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let xi = records[i].xi.with_component(k, mid);
            let rec = newton_solve(problem, &xi, &warm, opts)?;
            if !rec.converged {
                return Err(Error::RefinementFailed { at: mid });
            }
            let f_mid = defect(&rec);
            warm = rec.u.clone();
            if f_mid.abs() <= ROOT_TOL {
                found = Some(rec);
                break;
            }
            if (hi - lo).abs() <= 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
                return Err(Error::RefinementFailed { at: mid });
            }
            if f_lo * f_mid < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
        }
        match found {
            Some(rec) => roots.push(rec),
            None => return Err(Error::RefinementFailed { at: 0.5 * (lo + hi) }),
        }
    }

    // A crossing that lands within tolerance at a mesh point could also be
    // picked up by an adjacent bracket; keep the closer of near-duplicates.
    roots.sort_by(|a, b| curve.free_xi(a).total_cmp(&curve.free_xi(b)));
    let mut deduped: Vec<SolutionRecord> = Vec::with_capacity(roots.len());
    for rec in roots {
        if let Some(last) = deduped.last() {
            if (curve.free_xi(&rec) - curve.free_xi(last)).abs() < 0.5 * curve.dxi.abs() {
                if defect(&rec).abs() < defect(last).abs() {
                    *deduped.last_mut().unwrap() = rec;
                }
                continue;
            }
        }
        deduped.push(rec);
    }
    Ok(deduped)
}

/// Options for the outer signature solve.
#[derive(Debug, Clone)]
pub struct OuterOptions {
    pub solver: SolverOptions,
    /// Convergence tolerance on `max_k |mu_k - target_k|`.
    pub tol: f64,
    pub max_iterations: u32,
    /// Relative finite-difference step for the outer Jacobian.
    pub fd_step: f64,
    /// Entries of the outer Jacobian all below this magnitude mean the map
    /// is degenerate along the probed directions.
    pub jacobian_floor: f64,
    /// Starting signature; zeros when absent.
    pub initial: Option<Signature>,
}

impl Default for OuterOptions {
    fn default() -> Self {
        OuterOptions {
            solver: SolverOptions::default(),
            tol: 1e-7,
            max_iterations: 50,
            fd_step: 1e-4,
            jacobian_floor: 1e-6,
            initial: None,
        }
    }
}

/// Solve the outer problem `mu(xi) = target` over signatures `xi` by
/// quasi-Newton iteration with a finite-difference Jacobian of the map
/// `xi -> mu`; every map evaluation is one warm-started Newton solve. Falls
/// back to a damped fixed-point sweep when the Jacobian degrades, provided
/// the target has a (unique) zero component marking the resonant harmonic.
pub fn find_signature_for_target(
    problem: &ProblemSpec,
    target: &MuVector,
    opts: &OuterOptions,
) -> Result<SolutionRecord> {
    if !target.matches(problem.harmonics()) {
        return Err(Error::InvalidArgument(format!(
            "target harmonics do not match the problem's set {:?}",
            problem.harmonics().indices()
        )));
    }
    let h = problem.harmonics().clone();
    let m = h.len();
    let target_vec = target.values_in_order();

    let mut warm: Option<GridFunction> = None;
    let eval = |xi: &Signature, warm: &mut Option<GridFunction>| -> Result<SolutionRecord> {
        let rec = match warm.as_ref() {
            Some(guess) => newton_solve(problem, xi, guess, &opts.solver),
            None => newton_solve_cold(problem, xi, &opts.solver),
        }?;
        *warm = Some(rec.u.clone());
        Ok(rec)
    };

    let mut xi = opts
        .initial
        .clone()
        .unwrap_or_else(|| Signature::zeros(&h));
    if !xi.matches(&h) {
        return Err(Error::InvalidArgument(
            "initial signature does not match the problem's harmonics".into(),
        ));
    }

    let mut rec = eval(&xi, &mut warm)?;
    let mut trace: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut defect_vec: Vec<f64> = Vec::new();

    for iteration in 0..opts.max_iterations {
        let mu_vec = rec.mu.values_in_order();
        defect_vec = mu_vec
            .iter()
            .zip(&target_vec)
            .map(|(m, t)| m - t)
            .collect();
        let defect = defect_vec.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        trace.push((xi.values_in_order(), mu_vec));

        if iteration > 0 && defect <= opts.tol {
            return Ok(rec);
        }

        // Columns of the finite-difference Jacobian d(mu)/d(xi).
        let mut jacobian = vec![vec![0.0; m]; m];
        let mut max_entry = 0.0f64;
        for (col, k) in h.iter().enumerate() {
            let xi_k = xi.get(k).unwrap();
            let dk = opts.fd_step * (1.0 + xi_k.abs());
            let perturbed = xi.with_component(k, xi_k + dk);
            let rec_p = eval(&perturbed, &mut warm)?;
            for (row, kk) in h.iter().enumerate() {
                let entry = (rec_p.mu.get(kk).unwrap() - rec.mu.get(kk).unwrap()) / dk;
                jacobian[row][col] = entry;
                max_entry = max_entry.max(entry.abs());
            }
        }
        if max_entry < opts.jacobian_floor {
            return Err(Error::SingularOuterJacobian);
        }
        if defect <= opts.tol {
            return Ok(rec);
        }

        let neg_defect: Vec<f64> = defect_vec.iter().map(|d| -d).collect();
        let step = match solve_dense(jacobian, neg_defect) {
            Ok((s, _)) => s,
            Err(_) => {
                return fallback_fixed_point(problem, target, &xi, warm, opts, trace)
            }
        };

        // Damped acceptance: retry with halved steps if the defect grows.
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..3 {
            let mut candidate = xi.clone();
            for (k, s) in h.iter().zip(&step) {
                candidate = candidate.with_component(k, candidate.get(k).unwrap() + scale * s);
            }
            let rec_c = eval(&candidate, &mut warm)?;
            let new_defect = rec_c
                .mu
                .values_in_order()
                .iter()
                .zip(&target_vec)
                .fold(0.0f64, |a, (m, t)| a.max((m - t).abs()));
            if new_defect <= defect || new_defect <= opts.tol {
                xi = candidate;
                rec = rec_c;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return fallback_fixed_point(problem, target, &xi, warm, opts, trace);
        }
    }

    Err(Error::OuterNoConvergence {
        iterations: opts.max_iterations,
        last_defect: defect_vec.iter().fold(0.0f64, |a, d| a.max(d.abs())),
        trace,
    })
}

/// Damped fixed-point sweep for the outer problem. Requires the resonant
/// harmonic to be identifiable as the unique zero component of the target:
/// the non-resonant components are updated through the projected-equation
/// identity, the resonant one by relaxation on its defect.
fn fallback_fixed_point(
    problem: &ProblemSpec,
    target: &MuVector,
    xi0: &Signature,
    mut warm: Option<GridFunction>,
    opts: &OuterOptions,
    mut trace: Vec<(Vec<f64>, Vec<f64>)>,
) -> Result<SolutionRecord> {
    const RELAXATION: f64 = 0.5;
    let h = problem.harmonics().clone();
    let zeros: Vec<usize> = target
        .iter()
        .filter(|(_, t)| *t == 0.0)
        .map(|(k, _)| k)
        .collect();
    let k_res = match zeros.as_slice() {
        [k] => *k,
        _ => return Err(Error::SingularOuterJacobian),
    };
    let lambda_res = eigenvalue(k_res, problem.length());
    let sigma = problem.length() / 2.0;

    let mut xi = xi0.clone();
    let mut last_defect = f64::INFINITY;
    for iteration in 0..opts.max_iterations {
        let rec = match warm.as_ref() {
            Some(guess) => newton_solve(problem, &xi, guess, &opts.solver),
            None => newton_solve_cold(problem, &xi, &opts.solver),
        }?;
        warm = Some(rec.u.clone());
        trace.push((xi.values_in_order(), rec.mu.values_in_order()));

        last_defect = rec
            .mu
            .iter()
            .map(|(k, m)| (m - target.get(k).unwrap()).abs())
            .fold(0.0f64, f64::max);
        if last_defect <= opts.tol {
            return Ok(rec);
        }
        if iteration + 1 == opts.max_iterations {
            break;
        }

        // integral of (G(u) - lambda_res u) phi_k: the bounded part of the
        // nonlinearity projected on each constrained harmonic.
        let g_of_u =
            GridFunction::try_sample_from(&rec.u, |u| problem.nonlinearity().eval(u))?;
        let mut next = xi.clone();
        for k in h.iter() {
            let phi = crate::grid::eigenpair(k, problem.grid())?.eigenfunction;
            let g_proj = integrate(&g_of_u.mul_pointwise(&phi)?)
                - lambda_res * rec.xi.get(k).unwrap_or(0.0);
            let proposal = if k == k_res {
                xi.get(k).unwrap() - (g_proj - sigma * target.get(k).unwrap())
            } else {
                let lambda_k = eigenvalue(k, problem.length());
                (sigma * target.get(k).unwrap() - g_proj) / (lambda_res - lambda_k)
            };
            let damped = xi.get(k).unwrap() + RELAXATION * (proposal - xi.get(k).unwrap());
            next = next.with_component(k, damped);
        }
        xi = next;
    }

    Err(Error::OuterNoConvergence {
        iterations: opts.max_iterations,
        last_defect,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::harmonics::HarmonicSet;
    use std::f64::consts::PI;

    fn problem(name: &str, n: usize, g: &str, e: &str, h: &[usize]) -> ProblemSpec {
        ProblemSpec::from_sources(
            name,
            Grid::new(PI, n).unwrap(),
            g,
            e,
            HarmonicSet::new(h.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn fig3(n: usize) -> ProblemSpec {
        problem("fig3", n, "u + u/sqrt(u^2+1)", "5*sin(2*x) - sin(10*x)", &[1])
    }

    #[test]
    fn mesh_covers_range() {
        let m = parameter_mesh(-50.0, 50.0, 0.5).unwrap();
        assert_eq!(m.len(), 201);
        assert_eq!(m[0], -50.0);
        assert_eq!(*m.last().unwrap(), 50.0);

        let m = parameter_mesh(0.0, 1.0, 0.3).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(*m.last().unwrap(), 1.0);

        let m = parameter_mesh(5.0, -5.0, 0.5).unwrap();
        assert_eq!(m.len(), 21);
        assert!(m.windows(2).all(|w| w[1] < w[0]));

        assert_eq!(parameter_mesh(2.0, 2.0, 0.5).unwrap(), vec![2.0]);
        assert!(parameter_mesh(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn resonant_kernel_direction_traces_to_zero_mu() {
        // u'' + u = mu sin x: mu vanishes identically and u = (2 xi / pi) sin x.
        let p = problem("kernel", 256, "u", "0", &[1]);
        let curve =
            trace_curve(&p, 1, -5.0, 5.0, 0.5, &[], &SolverOptions::default()).unwrap();
        assert_eq!(curve.records.len(), 21);
        for rec in &curve.records {
            assert!(rec.mu.get(1).unwrap().abs() < 1e-8);
            let xi = rec.xi.get(1).unwrap();
            let exact =
                GridFunction::sample(p.grid(), |x| 2.0 * xi / PI * x.sin()).unwrap();
            assert!(rec.u.sup_distance(&exact).unwrap() < 1e-6);
        }
    }

    #[test]
    fn records_are_strictly_monotone_in_xi() {
        let p = fig3(256);
        let curve =
            trace_curve(&p, 1, -3.0, 3.0, 0.5, &[], &SolverOptions::default()).unwrap();
        let xs: Vec<f64> = curve.records.iter().map(|r| curve.free_xi(r)).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert!(curve.records.iter().all(|r| r.converged));
    }

    #[test]
    fn homotopy_starts_at_the_linear_solution() {
        // At k = 0 the equation is u'' = mu sin x + sin 2x; with projection
        // pi/2 the coefficient is mu = -lambda_1 xi / (L/2) = -1.
        let base = problem("homotopy-demo", 512, "0*u", "sin(2*x)", &[1]);
        let g0 = Expr::parse("0*u", "u").unwrap();
        let g1 = Expr::parse("u/sqrt(u^2+1)", "u").unwrap();
        let xi = Signature::single(1, PI / 2.0).unwrap();
        let curve = homotopy_in_k(
            &base,
            &g0,
            &g1,
            &xi,
            0.0,
            1.0,
            0.1,
            &SolverOptions::default(),
        )
        .unwrap();
        let first = &curve.points[0];
        assert_eq!(first.k, 0.0);
        assert_eq!(first.record.newton_iterations, 1);
        assert!((first.record.mu.get(1).unwrap() + 1.0).abs() < 1e-7);
        assert_eq!(curve.points.len(), 11);
    }

    #[test]
    fn homotopy_endpoint_matches_direct_solve() {
        let base = problem("homotopy-demo", 512, "0*u", "sin(2*x)", &[1]);
        let g0 = Expr::parse("0*u", "u").unwrap();
        let g1 = Expr::parse("u/sqrt(u^2+1)", "u").unwrap();
        let xi = Signature::single(1, PI / 2.0).unwrap();
        let opts = SolverOptions::default();
        let curve = homotopy_in_k(&base, &g0, &g1, &xi, 0.0, 1.0, 0.1, &opts).unwrap();

        let full = base
            .with_nonlinearity(g0.plus_scaled(1.0, &g1).unwrap())
            .unwrap();
        let direct = newton_solve_cold(&full, &xi, &opts).unwrap();
        let end = curve.endpoint();
        assert!(end.u.sup_distance(&direct.u).unwrap() <= 1e-7);
        assert!((end.mu.get(1).unwrap() - direct.mu.get(1).unwrap()).abs() <= 1e-7);
        assert!(curve.advisory.passes());
    }

    #[test]
    fn homotopy_advisory_warns_outside_window() {
        let base = problem("hot", 128, "0*u", "sin(2*x)", &[1]);
        let g0 = Expr::parse("0*u", "u").unwrap();
        let g1 = Expr::parse("10*u", "u").unwrap();
        let xi = Signature::single(1, 0.1).unwrap();
        let curve = homotopy_in_k(
            &base,
            &g0,
            &g1,
            &xi,
            0.0,
            0.45,
            0.15,
            &SolverOptions::default(),
        )
        .unwrap();
        // k * max G1' = 4.5 >= lambda_2 = 4: warn, yet the trace succeeded.
        assert!(!curve.advisory.passes());
        assert_eq!(curve.points.len(), 4);
    }

    #[test]
    fn monotone_curve_has_unique_root() {
        let p = fig3(256);
        let opts = SolverOptions::default();
        let curve = trace_curve(&p, 1, -10.0, 10.0, 0.5, &[], &opts).unwrap();
        let roots = solve_for_mu(&p, &curve, 0.7, &opts).unwrap();
        assert_eq!(roots.len(), 1);
        let rec = &roots[0];
        assert!((rec.mu.get(1).unwrap() - 0.7).abs() <= 1e-7);
        assert!(rec.converged);

        // No solutions beyond the asymptotic band.
        let none = solve_for_mu(&p, &curve, 2.0, &opts).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn multi_harmonic_trace_holds_fixed_components() {
        let p = crate::problems::get_builtin_with_grid(
            "higher-ev",
            Grid::new(PI, 256).unwrap(),
        )
        .unwrap();
        let curve = trace_curve(
            &p,
            2,
            0.0,
            1.0,
            0.5,
            &[(1, 0.3)],
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(curve.records.len(), 3);
        for rec in &curve.records {
            assert!(rec.converged);
            assert_eq!(rec.xi.get(1), Some(0.3));
            let p1 = crate::grid::harmonic_projection(&rec.u, 1).unwrap();
            assert!((p1 - 0.3).abs() < 1e-6, "projection {p1}");
        }
        // The free component moves, the fixed one does not.
        let xi2: Vec<f64> = curve.records.iter().map(|r| r.xi.get(2).unwrap()).collect();
        assert_eq!(xi2, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn outer_solve_is_degenerate_along_the_kernel() {
        // u'' + u = mu sin x + sin 2x: mu(xi) vanishes identically, so the
        // outer map carries no information.
        let p = problem("kernel", 256, "u", "sin(2*x)", &[1]);
        let target = MuVector::single(1, 0.0).unwrap();
        match find_signature_for_target(&p, &target, &OuterOptions::default()) {
            Err(Error::SingularOuterJacobian) => {}
            other => panic!("expected SingularOuterJacobian, got {other:?}"),
        }
    }

    #[test]
    fn outer_solve_finds_zero_mu_on_odd_problem() {
        let p = fig3(256);
        let target = MuVector::single(1, 0.0).unwrap();
        let rec = find_signature_for_target(&p, &target, &OuterOptions::default()).unwrap();
        assert!(rec.mu.get(1).unwrap().abs() <= 1e-7);
        // The nonlinearity is odd and e flips sign under x -> pi - x, so the
        // zero of mu(xi) sits at xi = 0.
        assert!(rec.xi.get(1).unwrap().abs() <= 1e-5);
    }
}
