//! Properties of traced solution curves that need full traces: continuity
//! of the curve in the signature, sign structure at large signatures, and
//! agreement between the two root-finding routes.

use equiharmonic::*;

fn fig3(n: usize) -> ProblemSpec {
    let grid = Grid::new(std::f64::consts::PI, n).unwrap();
    get_builtin_with_grid("fig3", grid).unwrap()
}

/// Consecutive records move by O(dxi): the largest increment halves (up to
/// a factor) when the step halves.
#[test]
fn curve_increments_scale_with_the_step() {
    let problem = fig3(256);
    let opts = SolverOptions::default();
    let max_increment = |dxi: f64| {
        let curve = trace_curve(&problem, 1, -10.0, 10.0, dxi, &[], &opts).unwrap();
        curve
            .records
            .windows(2)
            .map(|w| w[1].u.sup_distance(&w[0].u).unwrap())
            .fold(0.0f64, f64::max)
    };
    let coarse = max_increment(0.5);
    let fine = max_increment(0.25);
    let ratio = fine / coarse;
    assert!(
        (0.3..=0.7).contains(&ratio),
        "increment ratio {ratio} (coarse {coarse:.3e}, fine {fine:.3e})"
    );
}

/// Beyond |xi| = 40 the curve of the monotone problem has settled on its
/// asymptotic sign.
#[test]
fn sign_structure_at_large_signatures() {
    let problem = fig3(512);
    let curve = trace_curve(&problem, 1, -50.0, 50.0, 0.5, &[], &SolverOptions::default()).unwrap();
    for (xi, mu) in curve.xi_mu_samples() {
        if xi >= 40.0 {
            assert!(mu > 0.0, "mu({xi}) = {mu}");
        }
        if xi <= -40.0 {
            assert!(mu < 0.0, "mu({xi}) = {mu}");
        }
    }
}

/// Root refinement on a traced curve and the outer signature solve locate
/// the same solution.
#[test]
fn curve_root_and_outer_solve_agree() {
    let problem = fig3(256);
    let opts = SolverOptions::default();
    let curve = trace_curve(&problem, 1, -10.0, 10.0, 0.5, &[], &opts).unwrap();
    let target = 0.7;

    let roots = solve_for_mu(&problem, &curve, target, &opts).unwrap();
    assert_eq!(roots.len(), 1);

    let outer = find_signature_for_target(
        &problem,
        &MuVector::single(1, target).unwrap(),
        &OuterOptions::default(),
    )
    .unwrap();

    let xi_root = roots[0].xi.get(1).unwrap();
    let xi_outer = outer.xi.get(1).unwrap();
    assert!(
        (xi_root - xi_outer).abs() <= 1e-5,
        "curve root xi = {xi_root}, outer xi = {xi_outer}"
    );
}
