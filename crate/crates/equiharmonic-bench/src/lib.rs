//! Shared fixtures for the solver benchmarks.

use equiharmonic::{Grid, ProblemSpec};

/// The bounded monotone built-in on a grid of the given resolution.
pub fn monotone_problem(n: usize) -> ProblemSpec {
    let grid = Grid::new(std::f64::consts::PI, n).expect("valid grid");
    equiharmonic::get_builtin_with_grid("fig3", grid).expect("builtin exists")
}
