//! Problem definitions for the CLI: either a built-in name or a path to a
//! JSON problem file with expressions as strings.

use crate::CliError;
use equiharmonic::{
    get_builtin_with_grid, newton::DEFAULT_ORTHO_TOL, Expr, Grid, GridFunction, HarmonicSet,
    ProblemSpec, SolverOptions,
};
use serde::Deserialize;
use std::path::Path;

/// On-disk problem description. `nonlinearity` is an expression in `u`,
/// `forcing` an expression in `x`; remaining keys override solver and grid
/// defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: Option<String>,
    /// Interval length; defaults to pi.
    #[serde(default)]
    pub length: Option<f64>,
    pub nonlinearity: String,
    pub forcing: String,
    pub harmonics: Vec<usize>,
    #[serde(default)]
    pub grid_n: Option<usize>,
    #[serde(default)]
    pub dxi: Option<f64>,
    #[serde(default)]
    pub ortho_tol: Option<f64>,
    #[serde(default)]
    pub step_tol_rel: Option<f64>,
    #[serde(default)]
    pub residual_tol_rel: Option<f64>,
    #[serde(default)]
    pub max_iterations: Option<u32>,
}

/// A problem plus per-problem defaults resolved from its source.
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub solver: SolverOptions,
    pub default_dxi: f64,
}

/// Resolve `--problem`: a built-in name first, otherwise a path to a
/// problem file.
pub fn load_problem(source: &str, grid_n_override: Option<usize>) -> Result<LoadedProblem, CliError> {
    let defaults = SolverOptions::default();
    if equiharmonic::builtin_names().contains(&source) {
        let n = grid_n_override.unwrap_or(Grid::DEFAULT_N);
        let grid = Grid::new(std::f64::consts::PI, n).map_err(CliError::validation)?;
        let spec = get_builtin_with_grid(source, grid).map_err(CliError::validation)?;
        return Ok(LoadedProblem {
            spec,
            solver: defaults,
            default_dxi: 0.5,
        });
    }

    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::Validation(format!(
            "`{source}` is neither a built-in problem ({}) nor an existing file",
            equiharmonic::builtin_names().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {source}: {e}")))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed problem file {source}: {e}")))?;

    let name = file.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| source.to_string())
    });
    let length = file.length.unwrap_or(std::f64::consts::PI);
    let n = grid_n_override
        .or(file.grid_n)
        .unwrap_or(Grid::DEFAULT_N);
    let grid = Grid::new(length, n).map_err(CliError::validation)?;
    let harmonics = HarmonicSet::new(file.harmonics.clone()).map_err(CliError::validation)?;
    let g = Expr::parse(&file.nonlinearity, "u").map_err(CliError::validation)?;
    let e_expr = Expr::parse(&file.forcing, "x").map_err(CliError::validation)?;
    let e = GridFunction::try_sample(grid, |x| e_expr.eval(x)).map_err(CliError::validation)?;
    let spec = ProblemSpec::with_ortho_tol(
        name,
        grid,
        g,
        e,
        harmonics,
        file.ortho_tol.unwrap_or(DEFAULT_ORTHO_TOL),
    )
    .map_err(CliError::validation)?;

    Ok(LoadedProblem {
        spec,
        solver: SolverOptions {
            step_tol_rel: file.step_tol_rel.unwrap_or(defaults.step_tol_rel),
            residual_tol_rel: file.residual_tol_rel.unwrap_or(defaults.residual_tol_rel),
            max_iterations: file.max_iterations.unwrap_or(defaults.max_iterations),
        },
        default_dxi: file.dxi.unwrap_or(0.5),
    })
}
