//! Built-in problem library: four named resonance problems used by the
//! test suites and the CLI.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::harmonics::HarmonicSet;
use crate::newton::ProblemSpec;

/// A named built-in problem definition.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinProblem {
    pub name: &'static str,
    /// What the problem demonstrates.
    pub note: &'static str,
    pub nonlinearity: &'static str,
    pub forcing: &'static str,
    pub harmonics: &'static [usize],
}

pub const BUILTINS: [BuiltinProblem; 4] = [
    BuiltinProblem {
        name: "fig1",
        note: "unbounded odd-signed perturbation at the principal resonance; \
               mu(xi) crosses every level, so the problem is solvable for all mu",
        nonlinearity: "u + 0.2*u^3/(u^2+3*u+3) + sin(0.5*u)",
        forcing: "5*(x - pi/2)",
        harmonics: &[1],
    },
    BuiltinProblem {
        name: "fig2",
        note: "bounded nonlinearity vanishing at infinity; mu(xi) decays at both \
               ends, giving a finite solvability window with multiplicity two inside",
        nonlinearity: "u + u/(2*u^2+u+1)",
        forcing: "sin(2*x)",
        harmonics: &[1],
    },
    BuiltinProblem {
        name: "fig3",
        note: "bounded strictly monotone nonlinearity; mu(xi) increases strictly \
               and tends to +-4/pi, the sine average of the limits at infinity",
        nonlinearity: "u + u/sqrt(u^2+1)",
        forcing: "5*sin(2*x) - sin(10*x)",
        harmonics: &[1],
    },
    BuiltinProblem {
        name: "higher-ev",
        note: "resonance at the second eigenvalue with two constrained harmonics; \
               drive the outer solve with mu-target 1=1,2=0 (forcing sin x split \
               into its harmonic coefficients)",
        nonlinearity: "4*u + u/sqrt(u^2+1)",
        forcing: "0",
        harmonics: &[1, 2],
    },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

pub fn builtin_info(name: &str) -> Option<&'static BuiltinProblem> {
    BUILTINS.iter().find(|b| b.name == name)
}

/// Built-in problem on the default grid (`L = pi`, `N = 1024`).
pub fn get_builtin(name: &str) -> Result<ProblemSpec> {
    get_builtin_with_grid(name, Grid::standard())
}

pub fn get_builtin_with_grid(name: &str, grid: Grid) -> Result<ProblemSpec> {
    let info = builtin_info(name).ok_or_else(|| Error::UnknownProblem {
        name: name.to_string(),
        available: builtin_names().join(", "),
    })?;
    ProblemSpec::from_sources(
        info.name,
        grid,
        info.nonlinearity,
        info.forcing,
        HarmonicSet::new(info.harmonics.to_vec())?,
    )
}
