use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("variable `{found}` at offset {offset} not allowed here (expression is in `{expected}`)")]
    WrongVariable {
        found: String,
        expected: String,
        offset: usize,
    },

    #[error("domain error in `{op}` at argument {argument}")]
    Domain { op: &'static str, argument: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid function has {got} samples, grid expects {expected}")]
    SampleCountMismatch { got: usize, expected: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("invalid harmonic set: {0}")]
    InvalidHarmonics(String),

    #[error("integration overflow at step {step} (x = {x})")]
    Overflow { step: usize, x: f64 },

    #[error(
        "singular constrained system (pivot ratio {condition:.3e}); \
         the coefficient likely violates the spectral window or the resonance is degenerate"
    )]
    SingularSystem { condition: f64 },

    #[error(
        "forcing is not orthogonal to harmonic {harmonic}: projection {projection:.6e} exceeds tolerance {tolerance:.3e}"
    )]
    ForcingNotOrthogonal {
        harmonic: usize,
        projection: f64,
        tolerance: f64,
    },

    #[error("unknown built-in problem `{name}`; available: {available}")]
    UnknownProblem { name: String, available: String },

    #[error("curve trace aborted at {parameter} = {at}: {reason}")]
    TraceAborted {
        /// Converged records accumulated before the failure.
        partial: Box<crate::continuation::SolutionCurve>,
        /// Name of the continuation parameter (`xi` or `k`).
        parameter: &'static str,
        at: f64,
        reason: String,
    },

    #[error("curve root refinement failed to converge at xi = {at}")]
    RefinementFailed { at: f64 },

    #[error("outer solve did not converge after {iterations} iterations (last defect {last_defect:.3e})")]
    OuterNoConvergence {
        iterations: u32,
        last_defect: f64,
        /// (signature, mu) pairs visited, flattened in harmonic order.
        trace: Vec<(Vec<f64>, Vec<f64>)>,
    },

    #[error(
        "outer Jacobian of the signature-to-mu map is singular; \
         the target is degenerate (e.g. the map is constant along a kernel direction)"
    )]
    SingularOuterJacobian,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
