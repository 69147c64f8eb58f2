//! Command-line interface: trace solution curves, locate solutions at a
//! target right-hand side, verify stored curves by reintegration, and list
//! the built-in problems.
//!
//! Exit codes: 0 success; 2 validation error; 3 aborted trace (partial
//! output still written); 4 no solutions found; 5 verification failure.

mod curve_file;
mod problem_file;

use clap::{Args, Parser, Subcommand};
use curve_file::{curve_to_csv, curve_to_json, describe_solution, read_curve_file};
use equiharmonic::{
    builtin_info, builtin_names, find_signature_for_target, solve_for_mu, trace_curve,
    verify_initial_data, Error, GridFunction, MuVector, OuterOptions, SolutionCurve,
};
use problem_file::{load_problem, LoadedProblem};
use std::fmt;
use std::path::Path;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Aborted(String),
    NoSolutions(String),
    VerifyFailed(String),
}

impl CliError {
    fn validation(e: impl fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Aborted(_) => 3,
            CliError::NoSolutions(_) => 4,
            CliError::VerifyFailed(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m)
            | CliError::Aborted(m)
            | CliError::NoSolutions(m)
            | CliError::VerifyFailed(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "equiharmonic",
    about = "Solution curves of semilinear two-point boundary value problems at resonance",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Built-in problem name or path to a JSON problem file.
    #[arg(long)]
    problem: String,
    /// Override the number of integrator intervals N.
    #[arg(long)]
    grid_n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the solution curve mu(xi) over a signature range.
    Trace {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        xi_from: f64,
        #[arg(long, allow_hyphen_values = true)]
        xi_to: f64,
        /// Signature step; defaults to the problem's dxi (0.5 for built-ins).
        #[arg(long, allow_hyphen_values = true)]
        dxi: Option<f64>,
        /// Harmonic whose signature component is traced; defaults to the
        /// smallest constrained harmonic.
        #[arg(long)]
        free_harmonic: Option<usize>,
        /// Held value for a non-free harmonic, as `k=value`; repeatable.
        /// Unlisted components stay at zero.
        #[arg(long = "fixed", value_parser = parse_fixed)]
        fixed: Vec<(usize, f64)>,
        /// Embed the grid samples of u in JSON output.
        #[arg(long)]
        full: bool,
        /// Output path; format chosen by extension (.csv or .json).
        #[arg(long)]
        out: String,
    },
    /// Find solutions with a prescribed right-hand side.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Target mu for the free harmonic; searches a traced curve over
        /// the --xi-from/--xi-to range.
        #[arg(long, conflicts_with = "mu_target", allow_hyphen_values = true)]
        mu: Option<f64>,
        /// Multi-harmonic target `k=v[,k=v...]`; solved by the outer
        /// signature iteration.
        #[arg(long, conflicts_with = "mu")]
        mu_target: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        xi_from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xi_to: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        dxi: Option<f64>,
        #[arg(long)]
        free_harmonic: Option<usize>,
    },
    /// Re-check every record of a stored curve by reintegration.
    Verify {
        /// Curve file written by `trace` with a .json output.
        #[arg(long = "in")]
        input: String,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// List built-in problems.
    List,
}

fn parse_fixed(s: &str) -> Result<(usize, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected k=value, got `{s}`"))?;
    Ok((
        k.trim().parse().map_err(|e| format!("bad harmonic `{k}`: {e}"))?,
        v.trim().parse().map_err(|e| format!("bad value `{v}`: {e}"))?,
    ))
}

fn parse_mu_target(s: &str) -> Result<MuVector, CliError> {
    let pairs = s
        .split(',')
        .map(|part| {
            parse_fixed(part.trim()).map_err(|e| CliError::Validation(format!("--mu-target: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    MuVector::from_pairs(pairs).map_err(CliError::validation)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Trace {
            problem,
            xi_from,
            xi_to,
            dxi,
            free_harmonic,
            fixed,
            full,
            out,
        } => cmd_trace(problem, xi_from, xi_to, dxi, free_harmonic, fixed, full, out),
        Command::Solve {
            problem,
            mu,
            mu_target,
            xi_from,
            xi_to,
            dxi,
            free_harmonic,
        } => cmd_solve(problem, mu, mu_target, xi_from, xi_to, dxi, free_harmonic),
        Command::Verify { input, problem } => cmd_verify(input, problem),
        Command::List => {
            cmd_list();
            Ok(())
        }
    }
}

enum OutputFormat {
    Csv,
    Json,
}

fn output_format(path: &str) -> Result<OutputFormat, CliError> {
    match Path::new(path).extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(OutputFormat::Csv),
        Some("json") => Ok(OutputFormat::Json),
        other => Err(CliError::Validation(format!(
            "output extension must be .csv or .json, got {other:?}"
        ))),
    }
}

fn write_curve(
    curve: &SolutionCurve,
    out: &str,
    full: bool,
    aborted_at: Option<f64>,
) -> Result<(), CliError> {
    let payload = match output_format(out)? {
        OutputFormat::Csv => curve_to_csv(curve, aborted_at),
        OutputFormat::Json => curve_to_json(curve, full, aborted_at)?,
    };
    std::fs::write(out, payload)
        .map_err(|e| CliError::Validation(format!("cannot write {out}: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_trace(
    problem: ProblemArgs,
    xi_from: f64,
    xi_to: f64,
    dxi: Option<f64>,
    free_harmonic: Option<usize>,
    fixed: Vec<(usize, f64)>,
    full: bool,
    out: String,
) -> Result<(), CliError> {
    output_format(&out)?;
    let LoadedProblem {
        spec,
        solver,
        default_dxi,
    } = load_problem(&problem.problem, problem.grid_n)?;
    let free = free_harmonic.unwrap_or_else(|| spec.harmonics().min_index());
    let dxi = dxi.unwrap_or(default_dxi);

    match trace_curve(&spec, free, xi_from, xi_to, dxi, &fixed, &solver) {
        Ok(curve) => {
            write_curve(&curve, &out, full, None)?;
            eprintln!(
                "traced {} records over xi in [{xi_from}, {xi_to}] -> {out}",
                curve.records.len()
            );
            Ok(())
        }
        Err(Error::TraceAborted {
            partial,
            at,
            reason,
            ..
        }) => {
            write_curve(&partial, &out, full, Some(at))?;
            Err(CliError::Aborted(format!(
                "trace aborted at xi = {at}: {reason}; {} records written to {out}",
                partial.records.len()
            )))
        }
        Err(e) => Err(CliError::validation(e)),
    }
}

fn cmd_solve(
    problem: ProblemArgs,
    mu: Option<f64>,
    mu_target: Option<String>,
    xi_from: Option<f64>,
    xi_to: Option<f64>,
    dxi: Option<f64>,
    free_harmonic: Option<usize>,
) -> Result<(), CliError> {
    let LoadedProblem {
        spec,
        solver,
        default_dxi,
    } = load_problem(&problem.problem, problem.grid_n)?;

    if let Some(target_spec) = mu_target {
        let target = parse_mu_target(&target_spec)?;
        let opts = OuterOptions {
            solver,
            ..OuterOptions::default()
        };
        return match find_signature_for_target(&spec, &target, &opts) {
            Ok(rec) => {
                println!("found 1 solution");
                println!(
                    "{}",
                    describe_solution(&rec, spec.harmonics().min_index())
                );
                Ok(())
            }
            Err(e @ (Error::OuterNoConvergence { .. } | Error::SingularOuterJacobian)) => {
                Err(CliError::NoSolutions(format!("no solution found: {e}")))
            }
            Err(e) => Err(CliError::validation(e)),
        };
    }

    let mu = mu.ok_or_else(|| {
        CliError::Validation("one of --mu or --mu-target is required".into())
    })?;
    let (from, to) = match (xi_from, xi_to) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CliError::Validation(
                "--mu mode needs --xi-from and --xi-to for the curve scan".into(),
            ))
        }
    };
    let free = free_harmonic.unwrap_or_else(|| spec.harmonics().min_index());
    let curve = match trace_curve(&spec, free, from, to, dxi.unwrap_or(default_dxi), &[], &solver)
    {
        Ok(curve) => curve,
        Err(Error::TraceAborted { at, reason, .. }) => {
            return Err(CliError::Aborted(format!(
                "curve trace aborted at xi = {at}: {reason}"
            )))
        }
        Err(e) => return Err(CliError::validation(e)),
    };
    let solutions = solve_for_mu(&spec, &curve, mu, &solver).map_err(CliError::validation)?;
    if solutions.is_empty() {
        return Err(CliError::NoSolutions(format!(
            "no solutions with mu_{free} = {mu} for xi in [{from}, {to}]"
        )));
    }
    println!("found {} solution(s)", solutions.len());
    for rec in &solutions {
        println!("{}", describe_solution(rec, free));
    }
    Ok(())
}

fn cmd_verify(input: String, problem: ProblemArgs) -> Result<(), CliError> {
    let file = read_curve_file(&input)?;
    let LoadedProblem { spec, .. } =
        load_problem(&problem.problem, problem.grid_n.or(Some(file.grid_n)))?;
    if (spec.length() - file.length).abs() > 1e-12 {
        return Err(CliError::Validation(format!(
            "curve was traced on length {} but the problem has length {}",
            file.length,
            spec.length()
        )));
    }
    if spec.fingerprint() != file.problem_hash {
        eprintln!(
            "warning: problem fingerprint mismatch (curve {}, problem {}); \
             verifying against the given problem anyway",
            file.problem_hash,
            spec.fingerprint()
        );
    }

    println!("{:>12} {:>14} {:>14} {:>14}  result", "xi", "|v(L)|", "max sig defect", "max |v - u|");
    let mut failures = 0usize;
    for rec in &file.records {
        let xi = rec.signature()?;
        let mu = rec.mu_vector()?;
        let u = match &rec.u {
            Some(values) => Some(
                GridFunction::from_values(spec.grid(), values.clone())
                    .map_err(CliError::validation)?,
            ),
            None => None,
        };
        let report =
            verify_initial_data(&spec, &xi, &mu, rec.uprime0, rec.sup_norm_u, u.as_ref());
        let sig_defect = report
            .signature_defects
            .values()
            .cloned()
            .fold(0.0f64, f64::max);
        let xi_free = xi.get(file.free_harmonic).unwrap_or(f64::NAN);
        let deviation = report
            .max_pointwise_deviation
            .map(|d| format!("{d:>14.3e}"))
            .unwrap_or_else(|| format!("{:>14}", "-"));
        let verdict = if report.passed { "pass" } else { "FAIL" };
        println!(
            "{xi_free:>12.4} {:>14.3e} {sig_defect:>14.3e} {deviation}  {verdict}",
            report.boundary_defect
        );
        if !report.passed {
            failures += 1;
            if let Some(reason) = &report.failure {
                println!("    reintegration failed: {reason}");
            }
        }
    }
    if failures > 0 {
        return Err(CliError::VerifyFailed(format!(
            "{failures} of {} records failed verification",
            file.records.len()
        )));
    }
    println!("all {} records verified", file.records.len());
    Ok(())
}

fn cmd_list() {
    for name in builtin_names() {
        let info = builtin_info(name).expect("listed name exists");
        println!("{:<10} G(u) = {}", name, info.nonlinearity);
        println!("{:<10} e(x) = {}, harmonics {:?}", "", info.forcing, info.harmonics);
        println!("{:<10} {}", "", info.note);
    }
}
