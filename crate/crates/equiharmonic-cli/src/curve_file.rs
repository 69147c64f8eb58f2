//! Curve persistence: CSV for plotting and JSON for verification round
//! trips. CSV numbers carry 17 significant digits so doubles round-trip
//! exactly; the decimal separator is always a dot and lines end with LF.

use crate::CliError;
use equiharmonic::{MuVector, Signature, SolutionCurve, SolutionRecord};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// 17 significant digits: exact round trip for f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `xi,mu_<k1>[,mu_<k2>...],uprime0,sup_norm_u,residual_sup,newton_iterations`
pub fn csv_header(harmonics: &[usize]) -> String {
    let mu_cols: Vec<String> = harmonics.iter().map(|k| format!("mu_{k}")).collect();
    format!(
        "xi,{},uprime0,sup_norm_u,residual_sup,newton_iterations",
        mu_cols.join(",")
    )
}

pub fn curve_to_csv(curve: &SolutionCurve, aborted_at: Option<f64>) -> String {
    let mut out = String::new();
    let harmonics = &curve.metadata.harmonics;
    out.push_str(&csv_header(harmonics));
    out.push('\n');
    for rec in &curve.records {
        let xi = rec.xi.get(curve.free_harmonic).unwrap_or(f64::NAN);
        let _ = write!(out, "{}", fmt17(xi));
        for &k in harmonics {
            let _ = write!(out, ",{}", fmt17(rec.mu.get(k).unwrap_or(f64::NAN)));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            fmt17(rec.uprime0),
            fmt17(rec.sup_norm_u()),
            fmt17(rec.residual_sup),
            rec.newton_iterations
        );
    }
    if let Some(at) = aborted_at {
        let _ = writeln!(out, "# ABORTED at xi={}", fmt17(at));
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecordFile {
    /// Full signature, harmonic index -> prescribed projection.
    pub xi: BTreeMap<String, f64>,
    pub mu: BTreeMap<String, f64>,
    pub uprime0: f64,
    pub sup_norm_u: f64,
    pub residual_sup: f64,
    pub newton_iterations: u32,
    pub converged: bool,
    /// Grid samples of u; present only with `--full`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveFile {
    pub problem: String,
    pub problem_hash: String,
    pub free_harmonic: usize,
    pub dxi: f64,
    pub grid_n: usize,
    pub length: f64,
    pub harmonics: Vec<usize>,
    pub step_tol_rel: f64,
    pub residual_tol_rel: f64,
    pub timestamp_epoch_s: u64,
    #[serde(default)]
    pub aborted_at: Option<f64>,
    pub records: Vec<RecordFile>,
}

fn map_of<I: Iterator<Item = (usize, f64)>>(iter: I) -> BTreeMap<String, f64> {
    iter.map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn curve_to_json(
    curve: &SolutionCurve,
    full: bool,
    aborted_at: Option<f64>,
) -> Result<String, CliError> {
    let file = CurveFile {
        problem: curve.problem_name.clone(),
        problem_hash: curve.problem_hash.clone(),
        free_harmonic: curve.free_harmonic,
        dxi: curve.dxi,
        grid_n: curve.metadata.grid_n,
        length: curve.metadata.length,
        harmonics: curve.metadata.harmonics.clone(),
        step_tol_rel: curve.metadata.step_tol_rel,
        residual_tol_rel: curve.metadata.residual_tol_rel,
        timestamp_epoch_s: curve.metadata.timestamp_epoch_s,
        aborted_at,
        records: curve
            .records
            .iter()
            .map(|rec| RecordFile {
                xi: map_of(rec.xi.iter()),
                mu: map_of(rec.mu.iter()),
                uprime0: rec.uprime0,
                sup_norm_u: rec.sup_norm_u(),
                residual_sup: rec.residual_sup,
                newton_iterations: rec.newton_iterations,
                converged: rec.converged,
                u: full.then(|| rec.u.values().to_vec()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file)
        .map_err(|e| CliError::Validation(format!("cannot serialize curve: {e}")))
}

pub fn read_curve_file(path: &str) -> Result<CurveFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed curve file {path}: {e}")))
}

fn parse_harmonic_map(map: &BTreeMap<String, f64>) -> Result<Vec<(usize, f64)>, CliError> {
    map.iter()
        .map(|(k, v)| {
            k.parse::<usize>()
                .map(|k| (k, *v))
                .map_err(|_| CliError::Validation(format!("bad harmonic index `{k}`")))
        })
        .collect()
}

impl RecordFile {
    pub fn signature(&self) -> Result<Signature, CliError> {
        Signature::from_pairs(parse_harmonic_map(&self.xi)?).map_err(CliError::validation)
    }

    pub fn mu_vector(&self) -> Result<MuVector, CliError> {
        MuVector::from_pairs(parse_harmonic_map(&self.mu)?).map_err(CliError::validation)
    }
}

/// One line per solution for `solve` output.
pub fn describe_solution(rec: &SolutionRecord, free_harmonic: usize) -> String {
    let mu: Vec<String> = rec
        .mu
        .iter()
        .map(|(k, v)| format!("mu_{k} = {}", fmt17(v)))
        .collect();
    format!(
        "xi_{} = {}  {}  uprime0 = {}  residual = {:.3e}",
        free_harmonic,
        fmt17(rec.xi.get(free_harmonic).unwrap_or(f64::NAN)),
        mu.join("  "),
        fmt17(rec.uprime0),
        rec.residual_sup
    )
}
