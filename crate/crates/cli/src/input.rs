use std::fs;
use std::path::Path;

use mpec::model::{builtin, AffineMpec, GeneralMpec, Mpec};
use mpec::{DVector, MpecError};

use crate::commands::Failure;

pub enum Problem {
    Affine(AffineMpec),
    Builtin(GeneralMpec),
}

impl Problem {
    pub fn as_dyn(&self) -> &dyn Mpec {
        match self {
            Problem::Affine(p) => p,
            Problem::Builtin(p) => p,
        }
    }

    pub fn affine(&self, verb: &str) -> Result<&AffineMpec, Failure> {
        match self {
            Problem::Affine(p) => Ok(p),
            Problem::Builtin(p) => Err(Failure::unsupported(format!(
                "`{verb}` needs an affine problem file; built-in `{}` is evaluator-based",
                p.name
            ))),
        }
    }
}

pub fn load(input: &str) -> Result<Problem, Failure> {
    if let Some(name) = input.strip_prefix("builtin:") {
        return builtin(name).map(Problem::Builtin).map_err(Failure::from);
    }
    let text = fs::read_to_string(Path::new(input))
        .map_err(|e| Failure::input(format!("cannot read {input}: {e}")))?;
    let problem = AffineMpec::from_json(&text)?;
    for w in problem.warnings() {
        eprintln!("mpec: warning: {w}");
    }
    Ok(Problem::Affine(problem))
}

/// Comma-separated finite decimals, no spaces.
pub fn parse_vector(text: &str, what: &str) -> Result<DVector<f64>, Failure> {
    if text.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let values = text
        .split(',')
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Failure::input(format!(
                "{what}: `{s}` is not a finite number"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DVector::from_vec(values))
}

/// Splits a stacked `(x, y)` point.
pub fn parse_point(
    text: &str,
    problem: &dyn Mpec,
) -> Result<(DVector<f64>, DVector<f64>), Failure> {
    let z = parse_vector(text, "--point")?;
    let (n, m) = (problem.n(), problem.m());
    if z.len() != n + m {
        return Err(MpecError::Input(format!(
            "--point has {} entries, expected n+m = {}",
            z.len(),
            n + m
        ))
        .into());
    }
    Ok((z.rows(0, n).into_owned(), z.rows(n, m).into_owned()))
}
