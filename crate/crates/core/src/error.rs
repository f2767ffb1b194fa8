use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = MpecError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MpecError {
    /// Malformed caller input: wrong vector length, bad argument value.
    #[error("input error: {0}")]
    Input(String),

    #[error("invalid problem: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown instance `{name}` (available: {})", .available.join(", "))]
    UnknownInstance {
        name: String,
        available: Vec<&'static str>,
    },

    /// The operation is not defined for this problem structure
    /// (non-orthant normal map, nonconvex objective, x-dependent lower set).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A mathematical precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("size limit exceeded: {what} = {value} > cap {cap}")]
    Size {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("iteration limit reached in {0}")]
    NotConverged(&'static str),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(MpecError::Input(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}
