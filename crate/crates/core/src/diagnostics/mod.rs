//! Structure and qualification tests: monotonicity of the lower-level map,
//! LICQ/MFCQ/CRCQ at a point, SBCQ probing along sequences, and
//! optimistic/pessimistic leader values over a response set.

mod cq;
mod monotonicity;
mod multipliers;
mod sbcq;
mod stackelberg;

pub use cq::{
    check_cq, CqOptions, CqReport, CrcqCheck, CrcqWitness, LicqCheck, MfcqCheck, Verdict,
    CRCQ_SUBSET_CAP,
};
pub use monotonicity::{classify_matrix, MonotonicityClass, MonotonicityVerdict};
pub use multipliers::min_norm_multipliers;
pub use sbcq::{probe_sbcq, SbcqProbeResult, SbcqVerdict, SBCQ_MIN_LENGTH};
pub use stackelberg::{stackelberg_values, StackelbergValues};

use nalgebra::DVector;

use crate::error::{MpecError, Result};
use crate::model::Mpec;
use crate::tol;

/// Indices with `|g_i| ≤ τ_feas`, after checking `g ≤ τ_feas`.
pub(crate) fn active_set(
    problem: &dyn Mpec,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<Vec<usize>> {
    problem.check_point(x, y)?;
    let g = problem.constraints(x, y);
    if let Some((i, v)) = g
        .iter()
        .enumerate()
        .find(|(_, v)| **v > tol::FEAS || !v.is_finite())
    {
        return Err(MpecError::Precondition(format!(
            "point is not lower-level feasible: g[{i}] = {v:e}"
        )));
    }
    Ok((0..g.len()).filter(|&i| g[i].abs() <= tol::FEAS).collect())
}
