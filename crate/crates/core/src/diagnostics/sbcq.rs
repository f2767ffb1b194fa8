use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::min_norm_multipliers;
use crate::error::{MpecError, Result};
use crate::linalg;
use crate::lower::{reaction_map, ReactionMode};
use crate::model::Mpec;
use crate::tol;

pub const SBCQ_MIN_LENGTH: usize = 8;
/// Divergence needs `final / initial` above this ratio...
const GROWTH_RATIO: f64 = 10.0;
/// ...and a log-log tail slope of at least this.
const MIN_EXPONENT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SbcqVerdict {
    Bounded,
    Diverging,
    NoMultiplier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SbcqProbeResult {
    /// `‖λ_k‖` of the minimal-norm multiplier, `null` where none exists.
    pub multiplier_norms: Vec<Option<f64>>,
    pub verdict: SbcqVerdict,
    /// Least-squares slope of `log ‖λ_k‖` against `log k` on the final half.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Tracks minimal-norm multipliers along `(x_k, y_k)`.
///
/// Each point must be lower-level feasible and, when the problem admits a
/// reaction map, an element of `S(x_k)`.
pub fn probe_sbcq(
    problem: &dyn Mpec,
    sequence: &[(DVector<f64>, DVector<f64>)],
) -> Result<SbcqProbeResult> {
    if sequence.len() < SBCQ_MIN_LENGTH {
        return Err(MpecError::Input(format!(
            "sequence has {} points, at least {SBCQ_MIN_LENGTH} are needed",
            sequence.len()
        )));
    }
    let mut unverified = false;
    let mut norms = Vec::with_capacity(sequence.len());
    for (k, (x, y)) in sequence.iter().enumerate() {
        let at = |e: MpecError| match e {
            MpecError::Input(msg) | MpecError::Precondition(msg) => {
                MpecError::Precondition(format!("sequence point {k}: {msg}"))
            }
            other => other,
        };
        problem.check_point(x, y).map_err(at)?;
        match reaction_map(problem, x, ReactionMode::Enumerate) {
            Ok(s) => {
                if !s
                    .solutions
                    .iter()
                    .any(|r| (r - y).norm() <= tol::DEDUP.max(tol::FEAS))
                {
                    return Err(MpecError::Precondition(format!(
                        "sequence point {k}: y is not in the lower-level solution set S(x)"
                    )));
                }
            }
            Err(MpecError::Unsupported(_)) => unverified = true,
            Err(e) => return Err(at(e)),
        }
        let lam = min_norm_multipliers(problem, x, y).map_err(at)?;
        norms.push(lam.map(|l| l.norm()));
    }

    let warning = unverified.then(|| {
        "membership y_k ∈ S(x_k) was not verified: no reaction map for this problem".to_string()
    });
    let Some(values) = norms.iter().copied().collect::<Option<Vec<f64>>>() else {
        return Ok(SbcqProbeResult {
            multiplier_norms: norms,
            verdict: SbcqVerdict::NoMultiplier,
            growth_exponent: None,
            warning,
        });
    };
    let growth_exponent = divergence_exponent(&values);
    Ok(SbcqProbeResult {
        multiplier_norms: norms,
        verdict: if growth_exponent.is_some() {
            SbcqVerdict::Diverging
        } else {
            SbcqVerdict::Bounded
        },
        growth_exponent,
        warning,
    })
}

/// Tail slope when the norms are strictly increasing over the final half,
/// grow by more than [`GROWTH_RATIO`] overall and the slope reaches
/// [`MIN_EXPONENT`]; `None` otherwise.
fn divergence_exponent(norms: &[f64]) -> Option<f64> {
    let start = norms.len() / 2;
    let tail = &norms[start..];
    if !tail.windows(2).all(|w| w[1] > w[0]) {
        return None;
    }
    let (first, last) = (norms[0], norms[norms.len() - 1]);
    if !(last > GROWTH_RATIO * first) {
        return None;
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| (((start + i + 1) as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let design = DMatrix::from_fn(pts.len(), 2, |r, c| if c == 0 { 1.0 } else { pts[r].0 });
    let rhs = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let slope = linalg::lstsq(&design, &rhs)[1];
    (slope >= MIN_EXPONENT).then_some(slope)
}
