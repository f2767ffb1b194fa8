use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{solve_avi, solve_lcp_enumerate, AviInstance, Cone, LowerSolveResult};
use crate::error::{check_len, MpecError, Result};
use crate::model::Mpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReactionMode {
    /// Exhaustive complementary-pattern enumeration (orthant lower levels).
    Enumerate,
    /// Fixed-point solve, valid for strongly monotone maps.
    Monotone,
}

/// The lower-level solution set `S(x)`.
pub fn reaction_map(
    problem: &dyn Mpec,
    x: &DVector<f64>,
    mode: ReactionMode,
) -> Result<LowerSolveResult> {
    check_len("x", x.len(), problem.n())?;
    if let Some(set) = problem.analytic_reaction(x) {
        return Ok(LowerSolveResult::from_set(set, 0.0));
    }
    let Some(p) = problem.as_affine() else {
        return Err(MpecError::Unsupported(
            "reaction map needs an affine problem or a built-in instance with a closed-form map"
                .into(),
        ));
    };
    let offset = &p.vi.constant + &p.vi.x_coef * x;
    match mode {
        ReactionMode::Enumerate => {
            if !p.has_orthant_lower() {
                return Err(MpecError::Unsupported(
                    "enumeration mode needs the orthant lower level y ≥ 0".into(),
                ));
            }
            solve_lcp_enumerate(&p.vi.y_coef, &offset)
        }
        ReactionMode::Monotone => {
            let cone = if p.has_orthant_lower() {
                Cone::Orthant
            } else {
                Cone::Polyhedron(p.lower_set_at(x))
            };
            let inst = AviInstance {
                matrix: p.vi.y_coef.clone(),
                offset,
                cone,
            };
            solve_avi(&inst, &DVector::zeros(p.m))
        }
    }
}
