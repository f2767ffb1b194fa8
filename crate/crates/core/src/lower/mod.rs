//! Lower-level equilibrium solvers: projections, the projection fixed-point
//! method for strongly monotone affine VIs, semismooth Newton on the
//! Fischer–Burmeister equations, and exhaustive LCP enumeration.

pub(crate) mod avi;
mod lcp;
mod newton;
mod project;
mod reaction;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use avi::solve_avi;
pub use lcp::{solve_lcp_enumerate, ENUMERATION_CAP};
pub use newton::solve_fb_newton;
pub use project::{project_box, project_orthant, project_polyhedron};
pub use reaction::{reaction_map, ReactionMode};

use crate::model::Polyhedron;

/// Feasible set of a frozen lower-level VI.
#[derive(Clone, Debug, PartialEq)]
pub enum Cone {
    Orthant,
    Box { lo: DVector<f64>, hi: DVector<f64> },
    Polyhedron(Polyhedron),
}

/// `VI(y ↦ M y + r, C)`: the lower level with `x` frozen, `r = q + N x`.
#[derive(Clone, Debug, PartialEq)]
pub struct AviInstance {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub cone: Cone,
}

impl AviInstance {
    pub fn dim(&self) -> usize {
        self.offset.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Unique,
    Multiple,
    None,
    NotConverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerSolveResult {
    #[serde(with = "crate::serde_vec::dvec_list")]
    pub solutions: Vec<DVector<f64>>,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Final natural-residual norm (largest over returned solutions).
    pub residual: f64,
    /// KKT multipliers of the returned solution, when the solver produces them.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_vec::opt_dvec"
    )]
    pub multipliers: Option<DVector<f64>>,
    /// Residual norm after each accepted iterate (Newton only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
    /// Non-fatal notes such as a singular Jacobian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl LowerSolveResult {
    pub(crate) fn from_set(solutions: Vec<DVector<f64>>, residual: f64) -> Self {
        let status = match solutions.len() {
            0 => SolveStatus::None,
            1 => SolveStatus::Unique,
            _ => SolveStatus::Multiple,
        };
        Self {
            solutions,
            status,
            iterations: 0,
            residual,
            multipliers: None,
            trace: Vec::new(),
            diagnostic: None,
        }
    }
}
