//! Global solution of small MPAECs: the KKT feasible set is the union of
//! 2^ℓ polyhedral pieces, one per complementarity regime, and a convex
//! quadratic objective is minimized exactly on each piece.

mod qp;
mod regime;
mod simplex;

pub use qp::{solve_qp_on_polyhedron, QpOutcome};
pub use regime::{
    enumerate_regimes, global_solve, regime_polyhedron, BestPoint, GlobalSolveReport, PieceStatus,
    ProblemStatus, Regime, RegimeSummary, UnboundedRay, REGIME_CAP,
};
