use nalgebra::{DMatrix, DVector};

use super::active_set;
use crate::error::Result;
use crate::global::{solve_qp_on_polyhedron, QpOutcome};
use crate::model::{Mpec, Polyhedron, QuadraticForm};
use crate::tol;

/// Minimal-norm `λ ≥ 0`, zero off the active set, with
/// `F(x,y) + ∇_y g(x,y)ᵀλ = 0`. `None` when no such `λ` exists.
///
/// Fails with a precondition error when `(x, y)` is not lower-level feasible.
pub fn min_norm_multipliers(
    problem: &dyn Mpec,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<Option<DVector<f64>>> {
    let active = active_set(problem, x, y)?;
    let l = problem.num_constraints();
    let f = problem.vi_map(x, y);
    let m = f.len();
    let jac = problem.constraint_jacobian_y(x, y);
    let k = active.len();
    if k == 0 {
        return Ok((f.norm() <= tol::EQ).then(|| DVector::zeros(l)));
    }
    // Columns of Jᵀ restricted to the active set.
    let ja = DMatrix::from_fn(m, k, |r, c| jac[(active[c], r)]);
    let mut lhs = DMatrix::zeros(2 * m + k, k);
    let mut rhs = DVector::zeros(2 * m + k);
    lhs.view_mut((0, 0), (m, k)).copy_from(&ja);
    lhs.view_mut((m, 0), (m, k)).copy_from(&(-&ja));
    rhs.rows_mut(0, m).copy_from(&(-&f));
    rhs.rows_mut(m, m).copy_from(&f);
    for i in 0..k {
        lhs[(2 * m + i, i)] = -1.0;
    }
    let poly = Polyhedron::new(lhs, rhs)?;
    let obj = QuadraticForm::new(DMatrix::identity(k, k) * 2.0, DVector::zeros(k), 0.0);
    let QpOutcome::Optimal { point, .. } = solve_qp_on_polyhedron(&obj, &poly)? else {
        return Ok(None);
    };
    let residual = (&f + &ja * &point).norm();
    if residual > tol::EQ * (1.0 + f.norm()) {
        return Ok(None);
    }
    let mut lambda = DVector::zeros(l);
    for (c, &i) in active.iter().enumerate() {
        lambda[i] = point[c].max(0.0);
    }
    Ok(Some(lambda))
}
