use nalgebra::{DMatrix, DVector};

use super::{LowerSolveResult, SolveStatus};
use crate::error::{check_len, Result};
use crate::linalg;
use crate::reformulate::FbSystem;
use crate::tol;

const MAX_ITER: usize = 200;
const MAX_HALVINGS: usize = 40;
const ARMIJO: f64 = 1e-4;
const REGULARIZATION: f64 = 1e-10;

/// Damped semismooth Newton on the Fischer–Burmeister residual in `(y, λ)`
/// with `x` fixed. Backtracking halves the step until the squared residual
/// drops by the Armijo factor.
pub fn solve_fb_newton(
    system: &FbSystem,
    x: &DVector<f64>,
    start: (&DVector<f64>, &DVector<f64>),
) -> Result<LowerSolveResult> {
    let (m, l) = (system.kkt.m(), system.kkt.num_pairs());
    check_len("x", x.len(), system.kkt.n())?;
    check_len("y0", start.0.len(), m)?;
    check_len("lambda0", start.1.len(), l)?;

    let mut y = start.0.clone();
    let mut lambda = start.1.clone();
    let mut r = system.residual_unchecked(x, &y, &lambda);
    let mut trace = vec![r.norm()];
    let mut diagnostic = None;
    let mut iterations = 0;

    while r.norm() > tol::EQ && iterations < MAX_ITER {
        let jac = system.jacobian(x, &y, &lambda);
        let dir = match linalg::solve_square(&jac, &(-&r)) {
            Some(d) => d,
            None => {
                let reg = &jac + DMatrix::identity(m + l, m + l) * REGULARIZATION;
                match linalg::solve_square(&reg, &(-&r)) {
                    Some(d) => d,
                    None => {
                        diagnostic = Some(format!(
                            "generalized Jacobian singular after regularization at iteration {iterations}"
                        ));
                        break;
                    }
                }
            }
        };
        let merit = r.norm_squared();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let yt = &y + dir.rows(0, m) * t;
            let lt = &lambda + dir.rows(m, l) * t;
            let rt = system.residual_unchecked(x, &yt, &lt);
            if rt.norm_squared() <= (1.0 - 2.0 * ARMIJO * t) * merit {
                y = yt;
                lambda = lt;
                r = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            diagnostic = Some(format!("line search failed at iteration {iterations}"));
            break;
        }
        trace.push(r.norm());
    }

    let residual = r.norm();
    let converged = residual <= tol::EQ;
    if !converged && diagnostic.is_none() {
        diagnostic = Some("Newton iteration cap reached".into());
    }
    Ok(LowerSolveResult {
        solutions: vec![y],
        status: if converged {
            SolveStatus::Unique
        } else {
            SolveStatus::NotConverged
        },
        iterations,
        residual,
        multipliers: Some(lambda),
        trace,
        diagnostic,
    })
}
