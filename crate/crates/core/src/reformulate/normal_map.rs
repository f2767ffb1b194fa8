use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_len, MpecError, Result};
use crate::linalg;
use crate::model::AffineMpec;
use crate::tol;

/// Orthant normal map `(x, z) ↦ M z⁺ + N x + q − z⁻`, with `y = z⁺`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalMapSystem {
    pub n: usize,
    pub m: usize,
    pub map_y: DMatrix<f64>,
    pub map_x: DMatrix<f64>,
    pub constant: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalMapRoot {
    #[serde(with = "crate::serde_vec::dvec")]
    pub z: DVector<f64>,
    #[serde(with = "crate::serde_vec::dvec")]
    pub y: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn positive_part(z: &DVector<f64>) -> DVector<f64> {
    z.map(|v| v.max(0.0))
}

pub fn negative_part(z: &DVector<f64>) -> DVector<f64> {
    z.map(|v| (-v).max(0.0))
}

pub fn build_normal_map(problem: &AffineMpec) -> Result<NormalMapSystem> {
    if !problem.has_orthant_lower() {
        return Err(MpecError::Unsupported(
            "normal map is only built for the orthant cone: lower constraints must be exactly -y ≤ 0".into(),
        ));
    }
    Ok(NormalMapSystem {
        n: problem.n,
        m: problem.m,
        map_y: problem.vi.y_coef.clone(),
        map_x: problem.vi.x_coef.clone(),
        constant: problem.vi.constant.clone(),
    })
}

impl NormalMapSystem {
    pub fn eval(&self, x: &DVector<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("x", x.len(), self.n)?;
        check_len("z", z.len(), self.m)?;
        Ok(self.eval_unchecked(x, z))
    }

    fn eval_unchecked(&self, x: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        &self.map_y * positive_part(z) + &self.map_x * x + &self.constant - negative_part(z)
    }

    /// Lower-level solution encoded by `z`.
    pub fn recover(&self, z: &DVector<f64>) -> DVector<f64> {
        positive_part(z)
    }

    /// Inverse of `recover` on VI solutions: `z = y − F(x, y)`.
    pub fn encode(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        y - (&self.map_y * y + &self.map_x * x + &self.constant)
    }

    /// Generalized Jacobian `M D + (I − D)` with `D_ii = [z_i ≥ 0]`.
    pub fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |i, j| {
            if z[j] >= 0.0 {
                self.map_y[(i, j)]
            } else if i == j {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Damped piecewise-linear Newton from `z0`.
    pub fn solve_newton(&self, x: &DVector<f64>, z0: &DVector<f64>) -> Result<NormalMapRoot> {
        check_len("x", x.len(), self.n)?;
        check_len("z", z0.len(), self.m)?;
        let mut z = z0.clone();
        let mut r = self.eval_unchecked(x, &z);
        let mut iterations = 0;
        while r.norm() > tol::EQ && iterations < 200 {
            let jac = self.jacobian(&z);
            let Some(step) = linalg::solve_square(&jac, &(-&r)) else {
                break;
            };
            let merit = r.norm_squared();
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial = &z + &step * t;
                let rt = self.eval_unchecked(x, &trial);
                if rt.norm_squared() <= (1.0 - 2e-4 * t) * merit {
                    z = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            iterations += 1;
            if !accepted {
                break;
            }
        }
        let residual = r.norm();
        Ok(NormalMapRoot {
            y: self.recover(&z),
            z,
            residual,
            iterations,
            converged: residual <= tol::EQ,
        })
    }
}
