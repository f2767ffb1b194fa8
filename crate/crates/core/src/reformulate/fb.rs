use nalgebra::{DMatrix, DVector};

use super::KktSystem;
use crate::error::Result;

/// `φ(a, b) = √(a² + b²) − (a + b)`; zero exactly when `a ≥ 0, b ≥ 0, ab = 0`.
pub fn fb_value(a: f64, b: f64) -> f64 {
    a.hypot(b) - (a + b)
}

/// `∂φ/∂a = √2/2 − 1` (and the same for `b`) at the origin: the limit along `(1, 1)`.
pub const FB_ORIGIN_DERIVATIVE: f64 = std::f64::consts::FRAC_1_SQRT_2 - 1.0;

/// An element of the generalized gradient of φ, fixed at the origin.
pub fn fb_derivative(a: f64, b: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        (FB_ORIGIN_DERIVATIVE, FB_ORIGIN_DERIVATIVE)
    } else {
        (a / r - 1.0, b / r - 1.0)
    }
}

/// Equation form of the KKT system: stationarity stacked over `φ(λ_i, u_i)`.
#[derive(Clone, Debug)]
pub struct FbSystem {
    pub kkt: KktSystem,
}

pub fn build_fb(kkt: &KktSystem) -> FbSystem {
    FbSystem { kkt: kkt.clone() }
}

impl FbSystem {
    pub fn residual(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let stat = self.kkt.stationarity(x, y, lambda)?;
        Ok(self.stack(stat, x, y, lambda))
    }

    pub(crate) fn residual_unchecked(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> DVector<f64> {
        let stat = self.kkt.stationarity_unchecked(x, y, lambda);
        self.stack(stat, x, y, lambda)
    }

    fn stack(
        &self,
        stat: DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> DVector<f64> {
        let u = self.kkt.slacks(x, y);
        let m = stat.len();
        let l = lambda.len();
        DVector::from_fn(m + l, |i, _| {
            if i < m {
                stat[i]
            } else {
                fb_value(lambda[i - m], u[i - m])
            }
        })
    }

    /// Generalized Jacobian with respect to `(y, λ)` at fixed `x`.
    pub fn jacobian(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> DMatrix<f64> {
        let (m, l) = (self.kkt.m(), self.kkt.num_pairs());
        let mut jac = DMatrix::zeros(m + l, m + l);
        jac.view_mut((0, 0), (m, m))
            .copy_from(&self.kkt.stationarity_jacobian_y(x, y, lambda));
        if l == 0 {
            return jac;
        }
        let grad_g = self.kkt.problem().constraint_jacobian_y(x, y);
        jac.view_mut((0, m), (m, l)).copy_from(&grad_g.transpose());
        let u = self.kkt.slacks(x, y);
        for i in 0..l {
            let (da, db) = fb_derivative(lambda[i], u[i]);
            // u_i = -g_i, so ∂u_i/∂y = -∇_y g_i.
            for j in 0..m {
                jac[(m + i, j)] = -db * grad_g[(i, j)];
            }
            jac[(m + i, m + i)] = da;
        }
        jac
    }
}
