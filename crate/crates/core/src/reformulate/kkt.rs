use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_len, Result};
use crate::model::{AffineMpec, Mpec};
use crate::tol;

/// Lower-level KKT system in the variables `(x, y, λ)`:
/// `F(x,y) + ∇_y g(x,y)ᵀλ = 0`, `0 ≤ λ ⊥ u(x,y) ≥ 0` with slack `u = -g`.
#[derive(Clone)]
pub struct KktSystem {
    problem: Arc<dyn Mpec>,
    /// Set for evaluator-based problems, where lower-level convexity (and so
    /// the KKT/VI equivalence) is the caller's responsibility.
    pub warning: Option<String>,
}

impl std::fmt::Debug for KktSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KktSystem")
            .field("n", &self.n())
            .field("m", &self.m())
            .field("pairs", &self.num_pairs())
            .field("affine", &self.affine().is_some())
            .finish()
    }
}

/// Itemized feasibility of one `(x, y, λ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KktCheck {
    pub stationarity: f64,
    pub min_multiplier: f64,
    pub min_slack: f64,
    pub max_product: f64,
    pub feasible: bool,
}

pub fn build_kkt<P: Mpec + Clone + 'static>(problem: &P) -> KktSystem {
    let warning = problem.as_affine().is_none().then(|| {
        "lower-level convexity and a multiplier constraint qualification are assumed, not verified"
            .to_string()
    });
    KktSystem {
        problem: Arc::new(problem.clone()),
        warning,
    }
}

impl KktSystem {
    pub fn n(&self) -> usize {
        self.problem.n()
    }
    pub fn m(&self) -> usize {
        self.problem.m()
    }
    /// Number of complementarity pairs `(λ_i, u_i)`.
    pub fn num_pairs(&self) -> usize {
        self.problem.num_constraints()
    }
    pub fn problem(&self) -> &dyn Mpec {
        self.problem.as_ref()
    }
    pub fn affine(&self) -> Option<&AffineMpec> {
        self.problem.as_affine()
    }

    fn check_dims(&self, x: &DVector<f64>, y: &DVector<f64>, lambda: &DVector<f64>) -> Result<()> {
        self.problem.check_point(x, y)?;
        check_len("lambda", lambda.len(), self.num_pairs())
    }

    /// `F(x,y) + ∇_y g(x,y)ᵀλ`.
    pub fn stationarity(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_dims(x, y, lambda)?;
        Ok(self.stationarity_unchecked(x, y, lambda))
    }

    pub(crate) fn stationarity_unchecked(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> DVector<f64> {
        let f = self.problem.vi_map(x, y);
        if self.num_pairs() == 0 {
            return f;
        }
        f + self.problem.constraint_jacobian_y(x, y).transpose() * lambda
    }

    /// Slacks `u = -g(x, y)`.
    pub fn slacks(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        -self.problem.constraints(x, y)
    }

    pub fn check(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> Result<KktCheck> {
        self.check_dims(x, y, lambda)?;
        let stationarity = self.stationarity_unchecked(x, y, lambda).amax();
        let u = self.slacks(x, y);
        let min_multiplier = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
        let min_slack = u.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_product = lambda
            .iter()
            .zip(u.iter())
            .map(|(l, u)| (l * u).abs())
            .fold(0.0, f64::max);
        let feasible = stationarity <= tol::EQ
            && min_multiplier >= -tol::FEAS
            && min_slack >= -tol::FEAS
            && max_product <= tol::COMP;
        Ok(KktCheck {
            stationarity,
            min_multiplier,
            min_slack,
            max_product,
            feasible,
        })
    }

    pub fn is_feasible(&self, x: &DVector<f64>, y: &DVector<f64>, lambda: &DVector<f64>) -> bool {
        self.check(x, y, lambda).is_ok_and(|c| c.feasible)
    }

    /// Jacobian of the stationarity map with respect to `y` at fixed `(x, λ)`.
    /// Exact for affine problems, central differences otherwise.
    pub(crate) fn stationarity_jacobian_y(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> DMatrix<f64> {
        if let Some(p) = self.affine() {
            return p.vi.y_coef.clone();
        }
        let m = self.m();
        let mut jac = DMatrix::zeros(m, m);
        for j in 0..m {
            let h = 1e-6 * (1.0 + y[j].abs());
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += h;
            ym[j] -= h;
            let diff = (self.stationarity_unchecked(x, &yp, lambda)
                - self.stationarity_unchecked(x, &ym, lambda))
                / (2.0 * h);
            jac.set_column(j, &diff);
        }
        jac
    }
}
