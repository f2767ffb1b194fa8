use std::fmt;
use std::sync::Arc;

use nalgebra::{dmatrix, dvector, DMatrix, DVector};

use super::{Mpec, Polyhedron};
use crate::error::{MpecError, Result};

type ScalarFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// `x ↦ S(x)` for instances with a known closed-form solution set.
pub type ReactionFn = Arc<dyn Fn(&DVector<f64>) -> Vec<DVector<f64>> + Send + Sync>;

pub const BUILTIN_NAMES: [&str; 2] = ["q1", "q3"];

/// Evaluator-backed MPEC for nonlinear lower levels.
#[derive(Clone)]
pub struct GeneralMpec {
    pub name: String,
    n: usize,
    m: usize,
    l: usize,
    objective: ScalarFn,
    vi_map: VectorFn,
    constraints: VectorFn,
    jacobian_y: MatrixFn,
    joint: Polyhedron,
    reaction: Option<ReactionFn>,
}

impl fmt::Debug for GeneralMpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralMpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("l", &self.l)
            .finish_non_exhaustive()
    }
}

impl GeneralMpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        (n, m, l): (usize, usize, usize),
        objective: impl Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync + 'static,
        vi_map: impl Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        constraints: impl Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        jacobian_y: impl Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        joint: Polyhedron,
    ) -> Result<Self> {
        if joint.dim() != n + m {
            return Err(MpecError::Input(format!(
                "joint polyhedron has dimension {}, expected n+m={}",
                joint.dim(),
                n + m
            )));
        }
        Ok(Self {
            name: name.into(),
            n,
            m,
            l,
            objective: Arc::new(objective),
            vi_map: Arc::new(vi_map),
            constraints: Arc::new(constraints),
            jacobian_y: Arc::new(jacobian_y),
            joint,
            reaction: None,
        })
    }

    pub fn with_reaction(
        mut self,
        reaction: impl Fn(&DVector<f64>) -> Vec<DVector<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.reaction = Some(Arc::new(reaction));
        self
    }

    /// Checks evaluator output shapes at one point.
    pub fn check_shapes(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        self.check_point(x, y)?;
        let f = self.vi_map(x, y);
        let g = self.constraints(x, y);
        let j = self.constraint_jacobian_y(x, y);
        if f.len() != self.m || g.len() != self.l || j.shape() != (self.l, self.m) {
            return Err(MpecError::Input(format!(
                "evaluators of `{}` returned F: {}, g: {}, ∇g: {:?}; expected {}, {}, ({}, {})",
                self.name,
                f.len(),
                g.len(),
                j.shape(),
                self.m,
                self.l,
                self.l,
                self.m
            )));
        }
        Ok(())
    }
}

impl Mpec for GeneralMpec {
    fn name(&self) -> Option<&str> {
        Some(&self.name)
    }
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn num_constraints(&self) -> usize {
        self.l
    }
    fn objective_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (self.objective)(x, y)
    }
    fn vi_map(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        (self.vi_map)(x, y)
    }
    fn constraints(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        (self.constraints)(x, y)
    }
    fn constraint_jacobian_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        (self.jacobian_y)(x, y)
    }
    fn joint(&self) -> &Polyhedron {
        &self.joint
    }
    fn analytic_reaction(&self, x: &DVector<f64>) -> Option<Vec<DVector<f64>>> {
        self.reaction.as_ref().map(|r| r(x))
    }
}

/// Built-in exercise instances.
///
/// * `q1`: `x ∈ [-1, 1]`, `y ∈ argmin { v : -1 ≤ v ≤ 1, xv ≤ 0 }`, leader
///   objective `f = y`. Constraint order is `(xv, v - 1, -v - 1)`; the lower
///   objective `v` gives the constant VI map `F = 1`.
/// * `q3`: `g₁ = y₁ + y₂² - x₁`, `g₂ = y₁ - x₂`, `Z = ℝ⁴`, zero VI map and objective.
pub fn builtin(name: &str) -> Result<GeneralMpec> {
    match name {
        "q1" => Ok(GeneralMpec::new(
            "q1",
            (1, 1, 3),
            |_, y| y[0],
            |_, _| dvector![1.0],
            |x, y| dvector![x[0] * y[0], y[0] - 1.0, -y[0] - 1.0],
            |x, _| dmatrix![x[0]; 1.0; -1.0],
            Polyhedron::boxed(&[-1.0, f64::NEG_INFINITY], &[1.0, f64::INFINITY]).drop_infinite(),
        )?
        .with_reaction(|x| {
            if x[0] >= 0.0 {
                vec![dvector![-1.0]]
            } else {
                vec![dvector![0.0]]
            }
        })),
        "q3" => GeneralMpec::new(
            "q3",
            (2, 2, 2),
            |_, _| 0.0,
            |_, _| DVector::zeros(2),
            |x, y| dvector![y[0] + y[1] * y[1] - x[0], y[0] - x[1]],
            |_, y| dmatrix![1.0, 2.0 * y[1]; 1.0, 0.0],
            Polyhedron::free(4),
        ),
        _ => Err(MpecError::UnknownInstance {
            name: name.to_string(),
            available: BUILTIN_NAMES.to_vec(),
        }),
    }
}

impl Polyhedron {
    /// Removes rows with an infinite right-hand side (vacuous bounds).
    pub fn drop_infinite(&self) -> Polyhedron {
        let keep: Vec<usize> = (0..self.num_rows())
            .filter(|&i| self.rhs[i].is_finite())
            .collect();
        Polyhedron {
            lhs: self.lhs.select_rows(&keep),
            rhs: self.rhs.select_rows(&keep),
        }
    }
}
