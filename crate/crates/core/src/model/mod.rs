//! Problem data: quadratic objective, polyhedral joint constraints, the affine
//! lower-level map and constraints, plus the evaluator-based general form.

mod format;
mod general;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, MpecError, Result};
use crate::tol;

pub use format::{to_rows as format_rows, MatrixRows, ProblemFile};
pub use general::{builtin, GeneralMpec, ReactionFn, BUILTIN_NAMES};

/// One problem-data defect, addressed by a JSON-style path such as `lower.A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// `{z : E z ≤ e}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    pub lhs: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl Polyhedron {
    pub fn new(lhs: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if lhs.nrows() != rhs.len() {
            return Err(MpecError::Input(format!(
                "polyhedron has {} rows but {} right-hand sides",
                lhs.nrows(),
                rhs.len()
            )));
        }
        Ok(Self { lhs, rhs })
    }

    /// The whole space of dimension `dim` (no rows).
    pub fn free(dim: usize) -> Self {
        Self {
            lhs: DMatrix::zeros(0, dim),
            rhs: DVector::zeros(0),
        }
    }

    /// Nonnegative orthant `{z ≥ 0}` written as `-z ≤ 0`.
    pub fn orthant(dim: usize) -> Self {
        Self {
            lhs: -DMatrix::identity(dim, dim),
            rhs: DVector::zeros(dim),
        }
    }

    /// Box `lo ≤ z ≤ hi`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        let d = lo.len();
        let mut lhs = DMatrix::zeros(2 * d, d);
        let mut rhs = DVector::zeros(2 * d);
        for i in 0..d {
            lhs[(2 * i, i)] = 1.0;
            rhs[2 * i] = hi[i];
            lhs[(2 * i + 1, i)] = -1.0;
            rhs[2 * i + 1] = -lo[i];
        }
        Self { lhs, rhs }
    }

    pub fn dim(&self) -> usize {
        self.lhs.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.lhs.nrows()
    }

    /// Largest row violation `max_i (E z - e)_i`, or `-inf` with no rows.
    pub fn max_violation(&self, z: &DVector<f64>) -> f64 {
        (&self.lhs * z - &self.rhs)
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.num_rows() == 0 || self.max_violation(z) <= tol
    }

    /// Appends the rows of `other`, which must have the same dimension.
    pub fn stack(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim(), other.dim());
        let k = self.num_rows();
        let mut lhs = DMatrix::zeros(k + other.num_rows(), self.dim());
        lhs.rows_mut(0, k).copy_from(&self.lhs);
        lhs.rows_mut(k, other.num_rows()).copy_from(&other.lhs);
        let rhs = DVector::from_iterator(
            k + other.num_rows(),
            self.rhs.iter().chain(other.rhs.iter()).cloned(),
        );
        Polyhedron { lhs, rhs }
    }
}

/// `½ zᵀQz + cᵀz + c0`, with `Q` stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
    asymmetry: f64,
}

impl QuadraticForm {
    pub fn new(hessian: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Self {
        let asymmetry = if hessian.is_square() {
            (&hessian - hessian.transpose()).amax()
        } else {
            0.0
        };
        let hessian = if hessian.is_square() {
            (&hessian + hessian.transpose()) * 0.5
        } else {
            hessian
        };
        Self {
            hessian,
            linear,
            constant,
            asymmetry,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(DMatrix::zeros(dim, dim), DVector::zeros(dim), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    /// Largest entrywise `|Q - Qᵀ|` seen before symmetrization.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.hessian * z)) + self.linear.dot(z) + self.constant
    }

    pub fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.hessian * z + &self.linear
    }
}

/// `constant + x_coef·x + y_coef·y`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub x_coef: DMatrix<f64>,
    pub y_coef: DMatrix<f64>,
    pub constant: DVector<f64>,
}

impl AffineMap {
    pub fn zeros(rows: usize, n: usize, m: usize) -> Self {
        Self {
            x_coef: DMatrix::zeros(rows, n),
            y_coef: DMatrix::zeros(rows, m),
            constant: DVector::zeros(rows),
        }
    }

    pub fn rows(&self) -> usize {
        self.constant.len()
    }

    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.constant + &self.x_coef * x + &self.y_coef * y
    }
}

/// An MPEC with affine equilibrium constraints.
///
/// Upper level: minimize `objective(x, y)` over `(x, y) ∈ joint`. Lower level:
/// `y` solves the VI with map `F = vi.constant + vi.x_coef·x + vi.y_coef·y`
/// (usually written `q + Nx + My`) over `C(x) = {y : g(x, y) ≤ 0}` with
/// `g = lower.constant + lower.x_coef·x + lower.y_coef·y` (`b + Ax + By`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ProblemFile", try_from = "ProblemFile")]
pub struct AffineMpec {
    pub n: usize,
    pub m: usize,
    pub objective: QuadraticForm,
    pub joint: Polyhedron,
    pub vi: AffineMap,
    pub lower: AffineMap,
}

impl AffineMpec {
    /// Builds and validates.
    pub fn new(
        n: usize,
        m: usize,
        objective: QuadraticForm,
        joint: Polyhedron,
        vi: AffineMap,
        lower: AffineMap,
    ) -> Result<Self> {
        let p = Self {
            n,
            m,
            objective,
            joint,
            vi,
            lower,
        };
        let v = p.validate();
        if v.is_empty() {
            Ok(p)
        } else {
            Err(MpecError::Invalid(v))
        }
    }

    /// Number of lower-level constraints ℓ.
    pub fn num_constraints(&self) -> usize {
        self.lower.rows()
    }

    /// Every dimension, finiteness and shape defect. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let (n, m, l) = (self.n, self.m, self.num_constraints());
        let d = n + m;
        let mut out = Vec::new();
        let mut shape = |path: &str, mat: &DMatrix<f64>, rows: usize, cols: usize, what: &str| {
            if mat.nrows() != rows || mat.ncols() != cols {
                out.push(Violation::new(
                    path,
                    format!(
                        "is {}x{}, expected {rows}x{cols} ({what})",
                        mat.nrows(),
                        mat.ncols()
                    ),
                ));
            }
        };
        shape("objective.Q", &self.objective.hessian, d, d, "n+m square");
        shape(
            "Z.E",
            &self.joint.lhs,
            self.joint.rhs.len(),
            d,
            "rows of e, n+m columns",
        );
        shape("F.M", &self.vi.y_coef, m, m, "m square");
        shape("F.N", &self.vi.x_coef, m, n, "m by n");
        if self.lower.x_coef.nrows() != l || self.lower.x_coef.ncols() != n {
            out.push(Violation::new(
                "lower.A",
                format!(
                    "is {}x{}; row count must match the {l} entries of lower.b and column count n={n}",
                    self.lower.x_coef.nrows(),
                    self.lower.x_coef.ncols()
                ),
            ));
        }
        if self.lower.y_coef.nrows() != l || self.lower.y_coef.ncols() != m {
            out.push(Violation::new(
                "lower.B",
                format!(
                    "is {}x{}; row count must match the {l} entries of lower.b and column count m={m}",
                    self.lower.y_coef.nrows(),
                    self.lower.y_coef.ncols()
                ),
            ));
        }
        if self.objective.linear.len() != d {
            out.push(Violation::new(
                "objective.c",
                format!(
                    "has {} entries, expected n+m={d}",
                    self.objective.linear.len()
                ),
            ));
        }
        if self.vi.constant.len() != m {
            out.push(Violation::new(
                "F.q",
                format!("has {} entries, expected m={m}", self.vi.constant.len()),
            ));
        }

        let finite: [(&str, &[f64]); 11] = [
            ("objective.Q", self.objective.hessian.as_slice()),
            ("objective.c", self.objective.linear.as_slice()),
            (
                "objective.c0",
                std::slice::from_ref(&self.objective.constant),
            ),
            ("Z.E", self.joint.lhs.as_slice()),
            ("Z.e", self.joint.rhs.as_slice()),
            ("F.M", self.vi.y_coef.as_slice()),
            ("F.N", self.vi.x_coef.as_slice()),
            ("F.q", self.vi.constant.as_slice()),
            ("lower.A", self.lower.x_coef.as_slice()),
            ("lower.B", self.lower.y_coef.as_slice()),
            ("lower.b", self.lower.constant.as_slice()),
        ];
        for (path, data) in finite {
            if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
                out.push(Violation::new(
                    path,
                    format!("contains non-finite entry {bad}"),
                ));
            }
        }
        out
    }

    /// Non-fatal findings (currently: asymmetric Q before symmetrization).
    pub fn warnings(&self) -> Vec<Violation> {
        let a = self.objective.asymmetry();
        if a > tol::SYMMETRY {
            vec![Violation::new(
                "objective.Q",
                format!("asymmetric by up to {a:e}; the symmetric part (Q+Qᵀ)/2 is used"),
            )]
        } else {
            Vec::new()
        }
    }

    fn check_xy(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        check_len("x", x.len(), self.n)?;
        check_len("y", y.len(), self.m)
    }

    /// `F(x, y) = q + Nx + My`.
    pub fn eval_map(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_xy(x, y)?;
        Ok(self.vi.eval(x, y))
    }

    /// `g(x, y) = b + Ax + By`.
    pub fn eval_g(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_xy(x, y)?;
        Ok(self.lower.eval(x, y))
    }

    /// Slack `u = -g(x, y)`.
    pub fn eval_slack(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(-self.eval_g(x, y)?)
    }

    pub fn eval_objective(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check_xy(x, y)?;
        Ok(self.objective.value(&stack(x, y)))
    }

    /// True when the lower feasible set is exactly `{y ≥ 0}`, encoded row by
    /// row as `-y_i ≤ 0`.
    pub fn has_orthant_lower(&self) -> bool {
        self.num_constraints() == self.m
            && self.lower.x_coef.iter().all(|&v| v == 0.0)
            && self.lower.constant.iter().all(|&v| v == 0.0)
            && self.lower.y_coef == -DMatrix::<f64>::identity(self.m, self.m)
    }

    /// Lower feasible set for fixed `x`: `{y : By ≤ -b - Ax}`.
    pub fn lower_set_at(&self, x: &DVector<f64>) -> Polyhedron {
        Polyhedron {
            lhs: self.lower.y_coef.clone(),
            rhs: -(&self.lower.constant + &self.lower.x_coef * x),
        }
    }
}

pub(crate) fn stack(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(x.len() + y.len(), x.iter().chain(y.iter()).cloned())
}

/// Common view of affine and evaluator-based problems used by the
/// reformulation and diagnostic code.
///
/// Methods assume `x` and `y` have lengths `n()` and `m()`; callers check.
pub trait Mpec: Send + Sync {
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn objective_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;
    /// The lower-level VI map `F(x, y)`.
    fn vi_map(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    /// `g(x, y)`, feasible when `≤ 0`.
    fn constraints(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    /// `∇_y g(x, y)` as an ℓ×m matrix, row i the gradient of `g_i`.
    fn constraint_jacobian_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64>;
    fn joint(&self) -> &Polyhedron;
    /// Closed-form reaction map for built-in instances.
    fn analytic_reaction(&self, _x: &DVector<f64>) -> Option<Vec<DVector<f64>>> {
        None
    }
    fn as_affine(&self) -> Option<&AffineMpec> {
        None
    }
    /// Registry name for built-in instances.
    fn name(&self) -> Option<&str> {
        None
    }

    fn check_point(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        check_len("x", x.len(), self.n())?;
        check_len("y", y.len(), self.m())
    }
}

impl Mpec for AffineMpec {
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn num_constraints(&self) -> usize {
        self.lower.rows()
    }
    fn objective_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.objective.value(&stack(x, y))
    }
    fn vi_map(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.vi.eval(x, y)
    }
    fn constraints(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.lower.eval(x, y)
    }
    fn constraint_jacobian_y(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        self.lower.y_coef.clone()
    }
    fn joint(&self) -> &Polyhedron {
        &self.joint
    }
    fn as_affine(&self) -> Option<&AffineMpec> {
        Some(self)
    }
}
