use nalgebra::DVector;

use crate::diagnostics::{classify_matrix, MonotonicityClass, MonotonicityVerdict};
use crate::error::{check_len, MpecError, Result};
use crate::lower::{AviInstance, Cone, SolveStatus};
use crate::model::{stack, AffineMpec, Polyhedron};

/// `min_x f(x, y(x))` over `x ∈ X`, where `y(x)` is the unique lower-level
/// solution. Joint rows of `Z` that involve `y` are kept separately: they
/// constrain `x` only through `y(x)`.
#[derive(Clone, Debug)]
pub struct ImplicitProgram {
    pub problem: AffineMpec,
    /// Rows of `Z` that only involve `x`.
    pub domain: Polyhedron,
    /// Rows of `Z` involving `y`, over the stacked `(x, y)`.
    pub coupling: Polyhedron,
    pub verdict: MonotonicityVerdict,
    step: f64,
}

pub fn build_implicit(problem: &AffineMpec) -> Result<ImplicitProgram> {
    let verdict = classify_matrix(&problem.vi.y_coef)?;
    if verdict.class != MonotonicityClass::StronglyMonotone {
        return Err(MpecError::Precondition(format!(
            "implicit form needs a strongly monotone lower level, i.e. a positive definite matrix M; \
             smallest eigenvalue of (M+Mᵀ)/2 is {:e}",
            verdict.modulus
        )));
    }
    if problem.lower.x_coef.iter().any(|&v| v != 0.0) {
        return Err(MpecError::Unsupported(
            "implicit form needs a lower feasible set independent of x (A = 0)".into(),
        ));
    }
    let (n, m) = (problem.n, problem.m);
    let z = &problem.joint;
    let x_only: Vec<usize> = (0..z.num_rows())
        .filter(|&i| (n..n + m).all(|j| z.lhs[(i, j)] == 0.0))
        .collect();
    let coupled: Vec<usize> = (0..z.num_rows()).filter(|i| !x_only.contains(i)).collect();
    let domain = Polyhedron {
        lhs: z.lhs.select_rows(&x_only).columns(0, n).into_owned(),
        rhs: z.rhs.select_rows(&x_only),
    };
    let coupling = Polyhedron {
        lhs: z.lhs.select_rows(&coupled),
        rhs: z.rhs.select_rows(&coupled),
    };
    let step = crate::lower::avi::contraction_step(
        &problem.vi.y_coef,
        verdict.modulus,
        verdict.spectral_norm,
    );
    Ok(ImplicitProgram {
        problem: problem.clone(),
        domain,
        coupling,
        verdict,
        step,
    })
}

impl ImplicitProgram {
    /// The unique lower-level response `y(x)`.
    pub fn response(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len("x", x.len(), self.problem.n)?;
        let p = &self.problem;
        let cone = if p.has_orthant_lower() {
            Cone::Orthant
        } else {
            Cone::Polyhedron(p.lower_set_at(x))
        };
        let inst = AviInstance {
            matrix: p.vi.y_coef.clone(),
            offset: &p.vi.constant + &p.vi.x_coef * x,
            cone,
        };
        let r = crate::lower::avi::solve_avi_with_step(&inst, &DVector::zeros(p.m), self.step)?;
        match r.status {
            SolveStatus::Unique => Ok(r.solutions.into_iter().next().expect("unique")),
            _ => Err(MpecError::NotConverged("implicit response")),
        }
    }

    /// `f(x, y(x))`.
    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        let y = self.response(x)?;
        self.problem.eval_objective(x, &y)
    }

    /// Whether `x ∈ X` and `(x, y(x)) ∈ Z`.
    pub fn is_feasible(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        if !self.domain.contains(x, tol) {
            return Ok(false);
        }
        let y = self.response(x)?;
        Ok(self.coupling.contains(&stack(x, &y), tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reformulate::kkt::tests::shifted_lcp;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn response_examples() {
        let ip = build_implicit(&shifted_lcp()).unwrap();
        assert!((ip.response(&dvector![0.5]).unwrap()[0] - 0.5).abs() < 1e-12);
        assert_eq!(ip.response(&dvector![-2.0]).unwrap()[0], 0.0);

        let mut p = shifted_lcp();
        p.vi.constant[0] = 1.0;
        let ip = build_implicit(&p).unwrap();
        assert!((ip.response(&dvector![2.0]).unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skew_map_is_rejected() {
        let mut p = shifted_lcp();
        p.m = 2;
        p.vi.y_coef = dmatrix![0.0, 1.0; -1.0, 0.0];
        assert!(matches!(
            build_implicit(&p),
            Err(MpecError::Precondition(_))
        ));
    }

    #[test]
    fn x_dependent_lower_set_is_unsupported() {
        let mut p = shifted_lcp();
        p.lower.x_coef[(0, 0)] = 1.0;
        assert!(matches!(build_implicit(&p), Err(MpecError::Unsupported(_))));
    }

    #[test]
    fn joint_rows_are_split() {
        let mut p = shifted_lcp();
        // x ≤ 2 and y ≤ 1
        p.joint = Polyhedron::new(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![2.0, 1.0]).unwrap();
        let ip = build_implicit(&p).unwrap();
        assert_eq!(ip.domain.num_rows(), 1);
        assert_eq!(ip.coupling.num_rows(), 1);
        assert!(ip.is_feasible(&dvector![0.5], 1e-9).unwrap());
        assert!(!ip.is_feasible(&dvector![1.5], 1e-9).unwrap());
        assert!(!ip.is_feasible(&dvector![3.0], 1e-9).unwrap());
    }
}
