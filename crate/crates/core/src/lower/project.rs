use nalgebra::DVector;

use crate::error::{check_len, MpecError, Result};
use crate::global::{solve_qp_on_polyhedron, QpOutcome};
use crate::model::{Polyhedron, QuadraticForm};

/// Componentwise `max(z, 0)`.
pub fn project_orthant(z: &DVector<f64>) -> DVector<f64> {
    z.map(|v| v.max(0.0))
}

pub fn project_box(z: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> Result<DVector<f64>> {
    check_len("lo", lo.len(), z.len())?;
    check_len("hi", hi.len(), z.len())?;
    if let Some(i) = (0..z.len()).find(|&i| lo[i] > hi[i]) {
        return Err(MpecError::Input(format!(
            "box bound lo[{i}] = {} exceeds hi[{i}] = {}",
            lo[i], hi[i]
        )));
    }
    Ok(DVector::from_fn(z.len(), |i, _| z[i].clamp(lo[i], hi[i])))
}

/// Euclidean projection onto `{w : E w ≤ e}` through the convex QP
/// `min ½‖w‖² − zᵀw`.
pub fn project_polyhedron(z: &DVector<f64>, p: &Polyhedron) -> Result<DVector<f64>> {
    check_len("z", z.len(), p.dim())?;
    if p.contains(z, 0.0) {
        return Ok(z.clone());
    }
    let d = z.len();
    let objective = QuadraticForm::new(
        nalgebra::DMatrix::identity(d, d),
        -z,
        0.5 * z.norm_squared(),
    );
    match solve_qp_on_polyhedron(&objective, p)? {
        QpOutcome::Optimal { point, .. } => Ok(point),
        QpOutcome::Infeasible { .. } => Err(MpecError::Infeasible(
            "cannot project onto an empty polyhedron".into(),
        )),
        QpOutcome::Unbounded { .. } => unreachable!("strongly convex objective"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn orthant_and_box_examples() {
        assert_eq!(project_orthant(&dvector![-1.0, 2.0]), dvector![0.0, 2.0]);
        assert_eq!(
            project_orthant(&dvector![5.0, -3.0, 0.0]),
            dvector![5.0, 0.0, 0.0]
        );
        assert_eq!(
            project_box(
                &dvector![2.0, -1.0],
                &dvector![0.0, 0.0],
                &dvector![1.0, 1.0]
            )
            .unwrap(),
            dvector![1.0, 0.0]
        );
        assert!(project_box(&dvector![0.0], &dvector![1.0], &dvector![0.0]).is_err());
    }

    #[test]
    fn polyhedron_examples() {
        let orth = Polyhedron::orthant(2);
        assert_eq!(
            project_polyhedron(&dvector![1.0, 2.0], &orth).unwrap(),
            dvector![1.0, 2.0]
        );
        let p = project_polyhedron(&dvector![-1.0, 2.0], &orth).unwrap();
        assert!((p - dvector![0.0, 2.0]).amax() < 1e-12);
        let half = Polyhedron::new(dmatrix![1.0, 1.0], dvector![0.0]).unwrap();
        let p = project_polyhedron(&dvector![1.0, 1.0], &half).unwrap();
        assert!(p.amax() < 1e-12);
    }

    #[test]
    fn empty_polyhedron_is_infeasible() {
        let empty = Polyhedron::new(dmatrix![1.0; -1.0], dvector![-1.0, 0.0]).unwrap();
        assert!(matches!(
            project_polyhedron(&dvector![0.0], &empty),
            Err(MpecError::Infeasible(_))
        ));
    }
}
