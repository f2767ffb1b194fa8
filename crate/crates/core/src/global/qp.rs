//! Primal active-set method for convex quadratic programs over a polyhedron.
//!
//! Rows that appear as exact opposite pairs (`a·z ≤ b`, `-a·z ≤ -b`) are
//! treated as one equality. A phase-1 simplex supplies the starting point or
//! an infeasibility certificate; positive semidefinite Hessians are handled
//! by stepping along reduced-Hessian kernel directions, which either hit a
//! constraint or certify an unbounded ray.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::simplex::{phase_one, PhaseOne};
use crate::error::{MpecError, Result};
use crate::linalg;
use crate::model::{Polyhedron, QuadraticForm};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QpOutcome {
    /// `multipliers` has one entry per polyhedron row, all `≥ 0`, with
    /// `Qz + c + Eᵀw = 0` and `w_i (E z - e)_i = 0`.
    Optimal {
        #[serde(with = "crate::serde_vec::dvec")]
        point: DVector<f64>,
        value: f64,
        #[serde(with = "crate::serde_vec::dvec")]
        multipliers: DVector<f64>,
    },
    /// Farkas vector `w ≥ 0` with `Eᵀw = 0` and `eᵀw < 0`.
    Infeasible {
        #[serde(with = "crate::serde_vec::dvec")]
        certificate: DVector<f64>,
        infeasibility: f64,
    },
    /// `point` is feasible; `ray` satisfies `E·ray ≤ 0`, `Q·ray = 0`, `cᵀray < 0`.
    Unbounded {
        #[serde(with = "crate::serde_vec::dvec")]
        point: DVector<f64>,
        #[serde(with = "crate::serde_vec::dvec")]
        ray: DVector<f64>,
    },
}

impl QpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            QpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&DVector<f64>> {
        match self {
            QpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

/// Split of polyhedron rows into equalities (opposite pairs) and the rest.
struct RowSplit {
    /// `(row, partner)` with `E_partner = -E_row`.
    pairs: Vec<(usize, usize)>,
    singles: Vec<usize>,
}

fn split_rows(p: &Polyhedron) -> RowSplit {
    let k = p.num_rows();
    let mut used = vec![false; k];
    let mut pairs = Vec::new();
    for i in 0..k {
        if used[i] || p.lhs.row(i).iter().all(|&v| v == 0.0) {
            continue;
        }
        for j in i + 1..k {
            if !used[j]
                && p.rhs[j] == -p.rhs[i]
                && p.lhs
                    .row(j)
                    .iter()
                    .zip(p.lhs.row(i).iter())
                    .all(|(a, b)| *a == -*b)
            {
                used[i] = true;
                used[j] = true;
                pairs.push((i, j));
                break;
            }
        }
    }
    let singles = (0..k).filter(|&i| !used[i]).collect();
    RowSplit { pairs, singles }
}

/// Minimizes `objective` over `p`. The Hessian must be positive semidefinite.
pub fn solve_qp_on_polyhedron(objective: &QuadraticForm, p: &Polyhedron) -> Result<QpOutcome> {
    let d = p.dim();
    if objective.dim() != d || objective.hessian.shape() != (d, d) {
        return Err(MpecError::Input(format!(
            "objective has dimension {}, polyhedron {}",
            objective.dim(),
            d
        )));
    }
    let q = &objective.hessian;
    let qscale = q.amax().max(1.0);
    let (eig, _) = linalg::sym_eigen_sorted(q);
    if let Some(&lo) = eig.first() {
        if lo < -1e-10 * qscale {
            return Err(MpecError::Unsupported(format!(
                "objective is nonconvex (smallest Hessian eigenvalue {lo:e}); only convex quadratics are solved"
            )));
        }
    }

    let split = split_rows(p);
    let a_eq = p.lhs.select_rows(split.pairs.iter().map(|(i, _)| i));
    let b_eq = p.rhs.select_rows(split.pairs.iter().map(|(i, _)| i));
    let a_in = p.lhs.select_rows(&split.singles);
    let b_in = p.rhs.select_rows(&split.singles);

    let mut z = match phase_one(&a_eq, &b_eq, &a_in, &b_in) {
        PhaseOne::Feasible(z) => z,
        PhaseOne::Infeasible {
            infeasibility,
            w_eq,
            w_in,
        } => {
            let mut cert = DVector::zeros(p.num_rows());
            for (k, &(i, j)) in split.pairs.iter().enumerate() {
                if w_eq[k] >= 0.0 {
                    cert[i] = w_eq[k];
                } else {
                    cert[j] = -w_eq[k];
                }
            }
            for (k, &i) in split.singles.iter().enumerate() {
                cert[i] = w_in[k];
            }
            return Ok(QpOutcome::Infeasible {
                certificate: cert,
                infeasibility,
            });
        }
    };

    let row_norm = |a: &DMatrix<f64>, i: usize| a.row(i).norm();
    let in_norms: Vec<f64> = (0..a_in.nrows()).map(|i| row_norm(&a_in, i)).collect();

    // Working set: independent equalities, then active independent inequalities.
    let mut work_eq: Vec<usize> = Vec::new();
    let mut work_in: Vec<usize> = Vec::new();
    let working_matrix = |weq: &[usize], win: &[usize]| -> DMatrix<f64> {
        let mut rows: Vec<_> = weq.iter().map(|&i| a_eq.row(i)).collect();
        rows.extend(win.iter().map(|&i| a_in.row(i)));
        if rows.is_empty() {
            DMatrix::zeros(0, d)
        } else {
            DMatrix::from_rows(&rows)
        }
    };
    for i in 0..a_eq.nrows() {
        let mut trial = work_eq.clone();
        trial.push(i);
        if linalg::rank(&working_matrix(&trial, &[])) == trial.len() {
            work_eq = trial;
        }
    }
    for i in 0..a_in.nrows() {
        let slack = b_in[i] - a_in.row(i).dot(&z.transpose());
        if in_norms[i] > 0.0 && slack.abs() <= 1e-9 * (1.0 + b_in[i].abs()) {
            let mut trial = work_in.clone();
            trial.push(i);
            if linalg::rank(&working_matrix(&work_eq, &trial)) == work_eq.len() + trial.len() {
                work_in = trial;
            }
        }
    }

    let cap = 200 * (d + p.num_rows()) + 1000;
    for _ in 0..cap {
        let g = objective.gradient(&z);
        let gscale = 1.0 + g.amax();
        let aw = working_matrix(&work_eq, &work_in);
        let basis = linalg::null_space(&aw, d);

        let mut step: Option<(DVector<f64>, bool)> = None;
        if basis.ncols() > 0 {
            let gr = basis.transpose() * &g;
            let h = basis.transpose() * q * &basis;
            let (vals, vecs) = linalg::sym_eigen_sorted(&h);
            let mut kernel_part = DVector::zeros(gr.len());
            let mut newton = DVector::zeros(gr.len());
            for (j, &lam) in vals.iter().enumerate() {
                let v = vecs.column(j);
                let c = v.dot(&gr);
                if lam <= 1e-10 * qscale {
                    kernel_part += v * c;
                } else {
                    newton -= v * (c / lam);
                }
            }
            if kernel_part.norm() > 1e-10 * gscale {
                step = Some((-(&basis * kernel_part), true));
            } else {
                let dir = &basis * newton;
                if dir.norm() > 1e-12 * (1.0 + z.amax()) {
                    step = Some((dir, false));
                }
            }
        }

        if let Some((dir, is_ray)) = step {
            // Ratio test over inequalities outside the working set; ties go to the lowest index.
            let dnorm = dir.norm();
            let mut block: Option<(usize, f64)> = None;
            for i in 0..a_in.nrows() {
                if work_in.contains(&i) {
                    continue;
                }
                let ad = a_in.row(i).dot(&dir.transpose());
                if ad > 1e-12 * in_norms[i] * dnorm {
                    let slack = (b_in[i] - a_in.row(i).dot(&z.transpose())).max(0.0);
                    let ratio = slack / ad;
                    if block.is_none_or(|(_, r)| ratio < r) {
                        block = Some((i, ratio));
                    }
                }
            }
            match (is_ray, block) {
                (true, None) => {
                    return Ok(QpOutcome::Unbounded {
                        point: z,
                        ray: &dir / dnorm,
                    })
                }
                (true, Some((i, ratio))) => {
                    z += &dir * ratio;
                    work_in.push(i);
                }
                (false, Some((i, ratio))) if ratio < 1.0 => {
                    z += &dir * ratio;
                    work_in.push(i);
                }
                (false, _) => z += &dir,
            }
            continue;
        }

        // Stationary on the current face: g + Awᵀμ = 0.
        let mu = linalg::lstsq(&aw.transpose(), &(-&g));
        let neq = work_eq.len();
        let drop = work_in
            .iter()
            .enumerate()
            .filter(|(k, _)| mu[neq + k] < -1e-9 * gscale)
            .min_by_key(|(_, &i)| i)
            .map(|(k, _)| k);
        if let Some(k) = drop {
            work_in.remove(k);
            continue;
        }

        let mut w = DVector::zeros(p.num_rows());
        for (k, &e) in work_eq.iter().enumerate() {
            let (i, j) = split.pairs[e];
            if mu[k] >= 0.0 {
                w[i] = mu[k];
            } else {
                w[j] = -mu[k];
            }
        }
        for (k, &e) in work_in.iter().enumerate() {
            w[split.singles[e]] = mu[neq + k].max(0.0);
        }
        let value = objective.value(&z);
        return Ok(QpOutcome::Optimal {
            point: z,
            value,
            multipliers: w,
        });
    }
    Err(MpecError::NotConverged("active-set QP"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn poly(lhs: DMatrix<f64>, rhs: DVector<f64>) -> Polyhedron {
        Polyhedron::new(lhs, rhs).unwrap()
    }

    fn kkt_residual(
        obj: &QuadraticForm,
        p: &Polyhedron,
        z: &DVector<f64>,
        w: &DVector<f64>,
    ) -> f64 {
        let stat = (obj.gradient(z) + p.lhs.transpose() * w).amax();
        let comp = (&p.lhs * z - &p.rhs)
            .iter()
            .zip(w.iter())
            .map(|(s, w)| (s * w).abs())
            .fold(0.0, f64::max);
        stat.max(comp).max(p.max_violation(z).max(0.0))
    }

    #[test]
    fn nearest_point_on_halfline() {
        let obj = QuadraticForm::new(dmatrix![1.0], dvector![0.0], 0.0);
        let p = poly(dmatrix![-1.0], dvector![-1.0]);
        match solve_qp_on_polyhedron(&obj, &p).unwrap() {
            QpOutcome::Optimal {
                point,
                value,
                multipliers,
            } => {
                assert!((point[0] - 1.0).abs() < 1e-12);
                assert!((value - 0.5).abs() < 1e-12);
                assert!(kkt_residual(&obj, &p, &point, &multipliers) < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lp_corner() {
        let obj = QuadraticForm::new(dmatrix![0.0], dvector![1.0], 0.0);
        let p = poly(dmatrix![-1.0], dvector![0.0]);
        let out = solve_qp_on_polyhedron(&obj, &p).unwrap();
        assert_eq!(out.value(), Some(0.0));
        assert_eq!(out.point().unwrap()[0], 0.0);
    }

    #[test]
    fn descent_ray_is_certified() {
        let obj = QuadraticForm::new(dmatrix![0.0], dvector![-1.0], 0.0);
        let p = poly(dmatrix![-1.0], dvector![0.0]);
        match solve_qp_on_polyhedron(&obj, &p).unwrap() {
            QpOutcome::Unbounded { ray, .. } => assert!((ray[0] - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_set_is_infeasible_with_certificate() {
        let obj = QuadraticForm::zero(1);
        let p = poly(dmatrix![1.0; -1.0], dvector![-1.0, 0.0]);
        match solve_qp_on_polyhedron(&obj, &p).unwrap() {
            QpOutcome::Infeasible { certificate, .. } => {
                assert!((p.lhs.transpose() * &certificate).amax() < 1e-12);
                assert!(p.rhs.dot(&certificate) < 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonconvex_objective_rejected() {
        let obj = QuadraticForm::new(dmatrix![-1.0], dvector![0.0], 0.0);
        assert!(matches!(
            solve_qp_on_polyhedron(&obj, &Polyhedron::free(1)),
            Err(MpecError::Unsupported(_))
        ));
    }

    #[test]
    fn equality_pairs_and_semidefinite_hessian() {
        // min (x-1)^2 over {x + y = 2, y ≥ 0, λ free ≥ 0} with λ absent from the objective.
        let obj = QuadraticForm::new(
            dmatrix![2.0, 0.0, 0.0; 0.0, 0.0, 0.0; 0.0, 0.0, 0.0],
            dvector![-2.0, 0.0, 0.0],
            1.0,
        );
        let p = poly(
            dmatrix![1.0, 1.0, 0.0; -1.0, -1.0, -0.0; 0.0, -1.0, 0.0; 0.0, 0.0, -1.0],
            dvector![2.0, -2.0, 0.0, 0.0],
        );
        match solve_qp_on_polyhedron(&obj, &p).unwrap() {
            QpOutcome::Optimal {
                point,
                value,
                multipliers,
            } => {
                assert!(value.abs() < 1e-12);
                assert!((point[0] - 1.0).abs() < 1e-10 && (point[1] - 1.0).abs() < 1e-10);
                assert!(kkt_residual(&obj, &p, &point, &multipliers) < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semidefinite_unbounded_along_free_direction() {
        // min (x - y)^2 - x - y has Q·(1,1) = 0 and c·(1,1) < 0.
        let obj = QuadraticForm::new(dmatrix![2.0, -2.0; -2.0, 2.0], dvector![-1.0, -1.0], 0.0);
        let p = poly(dmatrix![-1.0, 0.0], dvector![0.0]);
        match solve_qp_on_polyhedron(&obj, &p).unwrap() {
            QpOutcome::Unbounded { ray, point } => {
                assert!((&obj.hessian * &ray).amax() < 1e-10);
                assert!(obj.linear.dot(&ray) < 0.0);
                assert!(p.contains(&point, 1e-9));
                assert!((&p.lhs * &ray).max() <= 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projection_onto_halfspace() {
        // nearest point of {w1 + w2 ≤ 0} to (1, 1)
        let obj = QuadraticForm::new(DMatrix::identity(2, 2), dvector![-1.0, -1.0], 1.0);
        let p = poly(dmatrix![1.0, 1.0], dvector![0.0]);
        let out = solve_qp_on_polyhedron(&obj, &p).unwrap();
        assert!(out.point().unwrap().amax() < 1e-12);
    }
}
