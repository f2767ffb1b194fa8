use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::qp::{solve_qp_on_polyhedron, QpOutcome};
use crate::error::{MpecError, Result};
use crate::linalg;
use crate::model::{AffineMpec, Polyhedron, QuadraticForm};
use crate::reformulate::{build_kkt, KktSystem};

/// Largest ℓ accepted by [`enumerate_regimes`] (65 536 pieces).
pub const REGIME_CAP: usize = 16;

/// One branch per complementarity pair: bit `i` clear pins `λ_i = 0`
/// (with `u_i ≥ 0`), bit `i` set pins `u_i = 0` (with `λ_i ≥ 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Regime {
    pub mask: u32,
    pub pairs: usize,
}

impl Regime {
    pub fn slack_pinned(&self, i: usize) -> bool {
        self.mask & (1 << i) != 0
    }
}

/// All `2^ℓ` regimes in ascending mask order.
pub fn enumerate_regimes(pairs: usize) -> Result<Vec<Regime>> {
    if pairs > REGIME_CAP {
        return Err(MpecError::Size {
            what: "complementarity pairs",
            value: pairs,
            cap: REGIME_CAP,
        });
    }
    Ok((0..1u32 << pairs)
        .map(|mask| Regime { mask, pairs })
        .collect())
}

/// The piece of the KKT feasible set selected by `regime`, over `(x, y, λ)`.
pub fn regime_polyhedron(kkt: &KktSystem, regime: Regime) -> Result<Polyhedron> {
    let p = kkt.affine().ok_or_else(|| {
        MpecError::Unsupported("regime pieces are polyhedral only for affine problems".into())
    })?;
    let l = p.num_constraints();
    if regime.pairs != l {
        return Err(MpecError::Input(format!(
            "regime has {} pairs, the system has {l}",
            regime.pairs
        )));
    }
    let (n, m) = (p.n, p.m);
    let d = n + m + l;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();

    for i in 0..p.joint.num_rows() {
        let mut r = vec![0.0; d];
        for j in 0..n + m {
            r[j] = p.joint.lhs[(i, j)];
        }
        rows.push((r, p.joint.rhs[i]));
    }
    // q + Nx + My + Bᵀλ = 0 as a pair of opposite rows.
    for i in 0..m {
        let mut r = vec![0.0; d];
        for j in 0..n {
            r[j] = p.vi.x_coef[(i, j)];
        }
        for j in 0..m {
            r[n + j] = p.vi.y_coef[(i, j)];
        }
        for k in 0..l {
            r[n + m + k] = p.lower.y_coef[(k, i)];
        }
        push_equality(&mut rows, r, -p.vi.constant[i]);
    }
    for i in 0..l {
        let mut g = vec![0.0; d];
        for j in 0..n {
            g[j] = p.lower.x_coef[(i, j)];
        }
        for j in 0..m {
            g[n + j] = p.lower.y_coef[(i, j)];
        }
        let mut lam = vec![0.0; d];
        lam[n + m + i] = 1.0;
        if regime.slack_pinned(i) {
            push_equality(&mut rows, g, -p.lower.constant[i]);
            rows.push((negated(&lam), 0.0));
        } else {
            push_equality(&mut rows, lam, 0.0);
            rows.push((g, -p.lower.constant[i]));
        }
    }

    let lhs = DMatrix::from_fn(rows.len(), d, |r, c| rows[r].0[c]);
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    Polyhedron::new(lhs, rhs)
}

fn negated(r: &[f64]) -> Vec<f64> {
    r.iter().map(|v| -v).collect()
}

fn push_equality(rows: &mut Vec<(Vec<f64>, f64)>, r: Vec<f64>, rhs: f64) {
    let neg = negated(&r);
    rows.push((r, rhs));
    rows.push((neg, -rhs));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemStatus {
    Solved,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub regime: u32,
    pub status: PieceStatus,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestPoint {
    #[serde(with = "crate::serde_vec::dvec")]
    pub x: DVector<f64>,
    #[serde(with = "crate::serde_vec::dvec")]
    pub y: DVector<f64>,
    #[serde(with = "crate::serde_vec::dvec")]
    pub lambda: DVector<f64>,
    #[serde(rename = "objective", alias = "value")]
    pub value: f64,
    pub regime: u32,
}

/// Feasible point of an unbounded piece and a direction along which the
/// objective decreases without bound, both over `(x, y, λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnboundedRay {
    pub regime: u32,
    #[serde(with = "crate::serde_vec::dvec")]
    pub point: DVector<f64>,
    #[serde(with = "crate::serde_vec::dvec")]
    pub direction: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalSolveReport {
    #[serde(rename = "problemStatus")]
    pub status: ProblemStatus,
    pub best: Option<BestPoint>,
    #[serde(rename = "perRegime")]
    pub regimes: Vec<RegimeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray: Option<UnboundedRay>,
}

/// Minimizes the (convex) objective over every regime piece and keeps the
/// best. Ties within a relative `1e-9` go to the lowest mask.
pub fn global_solve(problem: &AffineMpec) -> Result<GlobalSolveReport> {
    let regimes = enumerate_regimes(problem.num_constraints())?;
    let (n, m, l) = (problem.n, problem.m, problem.num_constraints());
    let objective = lifted_objective(&problem.objective, l);
    let (eig, _) = linalg::sym_eigen_sorted(&problem.objective.hessian);
    let qscale = problem.objective.hessian.amax().max(1.0);
    if eig.first().is_some_and(|&e| e < -1e-10 * qscale) {
        return Err(MpecError::Unsupported(format!(
            "objective Hessian has eigenvalue {:e}; only convex quadratics are solved globally",
            eig[0]
        )));
    }
    let kkt = build_kkt(problem);

    let outcomes: Vec<QpOutcome> = regimes
        .par_iter()
        .map(|&r| solve_qp_on_polyhedron(&objective, &regime_polyhedron(&kkt, r)?))
        .collect::<Result<_>>()?;

    let mut summaries = Vec::with_capacity(outcomes.len());
    let mut best: Option<BestPoint> = None;
    let mut ray: Option<UnboundedRay> = None;
    for (r, out) in regimes.iter().zip(outcomes) {
        let (status, value) = match out {
            QpOutcome::Optimal { point, value, .. } => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| value < b.value - 1e-9 * (1.0 + b.value.abs()));
                if better {
                    best = Some(BestPoint {
                        x: point.rows(0, n).into_owned(),
                        y: point.rows(n, m).into_owned(),
                        lambda: point.rows(n + m, l).into_owned(),
                        value,
                        regime: r.mask,
                    });
                }
                (PieceStatus::Optimal, Some(value))
            }
            QpOutcome::Infeasible { .. } => (PieceStatus::Infeasible, None),
            QpOutcome::Unbounded { point, ray: dir } => {
                if ray.is_none() {
                    ray = Some(UnboundedRay {
                        regime: r.mask,
                        point,
                        direction: dir,
                    });
                }
                (PieceStatus::Unbounded, None)
            }
        };
        summaries.push(RegimeSummary {
            regime: r.mask,
            status,
            value,
        });
    }

    let status = if ray.is_some() {
        best = None;
        ProblemStatus::Unbounded
    } else if best.is_some() {
        ProblemStatus::Solved
    } else {
        ProblemStatus::Infeasible
    };
    Ok(GlobalSolveReport {
        status,
        best,
        regimes: summaries,
        ray,
    })
}

fn lifted_objective(f: &QuadraticForm, extra: usize) -> QuadraticForm {
    let k = f.dim();
    let d = k + extra;
    let mut q = DMatrix::zeros(d, d);
    q.view_mut((0, 0), (k, k)).copy_from(&f.hessian);
    let mut c = DVector::zeros(d);
    c.rows_mut(0, k).copy_from(&f.linear);
    QuadraticForm::new(q, c, f.constant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AffineMap, Mpec};
    use crate::reformulate::kkt::tests::shifted_lcp;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    /// `f = (x-1)² + (y-1)²`, `0 ≤ x ≤ 2`, `y ≥ 0 ⊥ y - x + q ≥ 0`.
    pub(crate) fn hand_instance(q: f64) -> AffineMpec {
        AffineMpec::new(
            1,
            1,
            QuadraticForm::new(dmatrix![2.0, 0.0; 0.0, 2.0], dvector![-2.0, -2.0], 2.0),
            Polyhedron::new(dmatrix![1.0, 0.0; -1.0, 0.0], dvector![2.0, 0.0]).unwrap(),
            AffineMap {
                x_coef: dmatrix![-1.0],
                y_coef: dmatrix![1.0],
                constant: dvector![q],
            },
            AffineMap {
                x_coef: dmatrix![0.0],
                y_coef: dmatrix![-1.0],
                constant: dvector![0.0],
            },
        )
        .unwrap()
    }

    #[test]
    fn regime_counts() {
        assert_eq!(enumerate_regimes(3).unwrap().len(), 8);
        assert_eq!(
            enumerate_regimes(0).unwrap(),
            vec![Regime { mask: 0, pairs: 0 }]
        );
        assert!(matches!(enumerate_regimes(17), Err(MpecError::Size { .. })));
        let masks: Vec<u32> = enumerate_regimes(4)
            .unwrap()
            .iter()
            .map(|r| r.mask)
            .collect();
        assert_eq!(masks, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn pieces_of_the_shifted_lcp() {
        let kkt = build_kkt(&shifted_lcp());
        let p0 = regime_polyhedron(&kkt, Regime { mask: 0, pairs: 1 }).unwrap();
        // λ = 0, y ≥ 0, y = x.
        assert!(p0.contains(&dvector![2.0, 2.0, 0.0], 1e-12));
        assert!(!p0.contains(&dvector![-1.0, -1.0, 0.0], 1e-12));
        assert!(!p0.contains(&dvector![2.0, 2.0, 1.0], 1e-12));
        let p1 = regime_polyhedron(&kkt, Regime { mask: 1, pairs: 1 }).unwrap();
        // y = 0, λ = -x ≥ 0.
        assert!(p1.contains(&dvector![-3.0, 0.0, 3.0], 1e-12));
        assert!(!p1.contains(&dvector![3.0, 0.0, -3.0], 1e-12));
    }

    #[test]
    fn union_projects_to_reaction_graph() {
        let kkt = build_kkt(&shifted_lcp());
        let pieces: Vec<Polyhedron> = enumerate_regimes(1)
            .unwrap()
            .into_iter()
            .map(|r| regime_polyhedron(&kkt, r).unwrap())
            .collect();
        for i in -20..=20 {
            let x = i as f64 / 10.0;
            let y = x.max(0.0);
            let lam = (-x).max(0.0);
            assert!(pieces
                .iter()
                .any(|p| p.contains(&dvector![x, y, lam], 1e-12)));
            // Any other y is off the union.
            assert!(!pieces
                .iter()
                .any(|p| p.contains(&dvector![x, y + 0.5, lam], 1e-12)));
        }
    }

    #[test]
    fn hand_instances() {
        let r = global_solve(&hand_instance(0.0)).unwrap();
        assert_eq!(r.status, ProblemStatus::Solved);
        let b = r.best.unwrap();
        assert_relative_eq!(b.value, 0.0, epsilon = 1e-9);
        assert_relative_eq!(b.x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(b.y[0], 1.0, epsilon = 1e-9);

        let p = hand_instance(1.0);
        let r = global_solve(&p).unwrap();
        let b = r.best.unwrap();
        assert_relative_eq!(b.value, 0.5, epsilon = 1e-9);
        assert_relative_eq!(b.x[0], 1.5, epsilon = 1e-9);
        assert_relative_eq!(b.y[0], 0.5, epsilon = 1e-9);
        assert!(build_kkt(&p).is_feasible(&b.x, &b.y, &b.lambda));
        assert!(p.joint().contains(&crate::model::stack(&b.x, &b.y), 1e-8));
    }

    #[test]
    fn empty_joint_set_is_infeasible() {
        let mut p = hand_instance(0.0);
        p.joint = Polyhedron::new(dmatrix![1.0, 0.0; -1.0, 0.0], dvector![-1.0, 0.0]).unwrap();
        let r = global_solve(&p).unwrap();
        assert_eq!(r.status, ProblemStatus::Infeasible);
        assert!(r.best.is_none());
        assert!(r
            .regimes
            .iter()
            .all(|s| s.status == PieceStatus::Infeasible));
    }

    #[test]
    fn unbounded_objective_reports_ray() {
        let mut p = hand_instance(0.0);
        p.objective = QuadraticForm::new(DMatrix::zeros(2, 2), dvector![-1.0, 0.0], 0.0);
        p.joint = Polyhedron::free(2);
        let r = global_solve(&p).unwrap();
        assert_eq!(r.status, ProblemStatus::Unbounded);
        let ray = r.ray.unwrap();
        assert!(ray.direction[0] > 0.0);
    }

    #[test]
    fn nonconvex_objective_rejected() {
        let mut p = hand_instance(0.0);
        p.objective = QuadraticForm::new(dmatrix![-1.0, 0.0; 0.0, 0.0], dvector![0.0, 0.0], 0.0);
        assert!(matches!(global_solve(&p), Err(MpecError::Unsupported(_))));
    }

    #[test]
    fn report_is_deterministic_and_serializes() {
        let p = hand_instance(1.0);
        let a = serde_json::to_string(&global_solve(&p).unwrap()).unwrap();
        let b = serde_json::to_string(&global_solve(&p).unwrap()).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["problemStatus"], "solved");
        for key in ["x", "y", "lambda", "objective", "regime"] {
            assert!(v["best"].get(key).is_some(), "{key}");
        }
        assert_eq!(v["perRegime"].as_array().unwrap().len(), 2);
    }
}
