//! Phase-1 simplex on a dense tableau with Bland's anti-cycling rule.
//!
//! Finds a point of `{z : A_eq z = b_eq, A_in z ≤ b_in}` with `z` free, or a
//! Farkas certificate proving the system empty.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-11;

#[derive(Clone, Debug)]
pub(crate) enum PhaseOne {
    Feasible(DVector<f64>),
    /// `w_eq` free, `w_in ≥ 0`, with `A_eqᵀw_eq + A_inᵀw_in = 0` and
    /// `b_eqᵀw_eq + b_inᵀw_in = -infeasibility < 0`.
    Infeasible {
        infeasibility: f64,
        w_eq: DVector<f64>,
        w_in: DVector<f64>,
    },
}

pub(crate) fn phase_one(
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
    a_in: &DMatrix<f64>,
    b_in: &DVector<f64>,
) -> PhaseOne {
    let d = a_eq.ncols().max(a_in.ncols());
    let (k_eq, k_in) = (a_eq.nrows(), a_in.nrows());
    let rows = k_eq + k_in;
    if rows == 0 {
        return PhaseOne::Feasible(DVector::zeros(d));
    }
    // Columns: z⁺ (d), z⁻ (d), inequality slacks (k_in), artificials (rows), rhs.
    let art0 = 2 * d + k_in;
    let cols = art0 + rows;
    let rhs = cols;
    let mut t = DMatrix::<f64>::zeros(rows + 1, cols + 1);
    let mut sign = vec![1.0; rows];
    for r in 0..rows {
        let (coef, b) = if r < k_eq {
            (a_eq.row(r), b_eq[r])
        } else {
            (a_in.row(r - k_eq), b_in[r - k_eq])
        };
        let s = if b < 0.0 { -1.0 } else { 1.0 };
        sign[r] = s;
        for j in 0..d {
            t[(r, j)] = s * coef[j];
            t[(r, d + j)] = -s * coef[j];
        }
        if r >= k_eq {
            t[(r, 2 * d + (r - k_eq))] = s;
        }
        t[(r, art0 + r)] = 1.0;
        t[(r, rhs)] = s * b;
    }
    // Objective row: reduced costs of min Σ artificials with the artificial basis.
    for j in 0..=cols {
        if (art0..art0 + rows).contains(&j) {
            continue;
        }
        t[(rows, j)] = -(0..rows).map(|r| t[(r, j)]).sum::<f64>();
    }
    let mut basis: Vec<usize> = (art0..art0 + rows).collect();

    let cap = 50 * (cols + rows) + 1000;
    for _ in 0..cap {
        // Bland: lowest-index column with negative reduced cost.
        let Some(enter) = (0..cols).find(|&j| t[(rows, j)] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let a = t[(r, enter)];
            if a > PIVOT_TOL {
                let ratio = t[(r, rhs)] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-14 * (1.0 + lratio.abs())
                            || ((ratio - lratio).abs() <= 1e-14 * (1.0 + lratio.abs())
                                && basis[r] < basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        // Phase 1 is bounded below by zero, so some row always blocks.
        let Some((pr, _)) = leave else { break };
        pivot(&mut t, pr, enter);
        basis[pr] = enter;
    }

    let infeasibility = -t[(rows, rhs)];
    let scale = 1.0 + b_eq.amax().max(b_in.amax());
    if infeasibility > 1e-9 * scale {
        // Duals y_r = c_r - d_r on artificial columns; map back to the original row orientation.
        let w: Vec<f64> = (0..rows)
            .map(|r| -sign[r] * (1.0 - t[(rows, art0 + r)]))
            .collect();
        return PhaseOne::Infeasible {
            infeasibility,
            w_eq: DVector::from_column_slice(&w[..k_eq]),
            w_in: DVector::from_iterator(k_in, w[k_eq..].iter().map(|v| v.max(0.0))),
        };
    }
    let mut z = DVector::zeros(d);
    for (r, &j) in basis.iter().enumerate() {
        if j < d {
            z[j] += t[(r, rhs)];
        } else if j < 2 * d {
            z[j - d] -= t[(r, rhs)];
        }
    }
    PhaseOne::Feasible(z)
}

fn pivot(t: &mut DMatrix<f64>, pr: usize, pc: usize) {
    let p = t[(pr, pc)];
    let ncols = t.ncols();
    for j in 0..ncols {
        t[(pr, j)] /= p;
    }
    for r in 0..t.nrows() {
        if r == pr {
            continue;
        }
        let f = t[(r, pc)];
        if f != 0.0 {
            for j in 0..ncols {
                let v = t[(pr, j)];
                t[(r, j)] -= f * v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn finds_point_in_triangle() {
        // x ≥ 1, y ≥ 1, x + y ≤ 3
        let a = dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 1.0];
        let b = dvector![-1.0, -1.0, 3.0];
        match phase_one(&DMatrix::zeros(0, 2), &DVector::zeros(0), &a, &b) {
            PhaseOne::Feasible(z) => assert!((&a * &z - &b).max() <= 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_interval_gives_farkas_certificate() {
        // 0 ≤ x ≤ -1
        let a = dmatrix![-1.0; 1.0];
        let b = dvector![0.0, -1.0];
        match phase_one(&DMatrix::zeros(0, 1), &DVector::zeros(0), &a, &b) {
            PhaseOne::Infeasible {
                infeasibility,
                w_in,
                ..
            } => {
                assert!(infeasibility > 0.5);
                assert!(w_in.iter().all(|&w| w >= 0.0));
                assert!((a.transpose() * &w_in).amax() < 1e-12);
                assert!(b.dot(&w_in) < 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equalities_with_free_variables() {
        // x - y = -2, x + y = 0  → (-1, 1)
        let a = dmatrix![1.0, -1.0; 1.0, 1.0];
        let b = dvector![-2.0, 0.0];
        match phase_one(&a, &b, &DMatrix::zeros(0, 2), &DVector::zeros(0)) {
            PhaseOne::Feasible(z) => assert!((z - dvector![-1.0, 1.0]).amax() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_equalities() {
        let a = dmatrix![1.0, 1.0; 2.0, 2.0];
        let b = dvector![1.0, 3.0];
        match phase_one(&a, &b, &DMatrix::zeros(0, 2), &DVector::zeros(0)) {
            PhaseOne::Infeasible { w_eq, .. } => {
                assert!((a.transpose() * &w_eq).amax() < 1e-12);
                assert!(b.dot(&w_eq) < 0.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
