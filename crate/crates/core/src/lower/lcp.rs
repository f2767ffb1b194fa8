use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::LowerSolveResult;
use crate::error::{MpecError, Result};
use crate::linalg;
use crate::reformulate::natural_residual;
use crate::tol;

/// Largest LCP dimension accepted by [`solve_lcp_enumerate`].
pub const ENUMERATION_CAP: usize = 14;
const PARALLEL_FROM: usize = 8;

/// All solutions of `y ≥ 0, My + r ≥ 0, yᵀ(My + r) = 0` by trying every
/// complementary pattern.
///
/// Pattern bit `i` set means `F_i = 0` with `y_i` free; clear means `y_i = 0`.
/// A pattern whose reduced system is singular but consistent contributes a
/// second representative when its solution set extends along a null
/// direction, so a continuum of solutions is reported as `multiple`.
pub fn solve_lcp_enumerate(
    matrix: &DMatrix<f64>,
    offset: &DVector<f64>,
) -> Result<LowerSolveResult> {
    let m = offset.len();
    if matrix.shape() != (m, m) {
        return Err(MpecError::Input(format!(
            "LCP matrix is {:?}, expected {m}x{m}",
            matrix.shape()
        )));
    }
    if m > ENUMERATION_CAP {
        return Err(MpecError::Size {
            what: "LCP dimension",
            value: m,
            cap: ENUMERATION_CAP,
        });
    }
    let solve = |mask| pattern_solutions(matrix, offset, mask);
    // Small systems are cheaper than the thread hand-off.
    let per_pattern: Vec<Vec<DVector<f64>>> = if m <= PARALLEL_FROM {
        (0u32..1 << m).map(solve).collect()
    } else {
        (0u32..1 << m).into_par_iter().map(solve).collect()
    };

    let mut solutions: Vec<DVector<f64>> = Vec::new();
    for y in per_pattern.into_iter().flatten() {
        if solutions.iter().all(|s| (s - &y).norm() > tol::DEDUP) {
            solutions.push(y);
        }
    }
    let residual = solutions
        .iter()
        .map(|y| {
            let f = matrix * y + offset;
            natural_residual(y, &f)
                .map(|r| r.norm())
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    let mut out = LowerSolveResult::from_set(solutions, residual);
    out.iterations = 1 << m;
    Ok(out)
}

fn pattern_solutions(matrix: &DMatrix<f64>, offset: &DVector<f64>, mask: u32) -> Vec<DVector<f64>> {
    let m = offset.len();
    let free: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
    let m_ff = matrix.select_rows(&free).select_columns(&free);
    let r_f = offset.select_rows(&free);

    let lift = |y_f: &DVector<f64>| {
        let mut y = DVector::zeros(m);
        for (k, &i) in free.iter().enumerate() {
            y[i] = y_f[k];
        }
        y
    };
    let admissible = |y: &DVector<f64>| {
        let f = matrix * y + offset;
        y.iter().all(|&v| v >= -tol::FEAS)
            && f.iter().all(|&v| v >= -tol::FEAS)
            && free.iter().all(|&i| f[i].abs() <= tol::EQ)
    };

    if let Some(y_f) = linalg::solve_square(&m_ff, &(-&r_f)) {
        let y = lift(&y_f);
        return if admissible(&y) { vec![y] } else { Vec::new() };
    }

    // Singular pattern: least-squares point, then check for a feasible segment along each null direction.
    let y_f = linalg::lstsq(&m_ff, &(-&r_f));
    let y = lift(&y_f);
    if !admissible(&y) {
        return Vec::new();
    }
    let mut out = vec![y.clone()];
    let nulls = linalg::null_space(&m_ff, free.len());
    for c in 0..nulls.ncols() {
        let d = lift(&nulls.column(c).into_owned());
        let fd = matrix * &d;
        let (lo, hi) = feasible_interval(&y, &d, &(matrix * &y + offset), &fd, &free);
        if hi - lo > tol::DEDUP {
            let t = if hi > 0.0 { hi.min(1.0) } else { lo.max(-1.0) };
            out.push(&y + &d * t);
            break;
        }
    }
    out
}

/// Range of `t` keeping `y + t d ≥ 0` and the pinned components of `F + t·Md ≥ 0`.
fn feasible_interval(
    y: &DVector<f64>,
    d: &DVector<f64>,
    f: &DVector<f64>,
    fd: &DVector<f64>,
    free: &[usize],
) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut clip = |value: f64, slope: f64| {
        if slope.abs() <= 1e-14 {
            return;
        }
        let t = -value.max(0.0) / slope;
        if slope > 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
    };
    for i in 0..y.len() {
        if free.contains(&i) {
            clip(y[i], d[i]);
        } else {
            clip(f[i], fd[i]);
        }
    }
    (lo, hi)
}
