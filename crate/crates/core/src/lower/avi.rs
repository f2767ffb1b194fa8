use nalgebra::{DMatrix, DVector};

use super::{
    project_box, project_orthant, project_polyhedron, AviInstance, Cone, LowerSolveResult,
    SolveStatus,
};
use crate::diagnostics::{classify_matrix, MonotonicityClass};
use crate::error::{check_len, MpecError, Result};
use crate::linalg;

const STEP_TOL: f64 = 1e-10;
const MAX_ITER: usize = 10_000;
const POLISH_EVERY: usize = 25;

/// Projection fixed-point iteration `y ← Π_C(y − γ(My + r))` for strongly
/// monotone affine VIs, finished by an exact solve on the identified face.
pub fn solve_avi(inst: &AviInstance, y0: &DVector<f64>) -> Result<LowerSolveResult> {
    let m = inst.dim();
    check_len("y0", y0.len(), m)?;
    if inst.matrix.shape() != (m, m) {
        return Err(MpecError::Input(format!(
            "AVI matrix is {:?}, expected {m}x{m}",
            inst.matrix.shape()
        )));
    }
    let verdict = classify_matrix(&inst.matrix)?;
    if verdict.class != MonotonicityClass::StronglyMonotone {
        return Err(MpecError::Precondition(format!(
            "the VI map must be strongly monotone (positive definite matrix); smallest symmetric-part eigenvalue is {:e}",
            verdict.modulus
        )));
    }
    let step = contraction_step(&inst.matrix, verdict.modulus, verdict.spectral_norm);
    solve_avi_with_step(inst, y0, step)
}

/// Step size for the fixed-point map. `c/L²` always contracts; the minimizer
/// of `‖I − γM‖₂` over `(0, 2/L]` is used instead when it contracts faster.
pub(crate) fn contraction_step(matrix: &DMatrix<f64>, modulus: f64, norm: f64) -> f64 {
    let m = matrix.nrows();
    let rate = |g: f64| linalg::spectral_norm(&(DMatrix::identity(m, m) - matrix * g));
    let safe = modulus / (norm * norm);
    let (mut a, mut b) = (0.0, 2.0 / norm);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (rate(c), rate(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = rate(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = rate(d);
        }
    }
    let best = 0.5 * (a + b);
    if rate(best) < rate(safe) {
        best
    } else {
        safe
    }
}

pub(crate) fn solve_avi_with_step(
    inst: &AviInstance,
    y0: &DVector<f64>,
    step: f64,
) -> Result<LowerSolveResult> {
    let project = |z: &DVector<f64>| -> Result<DVector<f64>> {
        match &inst.cone {
            Cone::Orthant => Ok(project_orthant(z)),
            Cone::Box { lo, hi } => project_box(z, lo, hi),
            Cone::Polyhedron(p) => project_polyhedron(z, p),
        }
    };
    let map = |y: &DVector<f64>| &inst.matrix * y + &inst.offset;
    let natural = |y: &DVector<f64>| -> Result<f64> { Ok((y - project(&(y - map(y)))?).norm()) };

    let mut y = project(y0)?;
    for it in 1..=MAX_ITER {
        let next = project(&(&y - map(&y) * step))?;
        let moved = (&next - &y).norm();
        y = next;
        if moved <= STEP_TOL || it % POLISH_EVERY == 0 {
            if let Some((exact, mult)) = polish(inst, &y) {
                let mut out = LowerSolveResult::from_set(vec![exact.clone()], natural(&exact)?);
                out.iterations = it;
                out.multipliers = Some(mult);
                return Ok(out);
            }
        }
        if moved <= STEP_TOL {
            let mut out = LowerSolveResult::from_set(vec![y.clone()], natural(&y)?);
            out.iterations = it;
            return Ok(out);
        }
    }
    let residual = natural(&y)?;
    Ok(LowerSolveResult {
        solutions: vec![y],
        status: SolveStatus::NotConverged,
        iterations: MAX_ITER,
        residual,
        multipliers: None,
        trace: Vec::new(),
        diagnostic: Some("fixed-point iteration cap reached".into()),
    })
}

/// Rows `G y ≤ h` describing the cone.
fn cone_rows(inst: &AviInstance) -> (DMatrix<f64>, DVector<f64>) {
    let m = inst.dim();
    match &inst.cone {
        Cone::Orthant => (-DMatrix::identity(m, m), DVector::zeros(m)),
        Cone::Box { lo, hi } => {
            let p = crate::model::Polyhedron::boxed(lo.as_slice(), hi.as_slice()).drop_infinite();
            (p.lhs, p.rhs)
        }
        Cone::Polyhedron(p) => (p.lhs.clone(), p.rhs.clone()),
    }
}

/// Solves the VI's KKT system on the face active at `y` and accepts the
/// result only if it is feasible with nonnegative multipliers.
fn polish(inst: &AviInstance, y: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let m = inst.dim();
    let (g, h) = cone_rows(inst);
    let scale = 1.0 + y.amax();
    let active: Vec<usize> = (0..g.nrows())
        .filter(|&i| h[i] - g.row(i).dot(&y.transpose()) <= 1e-6 * scale)
        .collect();
    let g_a = g.select_rows(&active);
    if linalg::rank(&g_a) < active.len() {
        return None;
    }
    let k = active.len();
    let mut kkt = DMatrix::zeros(m + k, m + k);
    kkt.view_mut((0, 0), (m, m)).copy_from(&inst.matrix);
    kkt.view_mut((0, m), (m, k)).copy_from(&g_a.transpose());
    kkt.view_mut((m, 0), (k, m)).copy_from(&g_a);
    let mut rhs = DVector::zeros(m + k);
    rhs.rows_mut(0, m).copy_from(&(-&inst.offset));
    for (r, &i) in active.iter().enumerate() {
        rhs[m + r] = h[i];
    }
    let sol = linalg::solve_square(&kkt, &rhs)?;
    let cand = sol.rows(0, m).into_owned();
    let mult = sol.rows(m, k).into_owned();
    let feas = (&g * &cand - &h)
        .iter()
        .all(|&v| v <= 1e-12 * (1.0 + h.amax()));
    if !feas
        || mult
            .iter()
            .any(|&v| v < -1e-12 * (1.0 + inst.offset.amax()))
    {
        return None;
    }
    let mut full = DVector::zeros(g.nrows());
    for (r, &i) in active.iter().enumerate() {
        full[i] = mult[r].max(0.0);
    }
    Some((cand, full))
}
