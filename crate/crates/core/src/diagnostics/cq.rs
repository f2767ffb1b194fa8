use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::active_set;
use crate::error::{MpecError, Result};
use crate::global::{solve_qp_on_polyhedron, QpOutcome};
use crate::linalg;
use crate::model::{Mpec, Polyhedron, QuadraticForm};
use crate::tol;

/// Largest active set whose subsets are enumerated for CRCQ.
pub const CRCQ_SUBSET_CAP: usize = 16;
const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// No rank change was seen at the sampled points; evidence, not proof.
    SampledHolds,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self != Verdict::Fails
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LicqCheck {
    pub verdict: Verdict,
    pub rank: usize,
    pub active_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MfcqCheck {
    pub verdict: Verdict,
    /// Optimal `t` of `max t s.t. ∇g_iᵀv + t ≤ 0 (i active), ‖v‖∞ ≤ 1`.
    pub margin: f64,
    /// Direction `v` with `∇_y g_iᵀ v < 0` for every active `i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<f64>>,
}

/// A sampled point where the rank of an active-gradient subset differs
/// from its rank at the centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CrcqWitness {
    /// Stacked `(x, y)`.
    pub point: Vec<f64>,
    pub subset: Vec<usize>,
    pub rank: usize,
    pub center_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CrcqCheck {
    pub verdict: Verdict,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub witnesses: Vec<CrcqWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CqReport {
    pub active_set: Vec<usize>,
    pub licq: LicqCheck,
    pub mfcq: MfcqCheck,
    pub crcq: CrcqCheck,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CqOptions {
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CqOptions {
    fn default() -> Self {
        Self {
            radius: 1e-3,
            samples: 64,
            seed: 42,
        }
    }
}

/// LICQ, MFCQ and CRCQ for the lower-level constraints `g(x, ·) ≤ 0` at `y`.
pub fn check_cq(
    problem: &dyn Mpec,
    x: &DVector<f64>,
    y: &DVector<f64>,
    opts: &CqOptions,
) -> Result<CqReport> {
    if !(opts.radius.is_finite() && opts.radius > 0.0) {
        return Err(MpecError::Input(format!(
            "radius must be positive, got {}",
            opts.radius
        )));
    }
    let active = active_set(problem, x, y)?;
    if active.len() > CRCQ_SUBSET_CAP {
        return Err(MpecError::Size {
            what: "active constraints",
            value: active.len(),
            cap: CRCQ_SUBSET_CAP,
        });
    }
    let grads = active_rows(&problem.constraint_jacobian_y(x, y), &active);

    let rank = linalg::rank(&grads);
    let licq = LicqCheck {
        verdict: if rank == active.len() {
            Verdict::Holds
        } else {
            Verdict::Fails
        },
        rank,
        active_count: active.len(),
    };
    let mfcq = mfcq(&grads)?;
    let crcq = crcq(problem, x, y, &active, &grads, opts);
    Ok(CqReport {
        active_set: active,
        licq,
        mfcq,
        crcq,
    })
}

fn active_rows(jac: &DMatrix<f64>, active: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(active.len(), jac.ncols(), |r, c| jac[(active[r], c)])
}

fn mfcq(grads: &DMatrix<f64>) -> Result<MfcqCheck> {
    let (k, m) = grads.shape();
    if k == 0 {
        return Ok(MfcqCheck {
            verdict: Verdict::Holds,
            // Vacuous: t is unbounded with nothing active.
            margin: 1.0,
            certificate: Some(vec![0.0; m]),
        });
    }
    // Variables (v, t): maximize t.
    let d = m + 1;
    let mut lhs = DMatrix::zeros(k + 2 * m, d);
    let mut rhs = DVector::zeros(k + 2 * m);
    lhs.view_mut((0, 0), (k, m)).copy_from(grads);
    lhs.view_mut((0, m), (k, 1)).fill(1.0);
    for j in 0..m {
        lhs[(k + 2 * j, j)] = 1.0;
        lhs[(k + 2 * j + 1, j)] = -1.0;
        rhs[k + 2 * j] = 1.0;
        rhs[k + 2 * j + 1] = 1.0;
    }
    let mut c = DVector::zeros(d);
    c[m] = -1.0;
    let lp = solve_qp_on_polyhedron(
        &QuadraticForm::new(DMatrix::zeros(d, d), c, 0.0),
        &Polyhedron::new(lhs, rhs)?,
    )?;
    let QpOutcome::Optimal { point, .. } = lp else {
        return Err(MpecError::Precondition(
            "MFCQ linear program did not reach an optimum".into(),
        ));
    };
    let margin = point[m];
    if margin <= tol::MFCQ_MARGIN {
        return Ok(MfcqCheck {
            verdict: Verdict::Fails,
            margin,
            certificate: None,
        });
    }
    let lp_dir = point.rows(0, m).into_owned();
    let dir = min_norm_direction(grads)?
        .filter(|v| certifies(grads, v))
        .unwrap_or(lp_dir);
    Ok(MfcqCheck {
        verdict: Verdict::Holds,
        margin,
        certificate: Some(dir.as_slice().to_vec()),
    })
}

/// Shortest `v` with `∇g_iᵀv ≤ -1`, rescaled into the unit box.
fn min_norm_direction(grads: &DMatrix<f64>) -> Result<Option<DVector<f64>>> {
    let (k, m) = grads.shape();
    let obj = QuadraticForm::new(DMatrix::identity(m, m), DVector::zeros(m), 0.0);
    let poly = Polyhedron::new(grads.clone(), DVector::from_element(k, -1.0))?;
    Ok(match solve_qp_on_polyhedron(&obj, &poly)? {
        QpOutcome::Optimal { point, .. } => {
            let scale = point.amax().max(1.0);
            Some(point / scale)
        }
        _ => None,
    })
}

fn certifies(grads: &DMatrix<f64>, v: &DVector<f64>) -> bool {
    (grads * v).iter().all(|&s| s <= -tol::MFCQ_MARGIN)
}

fn crcq(
    problem: &dyn Mpec,
    x: &DVector<f64>,
    y: &DVector<f64>,
    active: &[usize],
    grads: &DMatrix<f64>,
    opts: &CqOptions,
) -> CrcqCheck {
    let mut check = CrcqCheck {
        verdict: Verdict::Holds,
        radius: opts.radius,
        samples: opts.samples,
        seed: opts.seed,
        witnesses: Vec::new(),
    };
    // Constant gradients: every subset keeps its rank everywhere.
    if active.is_empty() || problem.as_affine().is_some() {
        return check;
    }
    let subsets: Vec<Vec<usize>> = (1u32..1 << active.len())
        .map(|mask| {
            (0..active.len())
                .filter(|&i| mask & (1 << i) != 0)
                .collect()
        })
        .collect();
    let center: Vec<usize> = subsets
        .iter()
        .map(|s| linalg::rank(&active_rows(grads, s)))
        .collect();

    let (n, m) = (x.len(), y.len());
    let d = n + m;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut failed = false;
    for _ in 0..opts.samples {
        let z = crate::model::stack(x, y) + sample_ball(&mut rng, d, opts.radius);
        let (xs, ys) = (z.rows(0, n).into_owned(), z.rows(n, m).into_owned());
        let jac = active_rows(&problem.constraint_jacobian_y(&xs, &ys), active);
        for (s, &r0) in subsets.iter().zip(&center) {
            let r = linalg::rank(&active_rows(&jac, s));
            if r != r0 {
                failed = true;
                if check.witnesses.len() < MAX_WITNESSES {
                    check.witnesses.push(CrcqWitness {
                        point: z.as_slice().to_vec(),
                        subset: s.iter().map(|&i| active[i]).collect(),
                        rank: r,
                        center_rank: r0,
                    });
                }
            }
        }
    }
    check.verdict = if failed {
        Verdict::Fails
    } else {
        Verdict::SampledHolds
    };
    check
}

/// Uniform sample from the Euclidean ball of the given radius.
fn sample_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> DVector<f64> {
    if d == 0 {
        return DVector::zeros(0);
    }
    let dir = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = dir.norm().max(f64::MIN_POSITIVE);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    dir * (r / norm)
}
