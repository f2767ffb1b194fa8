//! Seeded random instance generators shared by the integration tests.
#![allow(dead_code)]

use mpec::model::{AffineMap, AffineMpec, Polyhedron, QuadraticForm};
use mpec::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

/// `DᵀD + 0.1 I`, positive definite but not symmetric-part-dominated
/// when a skew part is added.
pub fn pd_matrix(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let d = normal_matrix(rng, m, m);
    let skew = normal_matrix(rng, m, m) * 0.5;
    d.transpose() * &d + DMatrix::identity(m, m) * 0.1 + (&skew - skew.transpose())
}

/// Symmetric with smallest eigenvalue at most `-0.1`, hence not a P-matrix.
pub fn symmetric_indefinite(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let q = normal_matrix(rng, m, m).qr().q();
    let mut eig = uniform_vector(rng, m, -2.0, 2.0);
    eig[0] = rng.random_range(-2.0..-0.1);
    &q * DMatrix::from_diagonal(&eig) * q.transpose()
}

/// `y ≥ 0 ⊥ F = q + N x + M y ≥ 0` with `Z = free` and zero objective.
pub fn orthant_problem(
    n: usize,
    matrix: DMatrix<f64>,
    x_coef: DMatrix<f64>,
    constant: DVector<f64>,
) -> AffineMpec {
    let m = constant.len();
    AffineMpec::new(
        n,
        m,
        QuadraticForm::zero(n + m),
        Polyhedron::free(n + m),
        AffineMap {
            x_coef,
            y_coef: matrix,
            constant,
        },
        AffineMap {
            x_coef: DMatrix::zeros(m, n),
            y_coef: -DMatrix::identity(m, m),
            constant: DVector::zeros(m),
        },
    )
    .expect("valid orthant problem")
}

/// Random convex quadratic over `k` variables.
pub fn convex_objective(rng: &mut ChaCha8Rng, k: usize) -> QuadraticForm {
    let rank = rng.random_range(1..=k);
    let l = normal_matrix(rng, rank, k);
    QuadraticForm::new(
        l.transpose() * l,
        normal_vector(rng, k),
        rng.random_range(-1.0..1.0),
    )
}

/// Random affine MPEC with general `A, B, b` (ℓ ≤ 4) and a box on `x`.
pub fn general_problem(rng: &mut ChaCha8Rng) -> AffineMpec {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(1..=3);
    let l = rng.random_range(0..=4);
    let matrix = if rng.random_bool(0.5) {
        pd_matrix(rng, m)
    } else {
        normal_matrix(rng, m, m)
    };
    AffineMpec::new(
        n,
        m,
        convex_objective(rng, n + m),
        x_box(n, m, 2.0),
        AffineMap {
            x_coef: normal_matrix(rng, m, n),
            y_coef: matrix,
            constant: normal_vector(rng, m),
        },
        AffineMap {
            x_coef: normal_matrix(rng, l, n),
            y_coef: normal_matrix(rng, l, m),
            constant: -uniform_vector(rng, l, 0.0, 1.0),
        },
    )
    .expect("valid random problem")
}

/// `-r ≤ x_i ≤ r` over the stacked `(x, y)`.
pub fn x_box(n: usize, m: usize, r: f64) -> Polyhedron {
    let mut lhs = DMatrix::zeros(2 * n, n + m);
    for i in 0..n {
        lhs[(2 * i, i)] = 1.0;
        lhs[(2 * i + 1, i)] = -1.0;
    }
    Polyhedron::new(lhs, DVector::from_element(2 * n, r)).unwrap()
}
