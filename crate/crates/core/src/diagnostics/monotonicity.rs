use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MpecError, Result};
use crate::linalg;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotonicityClass {
    StronglyMonotone,
    Monotone,
    NotMonotone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonotonicityVerdict {
    pub class: MonotonicityClass,
    /// Smallest eigenvalue of `(M + Mᵀ)/2`.
    pub modulus: f64,
    pub spectral_norm: f64,
}

/// Classifies `y ↦ M y` by the spectrum of its symmetric part.
pub fn classify_matrix(m: &DMatrix<f64>) -> Result<MonotonicityVerdict> {
    if m.nrows() != m.ncols() {
        return Err(MpecError::Input(format!(
            "matrix must be square, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(MpecError::Input("matrix is empty".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(MpecError::Input("matrix has non-finite entries".into()));
    }
    let (eig, _) = linalg::sym_eigen_sorted(&linalg::symmetric_part(m));
    let modulus = eig[0];
    let class = if modulus > tol::PD {
        MonotonicityClass::StronglyMonotone
    } else if modulus >= -tol::PD {
        MonotonicityClass::Monotone
    } else {
        MonotonicityClass::NotMonotone
    };
    Ok(MonotonicityVerdict {
        class,
        modulus,
        spectral_norm: linalg::spectral_norm(m),
    })
}
