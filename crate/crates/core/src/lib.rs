//! Mathematical programs with affine equilibrium constraints.
//!
//! An upper-level decision `x` and a lower-level response `y` solving the
//! variational inequality `VI(F(x, ·), C(x))` with
//! `F(x, y) = q + N x + M y` and `C(x) = {y : b + A x + B y ≤ 0}`:
//!
//! * [`model`]: problem data, validation, JSON format, built-in instances;
//! * [`reformulate`]: KKT, Fischer–Burmeister, normal-map and implicit forms;
//! * [`lower`]: lower-level solvers and the reaction map `S(x)`;
//! * [`global`]: exact solution by enumerating complementarity regimes;
//! * [`diagnostics`]: monotonicity, LICQ/MFCQ/CRCQ, SBCQ and Stackelberg values.
//!
//! ```
//! use mpec::global::{global_solve, ProblemStatus};
//! use mpec::model::AffineMpec;
//!
//! let text = r#"{
//!   "n": 1, "m": 1,
//!   "objective": {"Q": [[2, 0], [0, 2]], "c": [-2, -2], "c0": 2},
//!   "Z": {"E": [[1, 0], [-1, 0]], "e": [2, 0]},
//!   "F": {"M": [[1]], "N": [[-1]], "q": [1]},
//!   "lower": {"A": [[0]], "B": [[-1]], "b": [0]}
//! }"#;
//! let problem = AffineMpec::from_json(text)?;
//! let report = global_solve(&problem)?;
//! assert_eq!(report.status, ProblemStatus::Solved);
//! assert!((report.best.unwrap().value - 0.5).abs() < 1e-9);
//! # Ok::<(), mpec::MpecError>(())
//! ```

pub mod diagnostics;
mod error;
pub mod global;
pub mod linalg;
pub mod lower;
pub mod model;
pub mod reformulate;
mod serde_vec;
pub mod tol;

pub use error::{MpecError, Result};
pub use nalgebra::{DMatrix, DVector};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/reformulations.md")]
    mod reformulations {}
    #[doc = include_str!("../../../book/src/lower-level.md")]
    mod lower_level {}
    #[doc = include_str!("../../../book/src/global.md")]
    mod global {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
}
