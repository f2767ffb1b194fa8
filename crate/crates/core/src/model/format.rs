//! On-disk problem document. Matrices are row-major arrays of arrays.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AffineMap, AffineMpec, Polyhedron, QuadraticForm, Violation};
use crate::error::MpecError;

/// A matrix as a list of rows.
pub type MatrixRows = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    pub objective: ObjectiveDoc,
    #[serde(rename = "Z")]
    pub z: PolyhedronDoc,
    #[serde(rename = "F")]
    pub f: MapDoc,
    pub lower: LowerDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    #[serde(rename = "Q")]
    pub q: MatrixRows,
    pub c: Vec<f64>,
    pub c0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedronDoc {
    #[serde(rename = "E")]
    pub lhs: MatrixRows,
    pub e: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    #[serde(rename = "M")]
    pub m: MatrixRows,
    #[serde(rename = "N")]
    pub n: MatrixRows,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerDoc {
    #[serde(rename = "A")]
    pub a: MatrixRows,
    #[serde(rename = "B")]
    pub b_mat: MatrixRows,
    pub b: Vec<f64>,
}

pub fn to_rows(m: &DMatrix<f64>) -> MatrixRows {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

/// An empty row list becomes a `0 × cols` matrix.
pub fn from_rows(
    rows: &MatrixRows,
    cols: usize,
    path: &str,
    out: &mut Vec<Violation>,
) -> DMatrix<f64> {
    if rows.is_empty() {
        return DMatrix::zeros(0, cols);
    }
    let width = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        out.push(Violation::new(
            format!("{path}[{i}]"),
            format!(
                "ragged matrix: row has {} entries, row 0 has {width}",
                r.len()
            ),
        ));
        return DMatrix::zeros(rows.len(), cols);
    }
    DMatrix::from_row_iterator(rows.len(), width, rows.iter().flatten().cloned())
}

impl TryFrom<ProblemFile> for AffineMpec {
    type Error = MpecError;

    fn try_from(doc: ProblemFile) -> Result<Self, MpecError> {
        let (n, m) = (doc.n, doc.m);
        let mut v = Vec::new();
        let q = from_rows(&doc.objective.q, n + m, "objective.Q", &mut v);
        let e = from_rows(&doc.z.lhs, n + m, "Z.E", &mut v);
        let big_m = from_rows(&doc.f.m, m, "F.M", &mut v);
        let big_n = from_rows(&doc.f.n, n, "F.N", &mut v);
        let a = from_rows(&doc.lower.a, n, "lower.A", &mut v);
        let b = from_rows(&doc.lower.b_mat, m, "lower.B", &mut v);
        if !v.is_empty() {
            return Err(MpecError::Invalid(v));
        }
        AffineMpec::new(
            n,
            m,
            QuadraticForm::new(q, DVector::from_vec(doc.objective.c), doc.objective.c0),
            Polyhedron {
                lhs: e,
                rhs: DVector::from_vec(doc.z.e),
            },
            AffineMap {
                x_coef: big_n,
                y_coef: big_m,
                constant: DVector::from_vec(doc.f.q),
            },
            AffineMap {
                x_coef: a,
                y_coef: b,
                constant: DVector::from_vec(doc.lower.b),
            },
        )
    }
}

impl From<AffineMpec> for ProblemFile {
    fn from(p: AffineMpec) -> Self {
        ProblemFile {
            n: p.n,
            m: p.m,
            objective: ObjectiveDoc {
                q: to_rows(&p.objective.hessian),
                c: p.objective.linear.as_slice().to_vec(),
                c0: p.objective.constant,
            },
            z: PolyhedronDoc {
                lhs: to_rows(&p.joint.lhs),
                e: p.joint.rhs.as_slice().to_vec(),
            },
            f: MapDoc {
                m: to_rows(&p.vi.y_coef),
                n: to_rows(&p.vi.x_coef),
                q: p.vi.constant.as_slice().to_vec(),
            },
            lower: LowerDoc {
                a: to_rows(&p.lower.x_coef),
                b_mat: to_rows(&p.lower.y_coef),
                b: p.lower.constant.as_slice().to_vec(),
            },
        }
    }
}

impl AffineMpec {
    /// Parses a problem document; JSON errors map to `Parse`, data defects to `Invalid`.
    pub fn from_json(text: &str) -> Result<Self, MpecError> {
        let doc: ProblemFile =
            serde_json::from_str(text).map_err(|e| MpecError::Parse(e.to_string()))?;
        AffineMpec::try_from(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem documents always serialize")
    }
}

impl Serialize for Polyhedron {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyhedronDoc {
            lhs: to_rows(&self.lhs),
            e: self.rhs.as_slice().to_vec(),
        }
        .serialize(s)
    }
}
