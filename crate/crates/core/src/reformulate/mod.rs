//! Equivalent constraint formulations of the lower-level equilibrium:
//! KKT system, Fischer–Burmeister equations, orthant normal map and the
//! implicit program, plus the natural-residual merit.

mod fb;
mod implicit;
pub(crate) mod kkt;
mod merit;
mod normal_map;

use serde::{Deserialize, Serialize};

pub use fb::{build_fb, fb_derivative, fb_value, FbSystem, FB_ORIGIN_DERIVATIVE};
pub use implicit::{build_implicit, ImplicitProgram};
pub use kkt::{build_kkt, KktCheck, KktSystem};
pub use merit::{natural_residual, residual_theta};
pub use normal_map::{
    build_normal_map, negative_part, positive_part, NormalMapRoot, NormalMapSystem,
};

use crate::model::format_rows as rows;
use crate::model::{MatrixRows, ProblemFile};

/// Serialized form of a reformulated system, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemDoc {
    Kkt(KktDoc),
    Fb(FbDoc),
    NormalMap(NormalMapDoc),
    Implicit(ImplicitDoc),
}

/// Stationarity `q + N x + M y + BT λ = 0` and slack `u = -(b + A x + B y)`;
/// absent for evaluator-based problems, which are named by `builtin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktDoc {
    pub n: usize,
    pub m: usize,
    pub pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationarity: Option<StationarityDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<SlackDoc>,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<PolyDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityDoc {
    #[serde(rename = "M")]
    pub m: MatrixRows,
    #[serde(rename = "N")]
    pub n: MatrixRows,
    #[serde(rename = "BT")]
    pub bt: MatrixRows,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlackDoc {
    #[serde(rename = "A")]
    pub a: MatrixRows,
    #[serde(rename = "B")]
    pub b_mat: MatrixRows,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyDoc {
    #[serde(rename = "E")]
    pub lhs: MatrixRows,
    pub e: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbDoc {
    pub system: KktDoc,
    pub merit: String,
    /// Generalized gradient `(∂φ/∂a, ∂φ/∂b)` used at `(0, 0)`.
    pub origin_derivative: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalMapDoc {
    pub cone: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "M")]
    pub m_mat: MatrixRows,
    #[serde(rename = "N")]
    pub n_mat: MatrixRows,
    pub q: Vec<f64>,
    pub recovery: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicitDoc {
    pub problem: ProblemFile,
    #[serde(rename = "X")]
    pub domain: PolyDoc,
    pub coupling: PolyDoc,
    pub modulus: f64,
}

fn poly_doc(p: &crate::model::Polyhedron) -> PolyDoc {
    PolyDoc {
        lhs: rows(&p.lhs),
        e: p.rhs.as_slice().to_vec(),
    }
}

impl KktSystem {
    pub fn to_doc(&self) -> KktDoc {
        let p = self.problem();
        let mut doc = KktDoc {
            n: p.n(),
            m: p.m(),
            pairs: p.num_constraints(),
            builtin: None,
            stationarity: None,
            slack: None,
            joint: Some(poly_doc(p.joint())),
            warning: self.warning.clone(),
        };
        match self.affine() {
            Some(a) => {
                doc.stationarity = Some(StationarityDoc {
                    m: rows(&a.vi.y_coef),
                    n: rows(&a.vi.x_coef),
                    bt: rows(&a.lower.y_coef.transpose()),
                    q: a.vi.constant.as_slice().to_vec(),
                });
                doc.slack = Some(SlackDoc {
                    a: rows(&a.lower.x_coef),
                    b_mat: rows(&a.lower.y_coef),
                    b: a.lower.constant.as_slice().to_vec(),
                });
            }
            None => doc.builtin = p.name().map(str::to_string),
        }
        doc
    }
}

impl FbSystem {
    pub fn to_doc(&self) -> FbDoc {
        FbDoc {
            system: self.kkt.to_doc(),
            merit: "sqrt(a^2 + b^2) - (a + b)".into(),
            origin_derivative: [FB_ORIGIN_DERIVATIVE, FB_ORIGIN_DERIVATIVE],
        }
    }
}

impl NormalMapSystem {
    pub fn to_doc(&self) -> NormalMapDoc {
        NormalMapDoc {
            cone: "orthant".into(),
            n: self.n,
            m: self.m,
            m_mat: rows(&self.map_y),
            n_mat: rows(&self.map_x),
            q: self.constant.as_slice().to_vec(),
            recovery: "y = max(z, 0)".into(),
        }
    }
}

impl ImplicitProgram {
    pub fn to_doc(&self) -> ImplicitDoc {
        ImplicitDoc {
            problem: ProblemFile::from(self.problem.clone()),
            domain: poly_doc(&self.domain),
            coupling: poly_doc(&self.coupling),
            modulus: self.verdict.modulus,
        }
    }
}
