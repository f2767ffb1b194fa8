use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{MpecError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackelbergValues {
    /// Leader objective at the most favourable response.
    pub optimistic: f64,
    /// Leader objective at the least favourable response.
    pub pessimistic: f64,
}

/// Min and max of `f(x, y)` over a finite response set.
pub fn stackelberg_values(
    f: impl Fn(&DVector<f64>, &DVector<f64>) -> f64,
    responses: &[DVector<f64>],
    x: &DVector<f64>,
) -> Result<StackelbergValues> {
    if responses.is_empty() {
        return Err(MpecError::Input("response set is empty".into()));
    }
    let mut out = StackelbergValues {
        optimistic: f64::INFINITY,
        pessimistic: f64::NEG_INFINITY,
    };
    for (i, y) in responses.iter().enumerate() {
        let v = f(x, y);
        if !v.is_finite() {
            return Err(MpecError::Input(format!(
                "objective is not finite at response {i}"
            )));
        }
        out.optimistic = out.optimistic.min(v);
        out.pessimistic = out.pessimistic.max(v);
    }
    Ok(out)
}
