use nalgebra::DVector;

use crate::error::{check_len, MpecError, Result};
use crate::model::AffineMpec;

/// Componentwise `min(a, b)`; zero exactly on complementary pairs.
pub fn natural_residual(a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    check_len("b", b.len(), a.len())?;
    Ok(a.zip_map(b, f64::min))
}

/// `½‖min(y, F(x, y))‖²` for an orthant lower level.
pub fn residual_theta(problem: &AffineMpec, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if !problem.has_orthant_lower() {
        return Err(MpecError::Unsupported(
            "residual merit needs the orthant lower level y ≥ 0".into(),
        ));
    }
    let f = problem.eval_map(x, y)?;
    Ok(0.5 * natural_residual(y, &f)?.norm_squared())
}
