//! Numerical tolerances shared by every module.

/// Absolute slack allowed on each inequality row `a·z ≤ b`.
pub const FEAS: f64 = 1e-8;
/// Residual allowed on equations (stationarity, normal map, FB residual).
pub const EQ: f64 = 1e-8;
/// Bound on `|λ_i u_i|` for a complementarity pair to count as complementary.
pub const COMP: f64 = 1e-8;
/// Smallest symmetric-part eigenvalue that still counts as positive definite.
pub const PD: f64 = 1e-10;
/// Euclidean distance under which two enumerated solutions are merged.
pub const DEDUP: f64 = 1e-8;
/// Singular values below `RANK_REL * σ_max` are treated as zero.
pub const RANK_REL: f64 = 1e-10;
/// The MFCQ linear program must reach `t* > MFCQ_MARGIN`.
pub const MFCQ_MARGIN: f64 = 1e-9;
/// Entrywise asymmetry of Q above this is reported as a warning.
pub const SYMMETRY: f64 = 1e-12;
