use serde::{Deserialize, Serialize};

/// Residual threshold for the Lie algebra axioms and the Leibniz rule.
pub const EPS_ALG: f64 = 1e-9;
/// Relative singular-value threshold for rank and span decisions.
pub const EPS_RANK: f64 = 1e-8;
/// Absolute threshold below which a real part counts as zero.
pub const EPS_RE: f64 = 1e-7;

/// Numerical thresholds used across the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub eps_alg: f64,
    pub eps_rank: f64,
    pub eps_re: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_alg: EPS_ALG,
            eps_rank: EPS_RANK,
            eps_re: EPS_RE,
        }
    }
}
