//! Linear control systems on Lie groups: algebraic checks, spectral
//! decomposition of the drift derivation, rule-based classification of
//! controllability and control sets, and grid-based numerical evidence.

pub mod algebra;
pub mod analysis;
pub mod config;
pub mod crosscheck;
pub mod error;
pub mod linalg;
pub mod simulation;
pub mod spectral;
pub mod tolerance;

pub use algebra::{Derivation, LieAlgebra, Subalgebra, Vector};
pub use analysis::{
    check_larc, classify, ClassificationReport, ControlRange, LinearSystemSpec, SystemFlags, Verdict,
    VerdictValue,
};
pub use config::{load, LoadedSystem, SimulationConfig, SystemConfig};
pub use crosscheck::{cross_check, CrossCheck, CrossCheckLine};
pub use error::{Error, Result};
pub use spectral::{decompose, spectrum, SpectralDecomposition};
pub use tolerance::Tolerances;
