//! Numerical simulation in exponential coordinates of simply connected
//! nilpotent groups.

pub mod dynamics;
pub mod grid;
pub mod reach;

pub use dynamics::{
    bch_product, flow, integrate, solution_identity_check, ControlPiece, LogDynamics, LogPoint,
    NilpotentGroup, Rk4, Trajectory, MAX_CLASS,
};
pub use grid::{CellSet, GridKind, GridLayout, OccupancyGrid};
pub use reach::{
    control_set_estimate, controllable_from_reach, controllable_grid, duality_check, estimate_from_grids,
    explore, monotonicity_check, reach_grid, semigroup_check, ControlSample, ControlSetEstimate,
    DualityCheck, EstimateFlags, GridProblem, SemigroupCheck, Stepping, SATURATION_COVERAGE,
};
