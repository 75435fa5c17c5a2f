//! Fixtures for the benchmarks.

use liectrl::simulation::{ControlSample, GridLayout, GridProblem, Stepping};
use liectrl::{ControlRange, Derivation, LieAlgebra, LinearSystemSpec, SystemFlags, Vector};

/// Heisenberg system with drift `diag(a, b, a + b)` and controls along `e1`, `e2`.
pub fn heisenberg(a: f64, b: f64) -> LinearSystemSpec {
    LinearSystemSpec::new(
        LieAlgebra::heisenberg(),
        Derivation::diagonal(&[a, b, a + b]),
        vec![
            Vector::from_vec(vec![1.0, 0.0, 0.0]),
            Vector::from_vec(vec![0.0, 1.0, 0.0]),
        ],
        ControlRange::Box(vec![1.0, 1.0]),
        SystemFlags::default(),
    )
    .expect("valid Heisenberg system")
}

/// Free 2-step nilpotent algebra on three generators (dimension 6).
pub fn free_nilpotent() -> LieAlgebra {
    let e = |k: usize| {
        let mut v = vec![0.0; 6];
        v[k] = 1.0;
        v
    };
    LieAlgebra::from_brackets(6, &[(0, 1, e(3)), (0, 2, e(4)), (1, 2, e(5))]).expect("valid algebra")
}

pub fn cube_problem(spec: &LinearSystemSpec, half: f64, cells: usize) -> GridProblem {
    GridProblem {
        layout: GridLayout::cube(spec.dim(), half, cells).expect("valid layout"),
        controls: ControlSample::from_range(&spec.omega, 0.1),
        stepping: Stepping {
            dt: 0.01,
            max_exit_dwells: 50,
        },
    }
}
