//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod random;

use std::path::{Path, PathBuf};

use liectrl::simulation::OccupancyGrid;
use liectrl::{load, LoadedSystem};
use nalgebra::Matrix3;

pub fn systems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

pub fn system(name: &str) -> LoadedSystem {
    load(&systems_dir().join(format!("{name}.json"))).unwrap()
}

pub const SHIPPED: [&str; 5] = [
    "scalar_unstable",
    "scalar_stable",
    "planar_hyperbolic",
    "heisenberg_zero_spectrum",
    "heisenberg_hyperbolic",
];

/// `(x, y, z)` packed as the unipotent matrix `I + x E12 + y E23 + z E13`.
pub fn unipotent(p: [f64; 3]) -> Matrix3<f64> {
    Matrix3::new(1.0, p[0], p[2], 0.0, 1.0, p[1], 0.0, 0.0, 1.0)
}

/// Exponential of `x E12 + y E23 + z E13`, which is `I + N + N^2 / 2`.
pub fn unipotent_exp(p: [f64; 3]) -> Matrix3<f64> {
    let n = unipotent(p) - Matrix3::identity();
    Matrix3::identity() + n + n * n * 0.5
}

/// Matrix logarithm of a unipotent 3x3 matrix, read back as `(x, y, z)`.
pub fn unipotent_log(g: &Matrix3<f64>) -> [f64; 3] {
    let n = g - Matrix3::identity();
    let l = n - n * n * 0.5;
    [l[(0, 1)], l[(1, 2)], l[(0, 2)]]
}

/// Integrates `dg/dt = L g - g L + W(u) g` with `L = diag(l1, l2, l3)` and
/// `W(u) = u1 E12 + u2 E23` by classical RK4 on the matrix entries. The
/// control is sampled once per step, at its midpoint.
///
/// Conjugation by `exp(tL)` is the automorphism flow of the Heisenberg group
/// whose derivation is `diag(l1 - l2, l2 - l3, l1 - l3)` on `(E12, E23, E13)`.
pub fn matrix_trajectory(
    lambda: [f64; 3],
    g0: Matrix3<f64>,
    u: impl Fn(f64) -> [f64; 2],
    t_end: f64,
    dt: f64,
) -> Matrix3<f64> {
    let l = Matrix3::from_diagonal(&lambda.into());
    let steps = (t_end / dt).round() as usize;
    let mut g = g0;
    for k in 0..steps {
        let [u1, u2] = u((k as f64 + 0.5) * dt);
        let w = Matrix3::new(0.0, u1, 0.0, 0.0, 0.0, u2, 0.0, 0.0, 0.0);
        let field = |g: &Matrix3<f64>| l * g - g * l + w * g;
        let k1 = field(&g);
        let k2 = field(&(g + k1 * (dt / 2.0)));
        let k3 = field(&(g + k2 * (dt / 2.0)));
        let k4 = field(&(g + k3 * dt));
        g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    g
}

/// Hausdorff distance, in cell widths, between the occupied cell centres of
/// `grid` and the axis-aligned box `target` (per-axis closed intervals).
///
/// The target is sampled on a lattice four times finer than the grid.
pub fn hausdorff_cells(grid: &OccupancyGrid, target: &[(f64, f64)]) -> f64 {
    let layout = &grid.layout;
    let d = layout.dim();
    let width = (0..d).map(|a| layout.width(a)).fold(0.0, f64::max);
    let centres: Vec<Vec<f64>> = grid.occupied.iter().map(|c| layout.center(c)).collect();
    assert!(!centres.is_empty(), "empty grid");
    let dist_to_box = |x: &[f64]| {
        x.iter()
            .zip(target)
            .map(|(&v, &(lo, hi))| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max)
    };
    let forward = centres.iter().map(|c| dist_to_box(c)).fold(0.0, f64::max);

    let axes: Vec<Vec<f64>> = target
        .iter()
        .map(|&(lo, hi)| {
            let n = ((hi - lo) / (width / 4.0)).ceil().max(1.0) as usize;
            (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
        })
        .collect();
    let mut backward: f64 = 0.0;
    let mut idx = vec![0usize; d];
    loop {
        let p: Vec<f64> = (0..d).map(|a| axes[a][idx[a]]).collect();
        let nearest = centres
            .iter()
            .map(|c| c.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        backward = backward.max(nearest);
        let mut a = 0;
        while a < d {
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == d {
            break;
        }
    }
    forward.max(backward) / width
}
