//! Grid reachability.
//!
//! The engine keeps one exact state per occupied cell (the first state that
//! landed there) and expands cells in order of arrival time. Time is counted
//! in whole dwell intervals, so arrivals are bucketed by an integer step and
//! each bucket is expanded in parallel. From a cell's state every control
//! level is held for successive dwell intervals until the state leaves the
//! cell; the cell it lands in becomes a candidate at the accumulated step.
//!
//! Because buckets are processed in increasing step order and a bucket only
//! depends on earlier ones, the grid for a horizon `T1` is exactly the prefix
//! of the computation for any `T2 >= T1`. That makes the reachable grids
//! monotone in the horizon cell by cell, and deterministic regardless of
//! thread scheduling.

use std::collections::HashMap;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dynamics::{LogDynamics, Rk4};
use super::grid::{CellSet, GridKind, GridLayout, OccupancyGrid};
use crate::analysis::{ControlRange, LinearSystemSpec, NumericEvidence};
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;

/// Coverage above which a grid counts as filling the whole box.
pub const SATURATION_COVERAGE: f64 = 0.99;

/// Piecewise-constant control levels held for `dwell` time units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSample {
    pub values: Vec<Vec<f64>>,
    pub dwell: f64,
}

impl ControlSample {
    /// Vertices, origin and edge midpoints of `omega`.
    pub fn from_range(omega: &ControlRange, dwell: f64) -> Self {
        Self {
            values: omega.sample_levels(),
            dwell,
        }
    }

    pub fn validate(&self, omega: &ControlRange) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("control sample has no levels"));
        }
        if !(self.dwell > 0.0) || !self.dwell.is_finite() {
            return Err(Error::invalid("dwell must be positive"));
        }
        if let Some(u) = self.values.iter().find(|u| !omega.contains(u)) {
            return Err(Error::invalid(format!("control level {u:?} lies outside the control range")));
        }
        Ok(())
    }
}

/// Time discretization of the grid engine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stepping {
    /// Integration step; must divide the dwell.
    pub dt: f64,
    /// Longest a single control level is held while trying to leave a cell,
    /// in dwell intervals.
    pub max_exit_dwells: usize,
}

/// Everything the grid commands need besides the system itself.
#[derive(Clone, Debug)]
pub struct GridProblem {
    pub layout: GridLayout,
    pub controls: ControlSample,
    pub stepping: Stepping,
}

impl GridProblem {
    fn steps_per_dwell(&self) -> Result<usize> {
        let n = (self.controls.dwell / self.stepping.dt).round();
        if n < 1.0 || (n * self.stepping.dt - self.controls.dwell).abs() > 1e-9 * self.controls.dwell {
            return Err(Error::invalid(format!(
                "time step {} does not divide dwell {}",
                self.stepping.dt, self.controls.dwell
            )));
        }
        Ok(n as usize)
    }

    fn horizon_steps(&self, horizon: f64) -> Result<usize> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon must be a non-negative number"));
        }
        Ok((horizon / self.controls.dwell + 1e-9).floor() as usize)
    }
}

/// Exact states backing each occupied cell.
pub type Representatives = HashMap<usize, Vec<f64>>;

struct Candidate {
    point: Vec<f64>,
    key: (usize, usize),
}

enum Outcome {
    Stayed,
    Landed { cell: usize, point: Vec<f64>, dwells: usize },
    Escaped,
}

#[allow(clippy::too_many_arguments)]
fn leave_cell(
    f: &LogDynamics,
    layout: &GridLayout,
    rk: &mut Rk4,
    start_cell: usize,
    start: &[f64],
    u: &[f64],
    max_dwells: usize,
    steps: usize,
    dt: f64,
    passed: &mut Vec<(usize, Vec<f64>)>,
) -> Outcome {
    if max_dwells == 0 || rk.field_norm_sq(f, start, u) < 1e-24 {
        return Outcome::Stayed;
    }
    let mut x = start.to_vec();
    for dwells in 1..=max_dwells {
        for _ in 0..steps {
            rk.step(f, &mut x, u, dt);
            match layout.cell_of(&x) {
                None => return Outcome::Escaped,
                Some(c) if c != start_cell && passed.last().map(|p| p.0) != Some(c) => {
                    passed.push((c, x.clone()))
                }
                Some(_) => {}
            }
        }
        match layout.cell_of(&x) {
            None => return Outcome::Escaped,
            Some(c) if c != start_cell => {
                return Outcome::Landed {
                    cell: c,
                    point: x,
                    dwells,
                }
            }
            Some(_) => {}
        }
    }
    Outcome::Stayed
}

/// Runs the bucketed frontier expansion from the origin.
pub fn explore(
    f: &LogDynamics,
    problem: &GridProblem,
    horizon: f64,
) -> Result<(OccupancyGrid, Representatives)> {
    let layout = &problem.layout;
    if layout.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: layout.dim(),
        });
    }
    if problem.controls.values.is_empty() {
        return Err(Error::invalid("control sample has no levels"));
    }
    if let Some(u) = problem.controls.values.iter().find(|u| u.len() != f.inputs()) {
        return Err(Error::DimensionMismatch {
            expected: f.inputs(),
            found: u.len(),
        });
    }
    let origin = vec![0.0; f.dim()];
    let origin_cell = layout
        .cell_of(&origin)
        .ok_or_else(|| Error::invalid("simulation box must contain the origin"))?;
    let steps = problem.steps_per_dwell()?;
    let last = problem.horizon_steps(horizon)?;
    let dt = problem.stepping.dt;
    let kind = if f.is_reversed() {
        GridKind::Controllable
    } else {
        GridKind::Reachable
    };

    let mut grid = OccupancyGrid::empty(layout.clone(), horizon, kind);
    // Cells crossed between dwell boundaries are reachable but not expanded.
    let mut crossed: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut reps = Representatives::new();
    let mut buckets: Vec<HashMap<usize, Candidate>> = (0..=last).map(|_| HashMap::new()).collect();
    buckets[0].insert(
        origin_cell,
        Candidate {
            point: origin,
            key: (0, 0),
        },
    );

    for step in 0..=last {
        let mut arrivals: Vec<(usize, Candidate)> = std::mem::take(&mut buckets[step])
            .into_iter()
            .filter(|(c, _)| !grid.occupied.contains(*c))
            .collect();
        arrivals.sort_unstable_by_key(|(c, _)| *c);
        for (c, cand) in &arrivals {
            grid.occupied.insert(*c);
            reps.insert(*c, cand.point.clone());
        }
        if step == last || arrivals.is_empty() {
            continue;
        }
        let budget = problem.stepping.max_exit_dwells.min(last - step);
        let levels = &problem.controls.values;
        let outcomes: Vec<(Vec<Outcome>, Vec<(usize, Vec<f64>)>)> = arrivals
            .par_iter()
            .map_init(
                || Rk4::new(f.dim()),
                |rk, (cell, cand)| {
                    let mut passed = Vec::new();
                    let outs = levels
                        .iter()
                        .map(|u| leave_cell(f, layout, rk, *cell, &cand.point, u, budget, steps, dt, &mut passed))
                        .collect();
                    (outs, passed)
                },
            )
            .collect();
        for ((src, _), (outs, passed)) in arrivals.iter().zip(outcomes) {
            for (c, x) in passed {
                crossed.entry(c).or_insert(x);
            }
            for (level, out) in outs.into_iter().enumerate() {
                match out {
                    Outcome::Stayed => {}
                    Outcome::Escaped => {
                        grid.escapes.insert(*src);
                    }
                    Outcome::Landed { cell, point, dwells } => {
                        if grid.occupied.contains(cell) {
                            continue;
                        }
                        let key = (*src, level);
                        let slot = &mut buckets[step + dwells];
                        match slot.get(&cell) {
                            Some(existing) if existing.key <= key => {}
                            _ => {
                                slot.insert(cell, Candidate { point, key });
                            }
                        }
                    }
                }
            }
        }
    }
    for (c, x) in crossed {
        if grid.occupied.insert(c) {
            reps.insert(c, x);
        }
    }
    debug!(
        "{} grid: {} cells occupied, {} escape sources, horizon {}",
        kind,
        grid.count(),
        grid.escapes.count(),
        horizon
    );
    Ok((grid, reps))
}

/// Grid approximation of the reachable set from the identity up to `horizon`.
pub fn reach_grid(spec: &LinearSystemSpec, problem: &GridProblem, horizon: f64) -> Result<OccupancyGrid> {
    problem.controls.validate(&spec.omega)?;
    let f = LogDynamics::new(spec)?;
    Ok(explore(&f, problem, horizon)?.0)
}

/// Grid approximation of the set controllable to the identity, by forward
/// expansion of the time-reversed system.
pub fn controllable_grid(
    spec: &LinearSystemSpec,
    problem: &GridProblem,
    horizon: f64,
) -> Result<OccupancyGrid> {
    problem.controls.validate(&spec.omega)?;
    let f = LogDynamics::new(spec)?.reversed();
    Ok(explore(&f, problem, horizon)?.0)
}

/// The controllable set obtained from a reachable grid by the identity
/// `A*_t = phi_{-t}(A_t^{-1})`: a cell centre `y` is marked when
/// `-e^{tD} y` lies in an occupied cell of `reach`.
///
/// Also returns the cells whose transformed centre stays in the box, the
/// only region where the transform carries information.
pub fn controllable_from_reach(spec: &LinearSystemSpec, reach: &OccupancyGrid) -> (OccupancyGrid, CellSet) {
    let layout = &reach.layout;
    let forward = spec.derivation.exp(reach.horizon);
    let mut out = OccupancyGrid::empty(layout.clone(), reach.horizon, GridKind::Controllable);
    let mut domain = CellSet::new(layout.total());
    for c in 0..layout.total() {
        let y = nalgebra::DVector::from_vec(layout.center(c));
        let x = -(&forward * y);
        if layout.contains(x.as_slice()) {
            domain.insert(c);
        }
        if reach.contains_point(x.as_slice()) {
            out.occupied.insert(c);
        }
    }
    (out, domain)
}

/// Flags describing a control set estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateFlags {
    pub contains_origin: bool,
    /// No estimate cell lies in the outermost layer of the box.
    pub bounded_in_box: bool,
    pub connected: bool,
    pub components: usize,
    pub coverage: f64,
    /// False when the estimate is empty or has no full-dimensional cell
    /// support, e.g. when the rank condition fails.
    pub has_interior: bool,
}

#[derive(Clone, Debug)]
pub struct ControlSetEstimate {
    pub reach: OccupancyGrid,
    pub controllable: OccupancyGrid,
    pub estimate: OccupancyGrid,
    pub flags: EstimateFlags,
}

impl ControlSetEstimate {
    pub fn reach_saturates(&self) -> bool {
        self.reach.coverage() >= SATURATION_COVERAGE
    }

    pub fn controllable_saturates(&self) -> bool {
        self.controllable.coverage() >= SATURATION_COVERAGE
    }

    pub fn estimate_saturates(&self) -> bool {
        self.estimate.coverage() >= SATURATION_COVERAGE
    }

    /// Compactness of `cl(A)` within `G-` and of `cl(A*)` within `G+`, read
    /// off the grids near the corresponding subspaces.
    pub fn compactness_evidence(&self, dec: &SpectralDecomposition) -> NumericEvidence {
        let reach_slice = self.reach.slice_near(dec.g_minus.basis());
        let ctrl_slice = self.controllable.slice_near(dec.g_plus.basis());
        NumericEvidence {
            reach_in_g_minus_compact: self.reach.cells_inside_box(&reach_slice),
            controllable_in_g_plus_compact: self.controllable.cells_inside_box(&ctrl_slice),
        }
    }
}

/// `cl(A) ∩ A*` on the grid, with the closure approximated by a one-cell
/// dilation of the reachable grid.
pub fn control_set_estimate(
    spec: &LinearSystemSpec,
    problem: &GridProblem,
    horizon: f64,
) -> Result<ControlSetEstimate> {
    problem.controls.validate(&spec.omega)?;
    let f = LogDynamics::new(spec)?;
    let (reach, _) = explore(&f, problem, horizon)?;
    let (controllable, _) = explore(&f.reversed(), problem, horizon)?;
    Ok(estimate_from_grids(reach, controllable))
}

pub fn estimate_from_grids(reach: OccupancyGrid, controllable: OccupancyGrid) -> ControlSetEstimate {
    let layout = reach.layout.clone();
    let closure = reach.dilate();
    let mut estimate = OccupancyGrid::empty(layout.clone(), reach.horizon, GridKind::ControlSet);
    estimate.occupied = closure.occupied.intersection(&controllable.occupied);
    let origin = vec![0.0; layout.dim()];
    let cells: Vec<usize> = estimate.occupied.iter().collect();
    let bounded_in_box = cells.iter().all(|&c| !layout.on_boundary_layer(c));
    let components = estimate.components();
    // A cell with all face neighbours present witnesses full-dimensional support.
    let has_interior = cells.iter().any(|&c| {
        let n = layout.face_neighbors(c);
        n.len() == 2 * layout.dim() && n.iter().all(|&x| estimate.occupied.contains(x))
    });
    let flags = EstimateFlags {
        contains_origin: estimate.contains_point(&origin),
        bounded_in_box,
        connected: components == 1,
        components,
        coverage: estimate.coverage(),
        has_interior,
    };
    ControlSetEstimate {
        reach,
        controllable,
        estimate,
        flags,
    }
}

/// Agreement between the time-reversed expansion and the transform of the
/// reachable grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualityCheck {
    pub horizon: f64,
    /// Symmetric-difference ratio inside the transform's domain.
    pub ratio: f64,
    pub reversed_cells: usize,
    pub transformed_cells: usize,
    pub domain_cells: usize,
    /// The reachable grid left the box, so the transform is truncated.
    pub reach_truncated: bool,
}

pub fn duality_check(spec: &LinearSystemSpec, problem: &GridProblem, horizon: f64) -> Result<DualityCheck> {
    let reach = reach_grid(spec, problem, horizon)?;
    let reversed = controllable_grid(spec, problem, horizon)?;
    let (transformed, domain) = controllable_from_reach(spec, &reach);
    let a = transformed.occupied.intersection(&domain);
    let b = reversed.occupied.intersection(&domain);
    let union = a.union(&b).count();
    let ratio = if union == 0 {
        0.0
    } else {
        a.symmetric_difference(&b).count() as f64 / union as f64
    };
    Ok(DualityCheck {
        horizon,
        ratio,
        reversed_cells: b.count(),
        transformed_cells: a.count(),
        domain_cells: domain.count(),
        reach_truncated: reach.has_boundary_hits(),
    })
}

/// Comparison of `A_{t1+t2}` against the product `A_{t1} phi_{t1}(A_{t2})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SemigroupCheck {
    pub t1: f64,
    pub t2: f64,
    pub ratio: f64,
    pub direct_cells: usize,
    pub product_cells: usize,
}

/// Builds the product set from the exact states behind each cell of the two
/// shorter-horizon grids and compares it with the direct grid.
pub fn semigroup_check(
    spec: &LinearSystemSpec,
    problem: &GridProblem,
    t1: f64,
    t2: f64,
) -> Result<SemigroupCheck> {
    problem.controls.validate(&spec.omega)?;
    let f = LogDynamics::new(spec)?;
    let (first_grid, first) = explore(&f, problem, t1)?;
    let (_, second) = explore(&f, problem, t2)?;
    let (direct, _) = explore(&f, problem, t1 + t2)?;
    let flow = spec.derivation.exp(t1);
    let moved: Vec<Vec<f64>> = second
        .values()
        .map(|b| (&flow * nalgebra::DVector::from_column_slice(b)).iter().copied().collect())
        .collect();
    let group = f.group();
    let layout = &problem.layout;
    // Left factors: the exact states plus the cell centres of A_{t1}.
    let firsts: Vec<Vec<f64>> = first
        .values()
        .cloned()
        .chain(first_grid.occupied.iter().map(|c| layout.center(c)))
        .collect();
    let total = layout.total();
    let marks = firsts
        .par_iter()
        .fold(
            || CellSet::new(total),
            |mut set, a| {
                for b in &moved {
                    if let Some(c) = layout.cell_of(&group.product(a, b)) {
                        set.insert(c);
                    }
                }
                set
            },
        )
        .reduce(|| CellSet::new(total), |a, b| a.union(&b));
    let mut product = OccupancyGrid::empty(layout.clone(), t1 + t2, GridKind::Reachable);
    product.occupied = marks;
    Ok(SemigroupCheck {
        t1,
        t2,
        ratio: product.symmetric_difference_ratio(&direct),
        direct_cells: direct.count(),
        product_cells: product.count(),
    })
}

/// Checks `A_{t1} ⊆ A_{t2}` cellwise for `t1 <= t2`.
pub fn monotonicity_check(
    spec: &LinearSystemSpec,
    problem: &GridProblem,
    t1: f64,
    t2: f64,
) -> Result<bool> {
    if t1 > t2 {
        return Err(Error::invalid("monotonicity check needs t1 <= t2"));
    }
    let f = LogDynamics::new(spec)?;
    let (short, _) = explore(&f, problem, t1)?;
    let (long, _) = explore(&f, problem, t2)?;
    Ok(short.is_subset_of(&long))
}
