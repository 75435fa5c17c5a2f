//! The linear system written in exponential coordinates.
//!
//! On a simply connected nilpotent group `exp` is a global chart. In that
//! chart the drift is the linear field `x -> Dx`, the group product is the
//! (finite) BCH polynomial and a right-invariant field `X` becomes
//! `x -> T(x) X` with `T(x) = ad_x / (e^{ad_x} - 1) = sum_k B_k/k! ad_x^k`.

use nalgebra::DMatrix;

use crate::algebra::{LieAlgebra, Vector};
use crate::analysis::LinearSystemSpec;
use crate::error::{check_dim, Error, Result};

/// Point of the group in exponential coordinates, `g = exp(x)`.
pub type LogPoint = Vector;

/// Largest nilpotency class the hard-coded BCH polynomial covers.
pub const MAX_CLASS: usize = 4;

/// `B_k / k!` with the convention `B_1 = -1/2`.
///
/// The sign of the `k = 1` term is what makes the field right-invariant;
/// it is pinned by the Heisenberg matrix-group test in `tests/`.
const BERNOULLI_OVER_FACTORIAL: [f64; 5] = [1.0, -0.5, 1.0 / 12.0, 0.0, -1.0 / 720.0];

/// A simply connected nilpotent group in exponential coordinates.
#[derive(Clone, Debug)]
pub struct NilpotentGroup {
    algebra: LieAlgebra,
    class: usize,
}

impl NilpotentGroup {
    pub fn new(algebra: LieAlgebra) -> Result<Self> {
        let class = algebra.nilpotency_class().ok_or_else(|| {
            Error::Unsupported("exponential coordinates need a nilpotent algebra".into())
        })?;
        if class > MAX_CLASS {
            return Err(Error::Unsupported(format!(
                "nilpotency class {class} exceeds the supported maximum {MAX_CLASS}"
            )));
        }
        Ok(Self { algebra, class })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// `log(exp(x) exp(y))`.
    pub fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        if self.class < 2 {
            return z;
        }
        let br = |a: &[f64], b: &[f64]| {
            let mut out = vec![0.0; d];
            self.algebra.bracket_into(a, b, &mut out);
            out
        };
        let xy = br(x, y);
        axpy(&mut z, 0.5, &xy);
        if self.class >= 3 {
            let x_xy = br(x, &xy);
            let yx: Vec<f64> = xy.iter().map(|v| -v).collect();
            let y_yx = br(y, &yx);
            axpy(&mut z, 1.0 / 12.0, &x_xy);
            axpy(&mut z, 1.0 / 12.0, &y_yx);
            if self.class >= 4 {
                let y_x_xy = br(y, &x_xy);
                axpy(&mut z, -1.0 / 24.0, &y_x_xy);
            }
        }
        z
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| -v).collect()
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Group product in exponential coordinates via the truncated BCH series.
pub fn bch_product(algebra: &LieAlgebra, x: &LogPoint, y: &LogPoint) -> Result<LogPoint> {
    check_dim(algebra.dim(), x.len())?;
    check_dim(algebra.dim(), y.len())?;
    let g = NilpotentGroup::new(algebra.clone())?;
    Ok(LogPoint::from_vec(g.product(x.as_slice(), y.as_slice())))
}

/// The automorphism flow `x -> e^{tD} x`.
pub fn flow(d: &crate::algebra::Derivation, t: f64, x: &LogPoint) -> Result<LogPoint> {
    check_dim(d.dim(), x.len())?;
    Ok(d.exp(t) * x)
}

/// Right-hand side of the system in exponential coordinates.
#[derive(Clone, Debug)]
pub struct LogDynamics {
    group: NilpotentGroup,
    drift: DMatrix<f64>,
    controls: Vec<Vec<f64>>,
    direction: f64,
}

/// Reusable buffers for evaluating [`LogDynamics`].
#[derive(Clone, Debug)]
pub struct Scratch {
    w: Vec<f64>,
    term: Vec<f64>,
    next: Vec<f64>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        Self {
            w: vec![0.0; dim],
            term: vec![0.0; dim],
            next: vec![0.0; dim],
        }
    }
}

impl LogDynamics {
    pub fn new(spec: &LinearSystemSpec) -> Result<Self> {
        let group = NilpotentGroup::new(spec.algebra.clone())?;
        Ok(Self {
            group,
            drift: spec.derivation.matrix().clone(),
            controls: spec.controls.iter().map(|c| c.iter().copied().collect()).collect(),
            direction: 1.0,
        })
    }

    /// The same system run backwards in time.
    pub fn reversed(&self) -> Self {
        Self {
            direction: -self.direction,
            ..self.clone()
        }
    }

    pub fn is_reversed(&self) -> bool {
        self.direction < 0.0
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn inputs(&self) -> usize {
        self.controls.len()
    }

    pub fn group(&self) -> &NilpotentGroup {
        &self.group
    }

    pub fn drift(&self) -> &DMatrix<f64> {
        &self.drift
    }

    /// `dx/dt = Dx + sum_j u_j T(x) X^j`, times the time direction.
    pub fn field_into(&self, x: &[f64], u: &[f64], out: &mut [f64], s: &mut Scratch) {
        let d = self.dim();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.drift[(i, j)] * x[j];
            }
            *o = acc;
        }
        s.w.iter_mut().for_each(|v| *v = 0.0);
        for (uj, xj) in u.iter().zip(&self.controls) {
            axpy(&mut s.w, *uj, xj);
        }
        axpy(out, 1.0, &s.w);
        s.term.copy_from_slice(&s.w);
        for coeff in BERNOULLI_OVER_FACTORIAL.iter().take(self.group.class()).skip(1) {
            self.group.algebra().bracket_into(x, &s.term, &mut s.next);
            std::mem::swap(&mut s.term, &mut s.next);
            axpy(out, *coeff, &s.term);
        }
        if self.direction < 0.0 {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    }

    pub fn vector_field(&self, x: &LogPoint, u: &[f64]) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.inputs(), u.len())?;
        let mut out = vec![0.0; self.dim()];
        self.field_into(x.as_slice(), u, &mut out, &mut Scratch::new(self.dim()));
        Ok(Vector::from_vec(out))
    }
}

/// Classical fourth-order Runge-Kutta stepper with owned buffers.
#[derive(Clone, Debug)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
    scratch: Scratch,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
            scratch: Scratch::new(dim),
        }
    }

    pub fn step(&mut self, f: &LogDynamics, x: &mut [f64], u: &[f64], h: f64) {
        let n = x.len();
        f.field_into(x, u, &mut self.k1, &mut self.scratch);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        f.field_into(&self.tmp, u, &mut self.k2, &mut self.scratch);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        f.field_into(&self.tmp, u, &mut self.k3, &mut self.scratch);
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        f.field_into(&self.tmp, u, &mut self.k4, &mut self.scratch);
        for i in 0..n {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    /// Squared norm of the field at `x`; used to skip equilibria.
    pub fn field_norm_sq(&mut self, f: &LogDynamics, x: &[f64], u: &[f64]) -> f64 {
        f.field_into(x, u, &mut self.k1, &mut self.scratch);
        self.k1.iter().map(|v| v * v).sum()
    }
}

/// One constant-control segment of a control schedule.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ControlPiece {
    pub duration: f64,
    pub u: Vec<f64>,
}

/// Sampled solution of the system.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> LogPoint {
        LogPoint::from_vec(self.points.last().cloned().unwrap_or_default())
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// CSV with header `t,x1,...,xd`.
    pub fn to_csv(&self) -> String {
        let d = self.points.first().map_or(0, |p| p.len());
        let mut s = String::from("t");
        for k in 1..=d {
            s.push_str(&format!(",x{k}"));
        }
        s.push('\n');
        for (t, p) in self.times.iter().zip(&self.points) {
            s.push_str(&format!("{t}"));
            for v in p {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

fn steps_for(duration: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("time step must be positive"));
    }
    if duration < 0.0 || !duration.is_finite() {
        return Err(Error::invalid("segment duration must be non-negative"));
    }
    let n = (duration / dt).round();
    if (n * dt - duration).abs() > 1e-9 * duration.max(1.0) {
        return Err(Error::invalid(format!(
            "time step {dt} does not divide segment duration {duration}"
        )));
    }
    Ok(n as usize)
}

/// Integrates from `x0` through a piecewise-constant control schedule.
///
/// Fails with [`Error::Divergence`] once `|x|_inf` exceeds `safety_radius`.
pub fn integrate(
    dynamics: &LogDynamics,
    x0: &LogPoint,
    schedule: &[ControlPiece],
    dt: f64,
    safety_radius: f64,
) -> Result<Trajectory> {
    check_dim(dynamics.dim(), x0.len())?;
    let mut plan = Vec::with_capacity(schedule.len());
    for piece in schedule {
        check_dim(dynamics.inputs(), piece.u.len())?;
        plan.push((steps_for(piece.duration, dt)?, piece.u.as_slice()));
    }
    let mut rk = Rk4::new(dynamics.dim());
    let mut x: Vec<f64> = x0.iter().copied().collect();
    let mut t = 0.0;
    let mut step_count = 0usize;
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![x.clone()],
    };
    for (steps, u) in plan {
        for _ in 0..steps {
            rk.step(dynamics, &mut x, u, dt);
            step_count += 1;
            t = step_count as f64 * dt;
            let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(norm <= safety_radius) {
                return Err(Error::Divergence { time: t, norm });
            }
            traj.times.push(t);
            traj.points.push(x.clone());
        }
    }
    debug_assert!(t >= 0.0);
    Ok(traj)
}

/// Checks `phi_{T,u}(g) = phi_{T,u}(e) * phi_T(g)` and returns the
/// infinity-norm residual.
pub fn solution_identity_check(
    dynamics: &LogDynamics,
    g: &LogPoint,
    schedule: &[ControlPiece],
    dt: f64,
) -> Result<f64> {
    let horizon: f64 = schedule.iter().map(|p| p.duration).sum();
    let from_g = integrate(dynamics, g, schedule, dt, f64::INFINITY)?.last();
    let origin = LogPoint::zeros(dynamics.dim());
    let from_e = integrate(dynamics, &origin, schedule, dt, f64::INFINITY)?.last();
    let sign = if dynamics.is_reversed() { -1.0 } else { 1.0 };
    let moved = (dynamics.drift() * (sign * horizon)).exp() * g;
    let composed = dynamics.group().product(from_e.as_slice(), moved.as_slice());
    Ok(from_g
        .iter()
        .zip(&composed)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}
