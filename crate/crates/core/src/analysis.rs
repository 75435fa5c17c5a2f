//! Classification of the control set around the identity.
//!
//! Each verdict in a [`ClassificationReport`] comes from a fixed rule table
//! and records which hypotheses it consumed. A rule whose hypotheses are not
//! all available yields [`VerdictValue::Unknown`] naming what is missing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{Derivation, LieAlgebra, Vector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectral::SpectralDecomposition;
use crate::tolerance::Tolerances;

/// The control range `Omega`, a compact convex set with `0` in its interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ControlRange {
    /// `[-r_1, r_1] x ... x [-r_m, r_m]`.
    #[serde(rename = "box")]
    Box(Vec<f64>),
    /// Convex polytope by its vertices. In two dimensions the vertices must
    /// be listed in cyclic order.
    #[serde(rename = "polytope")]
    Polytope(Vec<Vec<f64>>),
}

impl ControlRange {
    pub fn dim(&self) -> usize {
        match self {
            ControlRange::Box(r) => r.len(),
            ControlRange::Polytope(v) => v.first().map_or(0, |p| p.len()),
        }
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            ControlRange::Box(radii) => {
                let m = radii.len();
                (0..1usize << m)
                    .map(|mask| {
                        (0..m)
                            .map(|k| if mask >> (m - 1 - k) & 1 == 1 { radii[k] } else { -radii[k] })
                            .collect()
                    })
                    .collect()
            }
            ControlRange::Polytope(v) => v.clone(),
        }
    }

    fn edges(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        match self {
            ControlRange::Box(radii) => {
                let verts = self.vertices();
                let m = radii.len();
                let mut out = Vec::new();
                for a in 0..verts.len() {
                    for b in (a + 1)..verts.len() {
                        let diff = (0..m).filter(|&k| verts[a][k] != verts[b][k]).count();
                        if diff == 1 {
                            out.push((verts[a].clone(), verts[b].clone()));
                        }
                    }
                }
                out
            }
            ControlRange::Polytope(v) if v.len() > 1 && self.dim() == 2 => (0..v.len())
                .map(|i| (v[i].clone(), v[(i + 1) % v.len()].clone()))
                .collect(),
            ControlRange::Polytope(v) => {
                let mut out = Vec::new();
                for a in 0..v.len() {
                    for b in (a + 1)..v.len() {
                        out.push((v[a].clone(), v[b].clone()));
                    }
                }
                out
            }
        }
    }

    /// Distance from `0` to the boundary; positive iff `0` is interior.
    pub fn interior_margin(&self) -> Result<f64> {
        match self {
            ControlRange::Box(radii) => Ok(radii.iter().copied().fold(f64::INFINITY, f64::min)),
            ControlRange::Polytope(v) => match self.dim() {
                1 => {
                    let lo = v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                    let hi = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                    Ok((-lo).min(hi))
                }
                2 => {
                    if v.len() < 3 {
                        return Ok(0.0);
                    }
                    let area2: f64 = (0..v.len())
                        .map(|i| {
                            let (p, q) = (&v[i], &v[(i + 1) % v.len()]);
                            p[0] * q[1] - p[1] * q[0]
                        })
                        .sum();
                    let orient = area2.signum();
                    let mut margin = f64::INFINITY;
                    for (p, q) in self.edges() {
                        let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
                        let len = ex.hypot(ey);
                        if len == 0.0 {
                            return Err(Error::invalid("polytope has repeated vertices"));
                        }
                        // Signed distance of the origin to the edge line,
                        // positive on the interior side.
                        let cross = ex * (-p[1]) - ey * (-p[0]);
                        margin = margin.min(orient * cross / len);
                    }
                    Ok(margin)
                }
                m => Err(Error::Unsupported(format!(
                    "polytope control ranges are supported for m <= 2 (got m = {m}); use a box"
                ))),
            },
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        const SLACK: f64 = 1e-12;
        match self {
            ControlRange::Box(radii) => {
                u.len() == radii.len() && u.iter().zip(radii).all(|(x, r)| x.abs() <= r + SLACK)
            }
            ControlRange::Polytope(v) => match self.dim() {
                1 => {
                    let lo = v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                    let hi = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                    u.len() == 1 && u[0] >= lo - SLACK && u[0] <= hi + SLACK
                }
                2 if u.len() == 2 => {
                    let area2: f64 = (0..v.len())
                        .map(|i| {
                            let (p, q) = (&v[i], &v[(i + 1) % v.len()]);
                            p[0] * q[1] - p[1] * q[0]
                        })
                        .sum();
                    self.edges().iter().all(|(p, q)| {
                        let cross = (q[0] - p[0]) * (u[1] - p[1]) - (q[1] - p[1]) * (u[0] - p[0]);
                        area2.signum() * cross >= -SLACK
                    })
                }
                _ => false,
            },
        }
    }

    /// Piecewise-constant control levels: the vertices, the origin and the
    /// edge midpoints, without duplicates, in a fixed order.
    pub fn sample_levels(&self) -> Vec<Vec<f64>> {
        let mut levels: Vec<Vec<f64>> = vec![vec![0.0; self.dim()]];
        let mut push = |p: Vec<f64>| {
            if !levels.iter().any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12)) {
                levels.push(p);
            }
        };
        for v in self.vertices() {
            push(v);
        }
        for (p, q) in self.edges() {
            push(p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect());
        }
        levels
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        if m == 0 {
            return Err(Error::invalid("control range must have positive dimension"));
        }
        if let ControlRange::Polytope(v) = self {
            if v.iter().any(|p| p.len() != m) {
                return Err(Error::invalid("polytope vertices must share one dimension"));
            }
        }
        let all_finite = match self {
            ControlRange::Box(r) => r.iter().all(|x| x.is_finite()),
            ControlRange::Polytope(v) => v.iter().flatten().all(|x| x.is_finite()),
        };
        if !all_finite {
            return Err(Error::invalid("control range must be finite"));
        }
        let margin = self.interior_margin()?;
        if margin <= 0.0 {
            return Err(Error::invalid(format!(
                "0 must lie in the interior of the control range (margin {margin})"
            )));
        }
        Ok(())
    }
}

/// Whether the neutral subgroup is compact: stated, or derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum G0Compact {
    /// Resolved to `dim g0 = 0` for simply connected nilpotent groups,
    /// otherwise left undetermined.
    #[default]
    Auto,
    Known(bool),
}

impl Serialize for G0Compact {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            G0Compact::Auto => s.serialize_str("auto"),
            G0Compact::Known(b) => s.serialize_bool(*b),
        }
    }
}

impl<'de> Deserialize<'de> for G0Compact {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Flag(bool),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Flag(b) => Ok(G0Compact::Known(b)),
            Repr::Word(w) if w == "auto" => Ok(G0Compact::Auto),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "g0_compact must be true, false or \"auto\", got {w:?}"
            ))),
        }
    }
}

/// Group-level assumptions that structure constants cannot decide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemFlags {
    pub simply_connected: bool,
    pub finite_semisimple_center: bool,
    pub g0_compact: G0Compact,
    /// Overrides the default assumption that the reachable set is open
    /// whenever the rank condition holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_open: Option<bool>,
}

impl Default for SystemFlags {
    fn default() -> Self {
        Self {
            simply_connected: true,
            finite_semisimple_center: false,
            g0_compact: G0Compact::Auto,
            a_open: None,
        }
    }
}

/// A linear control system `dg/dt = X(g) + sum_j u_j X^j(g)`.
#[derive(Clone, Debug)]
pub struct LinearSystemSpec {
    pub algebra: LieAlgebra,
    pub derivation: Derivation,
    pub controls: Vec<Vector>,
    pub omega: ControlRange,
    pub flags: SystemFlags,
    nilpotency_class: Option<usize>,
    solvable: bool,
}

impl LinearSystemSpec {
    pub fn new(
        algebra: LieAlgebra,
        derivation: Derivation,
        controls: Vec<Vector>,
        omega: ControlRange,
        flags: SystemFlags,
    ) -> Result<Self> {
        let d = algebra.dim();
        let report = algebra.validate();
        if !report.passed() {
            return Err(Error::invalid(format!(
                "structure constants violate the Lie axioms (antisymmetry {:e}, Jacobi {:e})",
                report.antisymmetry_residual, report.jacobi_residual
            )));
        }
        if derivation.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: derivation.dim(),
            });
        }
        let leibniz = algebra.is_derivation(derivation.matrix())?;
        if !leibniz.holds {
            return Err(Error::invalid(format!(
                "drift matrix is not a derivation (Leibniz residual {:e})",
                leibniz.residual
            )));
        }
        if controls.is_empty() {
            return Err(Error::invalid("at least one control direction is required"));
        }
        for c in &controls {
            if c.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.len(),
                });
            }
        }
        omega.validate()?;
        if omega.dim() != controls.len() {
            return Err(Error::invalid(format!(
                "control range has dimension {} but there are {} control directions",
                omega.dim(),
                controls.len()
            )));
        }
        let nilpotency_class = algebra.nilpotency_class();
        let solvable = nilpotency_class.is_some() || algebra.is_solvable();
        Ok(Self {
            algebra,
            derivation,
            controls,
            omega,
            flags,
            nilpotency_class,
            solvable,
        })
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_class.is_some()
    }

    pub fn nilpotency_class(&self) -> Option<usize> {
        self.nilpotency_class
    }

    pub fn is_solvable(&self) -> bool {
        self.solvable
    }

    /// Same system with the drift derivation replaced.
    pub fn with_derivation(&self, derivation: Derivation) -> Result<Self> {
        Self::new(
            self.algebra.clone(),
            derivation,
            self.controls.clone(),
            self.omega.clone(),
            self.flags.clone(),
        )
    }
}

/// Rank condition: the smallest `D`-invariant subalgebra containing the
/// control directions is the whole algebra.
pub fn check_larc(spec: &LinearSystemSpec) -> bool {
    spec.algebra
        .d_invariant_closure(&spec.derivation, &spec.controls)
        .map(|s| s.dim() == spec.dim())
        .unwrap_or(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictValue {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictValue::Yes => "yes",
            VerdictValue::No => "no",
            VerdictValue::Unknown => "unknown",
        })
    }
}

/// Rule identifiers of the classification table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl Rule {
    pub fn statement(self) -> &'static str {
        match self {
            Rule::R1 => "an open reachable set yields a control set containing e in its interior",
            Rule::R2 => "nilpotent G: C is closed iff every eigenvalue of D has nonpositive real part",
            Rule::R3 => "nilpotent G: C is open iff every eigenvalue of D has nonnegative real part",
            Rule::R4 => "nilpotent G: C = G iff every eigenvalue of D has zero real part",
            Rule::R5 => {
                "A open: controllable iff all eigenvalues of D have zero real part \
                 (equivalence for nilpotent G, sufficiency under finite semisimple center)"
            }
            Rule::R6 => {
                "simply connected nilpotent G: C bounded iff D hyperbolic and the closures \
                 of A within G- and A* within G+ are compact"
            }
            Rule::R7 => "G solvable or G0 compact: C is the only control set with nonempty interior",
            Rule::R8 => "C closed iff A* = G, C open iff A = G; C open and closed iff C = G",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One classification outcome with its justification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub value: VerdictValue,
    pub rule: Rule,
    pub citation: &'static str,
    /// Hypotheses consumed to reach `value`.
    pub hypotheses: Vec<String>,
    /// Hypotheses that were needed but unavailable (only for `unknown`).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

impl Verdict {
    fn decided(rule: Rule, yes: bool, hypotheses: &[&str]) -> Self {
        Self {
            value: if yes { VerdictValue::Yes } else { VerdictValue::No },
            rule,
            citation: rule.statement(),
            hypotheses: hypotheses.iter().map(|s| s.to_string()).collect(),
            missing: Vec::new(),
        }
    }

    fn unknown(rule: Rule, missing: &[&str]) -> Self {
        Self {
            value: VerdictValue::Unknown,
            rule,
            citation: rule.statement(),
            hypotheses: Vec::new(),
            missing: missing.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn is_yes(&self) -> bool {
        self.value == VerdictValue::Yes
    }

    pub fn is_no(&self) -> bool {
        self.value == VerdictValue::No
    }
}

pub const HYP_A_OPEN: &str = "reachable set A open";
pub const HYP_NILPOTENT: &str = "G nilpotent";
pub const HYP_SIMPLY_CONNECTED: &str = "G simply connected";
pub const HYP_FSC: &str = "G has finite semisimple center";
pub const HYP_SOLVABLE: &str = "G solvable";
pub const HYP_G0_COMPACT: &str = "G0 compact";
pub const HYP_NUMERIC_COMPACT: &str = "numerically compact closures of A in G- and A* in G+";

/// Numerical evidence for the compactness half of the boundedness rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NumericEvidence {
    /// `cl(A) within G-` stayed strictly inside the simulation box.
    pub reach_in_g_minus_compact: bool,
    /// `cl(A*) within G+` stayed strictly inside the simulation box.
    pub controllable_in_g_plus_compact: bool,
}

/// Which halves of the boundedness test were examined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundednessTrail {
    pub spectral_checked: bool,
    pub numeric_checked: bool,
}

/// Classification of the control set `C` containing the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub larc: bool,
    /// Whether openness of `A` was assumed; when not given by the user it
    /// follows the rank condition.
    pub a_open_assumed: bool,
    pub a_open_user_supplied: bool,
    pub nilpotent: bool,
    pub solvable: bool,
    pub simply_connected: bool,
    pub finite_semisimple_center: bool,
    pub g0_compact: Option<bool>,
    pub hyperbolic: bool,
    pub controllable: Verdict,
    pub c_exists: Verdict,
    pub c_open: Verdict,
    pub c_closed: Verdict,
    pub c_equals_g: Verdict,
    pub c_bounded: Verdict,
    pub c_unique: Verdict,
    pub boundedness: BoundednessTrail,
}

impl ClassificationReport {
    pub fn verdicts(&self) -> [(&'static str, &Verdict); 7] {
        [
            ("controllable", &self.controllable),
            ("c_exists", &self.c_exists),
            ("c_open", &self.c_open),
            ("c_closed", &self.c_closed),
            ("c_equals_g", &self.c_equals_g),
            ("c_bounded", &self.c_bounded),
            ("c_unique", &self.c_unique),
        ]
    }

    /// Cross-verdict implications; a violation is an internal error.
    pub fn check_consistency(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::inconsistent(format!("classification: {what}"), 1.0));
        if self.c_equals_g.is_yes() && !(self.c_open.is_yes() && self.c_closed.is_yes()) {
            return fail("C = G but C not both open and closed");
        }
        if self.controllable.is_yes() && !self.c_equals_g.is_yes() {
            return fail("controllable but C != G");
        }
        if self.c_open.is_yes() && self.c_closed.is_yes() && self.c_equals_g.is_no() {
            return fail("C open and closed but C != G");
        }
        if self.c_equals_g.is_yes() && self.c_bounded.is_yes() {
            return fail("C = G reported bounded");
        }
        if !self.c_exists.is_yes()
            && self.verdicts().iter().skip(2).any(|(_, v)| v.is_yes())
        {
            return fail("property asserted for a control set not known to exist");
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let mut s = String::new();
        s.push_str(&format!(
            "group: nilpotent {}, solvable {}, simply connected {}, finite semisimple center {}\n",
            yn(self.nilpotent),
            yn(self.solvable),
            yn(self.simply_connected),
            yn(self.finite_semisimple_center)
        ));
        s.push_str(&format!(
            "G0 compact: {}\n",
            self.g0_compact.map_or("undetermined", yn)
        ));
        s.push_str(&format!("hyperbolic D: {}\n", yn(self.hyperbolic)));
        s.push_str(&format!("LARC: {}\n", yn(self.larc)));
        s.push_str(&format!(
            "A open: {} ({})\n",
            yn(self.a_open_assumed),
            if self.a_open_user_supplied {
                "user assumption"
            } else {
                "assumed from LARC"
            }
        ));
        for (name, v) in self.verdicts() {
            s.push_str(&format!("{name:<13} {:<8} [{}] {}\n", v.value.to_string(), v.rule, v.citation));
            if !v.hypotheses.is_empty() {
                s.push_str(&format!("{:<22}uses: {}\n", "", v.hypotheses.join("; ")));
            }
            if !v.missing.is_empty() {
                s.push_str(&format!("{:<22}missing: {}\n", "", v.missing.join("; ")));
            }
        }
        s
    }
}

/// Applies the rule table to a system and its spectral decomposition.
///
/// `evidence` supplies the compactness half of the boundedness rule; without
/// it a hyperbolic system gets an `unknown` boundedness verdict.
pub fn classify(
    spec: &LinearSystemSpec,
    dec: &SpectralDecomposition,
    evidence: Option<&NumericEvidence>,
) -> Result<ClassificationReport> {
    let larc = check_larc(spec);
    let a_open = spec.flags.a_open.unwrap_or(larc);
    let nilpotent = spec.is_nilpotent();
    let solvable = spec.is_solvable();
    let simply_connected = spec.flags.simply_connected;
    // Solvable groups always have finite semisimple center.
    let fsc = spec.flags.finite_semisimple_center || solvable;
    let g0_compact = match spec.flags.g0_compact {
        G0Compact::Known(b) => Some(b),
        G0Compact::Auto if simply_connected && nilpotent => Some(dec.g_zero.dim() == 0),
        G0Compact::Auto => None,
    };

    let nonpositive = dec.all_real_parts(|re| re <= 0.0);
    let nonnegative = dec.all_real_parts(|re| re >= 0.0);
    let neutral = dec.all_real_parts(|re| re == 0.0);

    let c_exists = if a_open {
        Verdict::decided(Rule::R1, true, &[HYP_A_OPEN])
    } else {
        Verdict::unknown(Rule::R1, &[HYP_A_OPEN])
    };

    let nil_hyps = [HYP_A_OPEN, HYP_NILPOTENT];
    let (c_closed, c_open, c_equals_g, controllable) = if a_open && nilpotent {
        (
            Verdict::decided(Rule::R2, nonpositive, &nil_hyps),
            Verdict::decided(Rule::R3, nonnegative, &nil_hyps),
            Verdict::decided(Rule::R4, neutral, &nil_hyps),
            Verdict::decided(Rule::R5, neutral, &nil_hyps),
        )
    } else if a_open && fsc && neutral {
        let hyps = [HYP_A_OPEN, HYP_FSC];
        (
            Verdict::decided(Rule::R8, true, &hyps),
            Verdict::decided(Rule::R8, true, &hyps),
            Verdict::decided(Rule::R8, true, &hyps),
            Verdict::decided(Rule::R5, true, &hyps),
        )
    } else {
        let mut missing = Vec::new();
        if !a_open {
            missing.push(HYP_A_OPEN);
        }
        if !nilpotent {
            missing.push(HYP_NILPOTENT);
        }
        (
            Verdict::unknown(Rule::R2, &missing),
            Verdict::unknown(Rule::R3, &missing),
            Verdict::unknown(Rule::R4, &missing),
            Verdict::unknown(Rule::R5, &missing),
        )
    };

    let bounded_hyps = [HYP_A_OPEN, HYP_NILPOTENT, HYP_SIMPLY_CONNECTED];
    let mut boundedness = BoundednessTrail {
        spectral_checked: false,
        numeric_checked: false,
    };
    let c_bounded = if a_open && nilpotent && simply_connected {
        boundedness.spectral_checked = true;
        if !dec.hyperbolic {
            Verdict::decided(Rule::R6, false, &bounded_hyps)
        } else {
            match evidence {
                Some(ev) => {
                    boundedness.numeric_checked = true;
                    if ev.reach_in_g_minus_compact && ev.controllable_in_g_plus_compact {
                        let mut h = bounded_hyps.to_vec();
                        h.push(HYP_NUMERIC_COMPACT);
                        Verdict::decided(Rule::R6, true, &h)
                    } else {
                        // A truncated grid never proves unboundedness.
                        Verdict::unknown(Rule::R6, &[HYP_NUMERIC_COMPACT])
                    }
                }
                None => Verdict::unknown(Rule::R6, &[HYP_NUMERIC_COMPACT]),
            }
        }
    } else {
        let mut missing = Vec::new();
        if !a_open {
            missing.push(HYP_A_OPEN);
        }
        if !nilpotent {
            missing.push(HYP_NILPOTENT);
        }
        if !simply_connected {
            missing.push(HYP_SIMPLY_CONNECTED);
        }
        Verdict::unknown(Rule::R6, &missing)
    };

    let c_unique = if a_open && fsc && solvable {
        Verdict::decided(Rule::R7, true, &[HYP_A_OPEN, HYP_SOLVABLE])
    } else if a_open && fsc && g0_compact == Some(true) {
        Verdict::decided(Rule::R7, true, &[HYP_A_OPEN, HYP_FSC, HYP_G0_COMPACT])
    } else {
        let mut missing = Vec::new();
        if !a_open {
            missing.push(HYP_A_OPEN);
        }
        if !fsc {
            missing.push(HYP_FSC);
        }
        if !solvable && g0_compact != Some(true) {
            missing.push("G solvable or G0 compact");
        }
        Verdict::unknown(Rule::R7, &missing)
    };

    let report = ClassificationReport {
        larc,
        a_open_assumed: a_open,
        a_open_user_supplied: spec.flags.a_open.is_some(),
        nilpotent,
        solvable,
        simply_connected,
        finite_semisimple_center: fsc,
        g0_compact,
        hyperbolic: dec.hyperbolic,
        controllable,
        c_exists,
        c_open,
        c_closed,
        c_equals_g,
        c_bounded,
        c_unique,
        boundedness,
    };
    report.check_consistency()?;
    Ok(report)
}

/// Sum-dimension checks `g+0 + g- = g` and `g-0 + g+ = g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionIdentities {
    pub plus_zero_with_minus: bool,
    pub minus_zero_with_plus: bool,
    /// The group-level product decomposition is only claimed for solvable
    /// groups or when `g0` is trivial.
    pub applicable: bool,
}

impl DecompositionIdentities {
    pub fn passed(&self) -> bool {
        self.plus_zero_with_minus && self.minus_zero_with_plus
    }
}

pub fn decomposition_identities(
    dec: &SpectralDecomposition,
    spec: &LinearSystemSpec,
    tol: &Tolerances,
) -> DecompositionIdentities {
    let d = spec.dim();
    let sum_dim = |a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>| {
        linalg::rank(&linalg::hstack(&[a, b], d), tol.eps_rank)
    };
    DecompositionIdentities {
        plus_zero_with_minus: sum_dim(dec.g_plus_zero.basis(), dec.g_minus.basis()) == d,
        minus_zero_with_plus: sum_dim(dec.g_minus_zero.basis(), dec.g_plus.basis()) == d,
        applicable: spec.is_solvable() || dec.hyperbolic,
    }
}
