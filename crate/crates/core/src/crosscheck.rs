//! Theory versus grid evidence.
//!
//! Each classified property is paired with a numeric proxy read off the
//! grids:
//!
//! - `exists`: the estimate contains the origin cell with a full neighbourhood.
//! - `open`: the reachable grid fills the box (C open iff A = G).
//! - `closed`: the controllable grid fills the box (C closed iff A* = G).
//! - `C=G` and `controllable`: the estimate fills the box.
//! - `bounded`: the estimate stays clear of the box boundary.
//!
//! Properties with an `unknown` verdict are reported but not compared.

use std::fmt;

use serde::Serialize;

use crate::analysis::{ClassificationReport, VerdictValue};
use crate::simulation::ControlSetEstimate;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheckLine {
    pub property: &'static str,
    pub theory: VerdictValue,
    pub numeric: bool,
    /// `None` when the theory verdict is unknown.
    pub agree: Option<bool>,
}

impl fmt::Display for CrossCheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.agree {
            Some(true) => "AGREE",
            Some(false) => "DISAGREE",
            None => "SKIP",
        };
        write!(
            f,
            "{tag}({}): theory {}, numeric {}",
            self.property,
            self.theory,
            if self.numeric { "yes" } else { "no" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub lines: Vec<CrossCheckLine>,
}

impl CrossCheck {
    pub fn all_agree(&self) -> bool {
        self.lines.iter().all(|l| l.agree != Some(false))
    }

    pub fn line(&self, property: &str) -> Option<&CrossCheckLine> {
        self.lines.iter().find(|l| l.property == property)
    }

    pub fn to_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

pub fn cross_check(report: &ClassificationReport, est: &ControlSetEstimate) -> CrossCheck {
    let flags = &est.flags;
    let pairs = [
        ("exists", &report.c_exists, flags.contains_origin && flags.has_interior),
        ("open", &report.c_open, est.reach_saturates()),
        ("closed", &report.c_closed, est.controllable_saturates()),
        ("C=G", &report.c_equals_g, est.estimate_saturates()),
        ("controllable", &report.controllable, est.estimate_saturates()),
        ("bounded", &report.c_bounded, flags.bounded_in_box),
    ];
    let lines = pairs
        .into_iter()
        .map(|(property, verdict, numeric)| CrossCheckLine {
            property,
            theory: verdict.value,
            numeric,
            agree: match verdict.value {
                VerdictValue::Yes => Some(numeric),
                VerdictValue::No => Some(!numeric),
                VerdictValue::Unknown => None,
            },
        })
        .collect();
    CrossCheck { lines }
}
