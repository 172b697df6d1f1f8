//! Three-valued decisions and the boundary band policy.
//!
//! The checks decide exact inequalities; floating point cannot resolve
//! equality, so a margin within the band is reported as `boundary` instead
//! of being forced to either side.

use serde::{Deserialize, Serialize};

/// Outcome of a dissipativity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Dissipative,
    NotDissipative,
    Boundary,
}

/// Outcome of an accretivity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccretiveDecision {
    Accretive,
    NotAccretive,
    Boundary,
}

/// Relative width of the unresolvable band around zero margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBand {
    pub rel: f64,
}

pub const DEFAULT_BOUNDARY_BAND: BoundaryBand = BoundaryBand { rel: 1e-9 };

impl Default for BoundaryBand {
    fn default() -> Self {
        DEFAULT_BOUNDARY_BAND
    }
}

impl BoundaryBand {
    pub fn new(rel: f64) -> Self {
        BoundaryBand { rel }
    }

    pub fn width(&self, scale: f64) -> f64 {
        self.rel * scale
    }

    pub fn classify(&self, margin: f64, scale: f64) -> Decision {
        if margin.abs() <= self.width(scale) {
            Decision::Boundary
        } else if margin > 0.0 {
            Decision::Dissipative
        } else {
            Decision::NotDissipative
        }
    }

    pub fn classify_accretive(&self, margin: f64, scale: f64) -> AccretiveDecision {
        match self.classify(margin, scale) {
            Decision::Dissipative => AccretiveDecision::Accretive,
            Decision::NotDissipative => AccretiveDecision::NotAccretive,
            Decision::Boundary => AccretiveDecision::Boundary,
        }
    }
}

impl Decision {
    /// Exit-code value used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Decision::Dissipative => 0,
            Decision::NotDissipative => 1,
            Decision::Boundary => 2,
        }
    }
}

impl AccretiveDecision {
    pub fn exit_code(&self) -> i32 {
        match self {
            AccretiveDecision::Accretive => 0,
            AccretiveDecision::NotAccretive => 1,
            AccretiveDecision::Boundary => 2,
        }
    }
}
