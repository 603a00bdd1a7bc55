//! Streaming state estimators. Each consumes one measurement frame per tick
//! and emits one estimate inside the grid.

mod bayes;
mod likelihood;
mod nh;
mod pf;

use std::fmt;
use std::str::FromStr;

pub use bayes::{BayesParams, GridPosterior};
pub use likelihood::{gaussian_log_likelihood, window_log_likelihood};
pub use nh::{NhParams, NhTracker};
pub use pf::{systematic_resample, ParticleFilter, ParticleSet, PfParams};

use crate::frame::MeasurementFrame;

/// Per-tick diagnostics for trace export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostics {
    None,
    /// Actions deleted this tick and the solved NormalHedge scale (absent
    /// when every regret was non-positive).
    Nh {
        deleted: usize,
        c: Option<f64>,
    },
    /// Effective sample size before resampling, and whether the weights
    /// underflowed this tick.
    Pf {
        ess: f64,
        collapsed: bool,
    },
}

pub trait Tracker {
    /// Consumes the next frame and returns the state estimate for it.
    fn step(&mut self, frame: &MeasurementFrame) -> f64;

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrackerKind {
    Nh,
    Bayes,
    Pf,
}

impl TrackerKind {
    pub const ALL: [TrackerKind; 3] = [TrackerKind::Nh, TrackerKind::Bayes, TrackerKind::Pf];

    pub fn as_str(&self) -> &'static str {
        match self {
            TrackerKind::Nh => "nh",
            TrackerKind::Bayes => "bayes",
            TrackerKind::Pf => "pf",
        }
    }
}

impl fmt::Display for TrackerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrackerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nh" => Ok(TrackerKind::Nh),
            "bayes" => Ok(TrackerKind::Bayes),
            "pf" => Ok(TrackerKind::Pf),
            other => Err(format!(
                "unknown tracker `{other}` (expected nh, bayes or pf)"
            )),
        }
    }
}
