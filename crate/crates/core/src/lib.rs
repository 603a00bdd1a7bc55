//! Robust 1D tracking experiments.
//!
//! * [`hedge`]: NormalHedge with optional discounting.
//! * [`loss`]: clipped observation loss and reference dynamics loss.
//! * [`world`]: synthetic target, pulse detector and mixture noise.
//! * [`trackers`]: NormalHedge tracker, exact grid Bayes filter, particle filter.
//! * [`bench`]: seeded Monte Carlo runner and result emitters.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod exact;

pub mod bench;
pub mod frame;
pub mod hedge;
pub mod loss;
pub mod rng;
pub mod trackers;
pub mod world;

pub use frame::{Grid, MeasurementFrame};
