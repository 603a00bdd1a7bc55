//! Losses of the explanatory framework: the clipped windowed observation loss
//! and a reference dynamics loss.

use thiserror::Error;

use crate::exact::{self, ExactPrefix};
use crate::frame::{Grid, MeasurementFrame};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossConfigError {
    #[error("noise scale must be finite and non-negative, got {0}")]
    NoiseScale(f64),
    #[error("half width {half_width} is too large for a grid of {cells} cells")]
    HalfWidth { half_width: usize, cells: usize },
}

/// Parameters of the observation loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    half_width: usize,
    noise_scale: f64,
    grid: Grid,
}

impl LossConfig {
    pub fn new(half_width: usize, noise_scale: f64, grid: Grid) -> Result<Self, LossConfigError> {
        if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
            return Err(LossConfigError::NoiseScale(noise_scale));
        }
        if 2 * half_width > (grid.max() - grid.min()) as usize {
            return Err(LossConfigError::HalfWidth {
                half_width,
                cells: grid.len(),
            });
        }
        Ok(Self {
            half_width,
            noise_scale,
            grid,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
}

/// Clips a measurement to `[-σ_o, 1 + σ_o]`.
pub fn clip(y: f64, noise_scale: f64) -> f64 {
    (1.0 + noise_scale).min(y.max(-noise_scale))
}

/// Negative sum of clipped measurements over the window
/// `[round(x) - W, round(x) + W] ∩ G`.
pub fn observation_loss(x: f64, frame: &MeasurementFrame, cfg: &LossConfig) -> f64 {
    let grid = frame.grid();
    let range = grid.window(x.round() as i64, cfg.half_width);
    let sigma = cfg.noise_scale;
    // 0 - s rather than -s keeps empty windows at +0.0
    0.0 - exact::fsum(frame.values()[range].iter().map(|&m| clip(m, sigma)))
}

/// Observation loss at every grid cell in one pass over exact prefix sums.
/// Entry `i` is bit-identical to `observation_loss(grid.cell(i), ..)`.
pub fn observation_losses(frame: &MeasurementFrame, cfg: &LossConfig) -> Vec<f64> {
    let grid = frame.grid();
    let sigma = cfg.noise_scale;
    let prefix = ExactPrefix::new(frame.values().iter().map(|&m| clip(m, sigma)));
    let mut scratch = Vec::new();
    grid.cells()
        .map(|c| {
            let r = grid.window(c, cfg.half_width);
            0.0 - prefix.range_sum(r.start, r.end, &mut scratch)
        })
        .collect()
}

/// Expected state evolution `F`.
pub trait Dynamics: Send + Sync {
    fn apply(&self, x: f64) -> f64;
}

/// `F(x) = x`, the dynamics of the shipped 1D problem.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Identity;

impl Dynamics for Identity {
    fn apply(&self, x: f64) -> f64 {
        x
    }
}

/// Reference dynamics loss `(x_t - F(x_prev))²`.
///
/// The NormalHedge tracker never evaluates it; resampling around surviving
/// actions plays its role.
pub fn dynamics_loss<F: Dynamics + ?Sized>(x_t: f64, x_prev: f64, f: &F) -> f64 {
    let d = x_t - f.apply(x_prev);
    d * d
}
