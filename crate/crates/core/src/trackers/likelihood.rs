//! Gaussian log-likelihood of a frame under the pulse measurement model
//! `M(x) ~ N(H(x, s), σ²)`, for every candidate cell `s` at once.
//!
//! Only cells inside the pulse window depend on `s`:
//! `-Σ_x (M - H)² / 2σ² = -Σ_x M² / 2σ² + Σ_{|x-s|<=W} (2M - 1) / 2σ²`.

use crate::frame::MeasurementFrame;

/// The `s`-dependent part `Σ_{|x-s|<=W} (2M(x) - 1) / 2σ²` for every cell.
pub fn window_log_likelihood(frame: &MeasurementFrame, half_width: usize, sigma: f64) -> Vec<f64> {
    let grid = frame.grid();
    let mut prefix = Vec::with_capacity(grid.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &m in frame.values() {
        acc += 2.0 * m - 1.0;
        prefix.push(acc);
    }
    let scale = 1.0 / (2.0 * sigma * sigma);
    grid.cells()
        .map(|s| {
            let r = grid.window(s, half_width);
            (prefix[r.end] - prefix[r.start]) * scale
        })
        .collect()
}

/// Full log-likelihood `-Σ_x (M(x) - H(x, s))² / 2σ²` for every cell `s`,
/// without the Gaussian normalizing constant.
pub fn gaussian_log_likelihood(
    frame: &MeasurementFrame,
    half_width: usize,
    sigma: f64,
) -> Vec<f64> {
    let base = frame.values().iter().map(|m| m * m).sum::<f64>() / (2.0 * sigma * sigma);
    let mut field = window_log_likelihood(frame, half_width, sigma);
    for v in &mut field {
        *v -= base;
    }
    field
}
