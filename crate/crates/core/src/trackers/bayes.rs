//! Exact recursive Bayes filter over the grid: Gaussian random-walk
//! transition, pulse-plus-Gaussian likelihood, posterior-mean estimate.

use log::warn;

use super::likelihood::window_log_likelihood;
use super::Tracker;
use crate::frame::{Grid, MeasurementFrame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesParams {
    /// Transition standard deviation `σ_d`.
    pub transition_sigma: f64,
    /// Measurement noise standard deviation assumed by the likelihood.
    pub like_sigma: f64,
    pub half_width: usize,
}

impl BayesParams {
    pub fn new(like_sigma: f64) -> Self {
        Self {
            transition_sigma: 2.0,
            like_sigma,
            half_width: 50,
        }
    }
}

/// Transition kernel truncated at ±6σ_d, renormalized per source cell so no
/// mass leaves the grid.
#[derive(Debug, Clone)]
struct Kernel {
    taps: Vec<f64>,
    radius: usize,
    // 1 / Σ_j k(j - i) over on-grid destinations j, per source i
    inv_norm: Vec<f64>,
}

impl Kernel {
    fn new(grid: Grid, sigma: f64) -> Self {
        let radius = (6.0 * sigma).floor() as usize;
        let taps: Vec<f64> = (-(radius as i64)..=radius as i64)
            .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let n = grid.len();
        let inv_norm = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(radius);
                let hi = (i + radius).min(n - 1);
                let z: f64 = (lo..=hi).map(|j| taps[j + radius - i]).sum();
                1.0 / z
            })
            .collect();
        Self {
            taps,
            radius,
            inv_norm,
        }
    }

    fn apply(&self, mass: &[f64], out: &mut [f64]) {
        let n = mass.len();
        out.fill(0.0);
        for (i, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let scaled = m * self.inv_norm[i];
            let lo = i.saturating_sub(self.radius);
            let hi = (i + self.radius).min(n - 1);
            let taps = &self.taps[lo + self.radius - i..=hi + self.radius - i];
            for (o, k) in out[lo..=hi].iter_mut().zip(taps) {
                *o += scaled * k;
            }
        }
    }
}

/// Posterior mass over the grid.
#[derive(Debug, Clone)]
pub struct GridPosterior {
    grid: Grid,
    mass: Vec<f64>,
    params: BayesParams,
    kernel: Kernel,
    scratch: Vec<f64>,
    started: bool,
}

impl GridPosterior {
    /// Prior with all mass on one cell.
    ///
    /// # Panics
    ///
    /// Panics if `cell` is off the grid.
    pub fn point_mass(grid: Grid, cell: i64, params: BayesParams) -> Self {
        let mut mass = vec![0.0; grid.len()];
        mass[grid.index_of(cell).expect("prior cell on grid")] = 1.0;
        Self::from_mass(grid, mass, params)
    }

    /// Prior from arbitrary non-negative mass, normalized here.
    ///
    /// # Panics
    ///
    /// Panics if the mass has the wrong length, a negative entry, or zero total.
    pub fn from_mass(grid: Grid, mut mass: Vec<f64>, params: BayesParams) -> Self {
        assert_eq!(mass.len(), grid.len());
        assert!(mass.iter().all(|&m| m >= 0.0));
        let total: f64 = mass.iter().sum();
        assert!(total > 0.0);
        for m in &mut mass {
            *m /= total;
        }
        assert!(params.transition_sigma > 0.0 && params.like_sigma > 0.0);
        Self {
            grid,
            kernel: Kernel::new(grid, params.transition_sigma),
            scratch: vec![0.0; mass.len()],
            mass,
            params,
            started: false,
        }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Pushes the posterior through the transition kernel.
    pub fn predict(&mut self) {
        self.kernel.apply(&self.mass, &mut self.scratch);
        std::mem::swap(&mut self.mass, &mut self.scratch);
    }

    /// Multiplies in the likelihood of `frame`, normalizing in log space.
    pub fn update(&mut self, frame: &MeasurementFrame) {
        let ll = window_log_likelihood(frame, self.params.half_width, self.params.like_sigma);
        let max = self
            .mass
            .iter()
            .zip(&ll)
            .filter(|(m, _)| **m > 0.0)
            .map(|(_, l)| *l)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (m, l) in self.mass.iter_mut().zip(&ll) {
            if *m > 0.0 {
                *m *= (l - max).exp();
                total += *m;
            }
        }
        if !(total > 0.0 && total.is_finite()) {
            // unreachable for finite frames: the argmax term contributes its full mass
            warn!("grid posterior lost all mass; keeping the prior");
            return;
        }
        for m in &mut self.mass {
            *m /= total;
        }
    }

    pub fn mean(&self) -> f64 {
        self.grid
            .cells()
            .zip(&self.mass)
            .map(|(c, m)| c as f64 * m)
            .sum()
    }
}

impl Tracker for GridPosterior {
    /// Predict (skipped on the first tick), update, then report the mean.
    fn step(&mut self, frame: &MeasurementFrame) -> f64 {
        if self.started {
            self.predict();
        }
        self.started = true;
        self.update(frame);
        self.grid.clamp(self.mean())
    }
}
