//! Bootstrap (SIR) particle filter with systematic resampling every step.
//!
//! Weights are carried in linear space and multiplied by the exponentiated
//! Gaussian log-likelihood, as a textbook SIR implementation does. Under a
//! badly misspecified noise model every weight can underflow to zero; the
//! filter then resets to uniform weights and keeps going.

use log::debug;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::likelihood::gaussian_log_likelihood;
use super::{Diagnostics, Tracker};
use crate::frame::{Grid, MeasurementFrame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfParams {
    pub n_particles: usize,
    pub transition_sigma: f64,
    pub like_sigma: f64,
    pub half_width: usize,
}

impl PfParams {
    pub fn new(like_sigma: f64) -> Self {
        Self {
            n_particles: 100,
            transition_sigma: 2.0,
            like_sigma,
            half_width: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub positions: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum()
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Systematic resampling: one uniform offset, `n` evenly spaced pointers into
/// the cumulative weights. Returns the selected indices in ascending order.
pub fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let step = 1.0 / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut i = 0;
    for _ in 0..n {
        while u > cum && i + 1 < weights.len() {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
        u += step;
    }
    out
}

pub struct ParticleFilter {
    grid: Grid,
    params: PfParams,
    set: ParticleSet,
    rng: ChaCha8Rng,
    started: bool,
    last: Diagnostics,
    collapses: usize,
}

impl ParticleFilter {
    /// All particles at `start`, uniform weights.
    pub fn new(grid: Grid, start: f64, params: PfParams, rng: ChaCha8Rng) -> Self {
        assert!(params.n_particles > 0);
        assert!(params.transition_sigma > 0.0 && params.like_sigma > 0.0);
        let n = params.n_particles;
        Self {
            grid,
            params,
            set: ParticleSet {
                positions: vec![grid.clamp(start); n],
                weights: vec![1.0 / n as f64; n],
            },
            rng,
            started: false,
            last: Diagnostics::None,
            collapses: 0,
        }
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.set
    }

    /// Number of ticks on which every weight underflowed.
    pub fn collapses(&self) -> usize {
        self.collapses
    }
}

impl Tracker for ParticleFilter {
    fn step(&mut self, frame: &MeasurementFrame) -> f64 {
        let n = self.params.n_particles;
        if self.started {
            let walk = Normal::new(0.0, self.params.transition_sigma).expect("positive sigma");
            for x in &mut self.set.positions {
                *x = self.grid.clamp(*x + walk.sample(&mut self.rng));
            }
        }
        self.started = true;

        let ll = gaussian_log_likelihood(frame, self.params.half_width, self.params.like_sigma);
        let mut total = 0.0;
        for (w, x) in self.set.weights.iter_mut().zip(&self.set.positions) {
            *w *= ll[self.grid.nearest_index(*x)].exp();
            total += *w;
        }
        let collapsed = !(total > 0.0 && total.is_finite());
        if collapsed {
            self.collapses += 1;
            debug!("particle weights underflowed; resetting to uniform");
            self.set.weights.fill(1.0 / n as f64);
        } else {
            for w in &mut self.set.weights {
                *w /= total;
            }
        }

        let estimate = self.grid.clamp(self.set.mean());
        self.last = Diagnostics::Pf {
            ess: self.set.effective_sample_size(),
            collapsed,
        };

        let picks = systematic_resample(&self.set.weights, n, &mut self.rng);
        self.set.positions = picks.iter().map(|&i| self.set.positions[i]).collect();
        self.set.weights.fill(1.0 / n as f64);
        estimate
    }

    fn diagnostics(&self) -> Diagnostics {
        self.last
    }
}
