//! Tracking with discounted NormalHedge over a resampled pool of actions.
//!
//! Each action is a path through the state space, represented by its current
//! state. Per tick: charge every action its observation loss, update the
//! discounted regrets, delete actions whose regret is non-positive, replace
//! them by Gaussian perturbations of surviving actions, recompute the
//! NormalHedge weights, report the weighted mean state, then advance every
//! state through the dynamics.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Diagnostics, Tracker};
use crate::frame::MeasurementFrame;
use crate::hedge::{self, LearnerLoss};
use crate::loss::{observation_losses, Dynamics, Identity, LossConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NhParams {
    pub n_actions: usize,
    /// Discount `α` applied to past regret each tick.
    pub discount: f64,
    /// Resampling variance `Σ*` (a 1×1 covariance).
    pub resample_var: f64,
}

impl Default for NhParams {
    fn default() -> Self {
        Self {
            n_actions: 100,
            discount: 0.02,
            resample_var: 400.0,
        }
    }
}

pub struct NhTracker<F: Dynamics = Identity> {
    loss: LossConfig,
    params: NhParams,
    dynamics: F,
    rng: ChaCha8Rng,
    states: Vec<f64>,
    regrets: Vec<f64>,
    weights: Vec<f64>,
    // previous-round snapshot used by resampling
    prev_states: Vec<f64>,
    prev_regrets: Vec<f64>,
    prev_weights: Vec<f64>,
    last: Diagnostics,
}

impl<F: Dynamics> NhTracker<F> {
    /// Pool of `n_actions` states drawn uniformly over the grid, zero regret,
    /// uniform weights.
    pub fn new(loss: LossConfig, params: NhParams, dynamics: F, mut rng: ChaCha8Rng) -> Self {
        let g = loss.grid();
        let states = (0..params.n_actions)
            .map(|_| rng.random_range(g.min() as f64..=g.max() as f64))
            .collect();
        let n = params.n_actions;
        Self::from_pool(
            loss,
            params,
            dynamics,
            rng,
            states,
            vec![0.0; n],
            vec![1.0 / n as f64; n],
        )
    }

    /// Starts from an explicit pool.
    ///
    /// # Panics
    ///
    /// Panics if the three vectors do not all have `params.n_actions` entries.
    pub fn from_pool(
        loss: LossConfig,
        params: NhParams,
        dynamics: F,
        rng: ChaCha8Rng,
        states: Vec<f64>,
        regrets: Vec<f64>,
        weights: Vec<f64>,
    ) -> Self {
        let n = params.n_actions;
        assert!(n > 0, "empty action pool");
        assert!(states.len() == n && regrets.len() == n && weights.len() == n);
        assert!((0.0..1.0).contains(&params.discount));
        assert!(params.resample_var >= 0.0);
        let states = states.into_iter().map(|x| loss.grid().clamp(x)).collect();
        Self {
            loss,
            params,
            dynamics,
            rng,
            states,
            regrets,
            weights,
            prev_states: Vec::with_capacity(n),
            prev_regrets: Vec::with_capacity(n),
            prev_weights: Vec::with_capacity(n),
            last: Diagnostics::None,
        }
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn regrets(&self) -> &[f64] {
        &self.regrets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Replaces every action in `deleted` by a perturbed copy of a source
    /// action. Sources are drawn from the previous-round weights restricted
    /// to positive-regret actions, or uniformly from the whole previous pool
    /// when none has positive regret. Children inherit the discounted regret
    /// of their source plus this tick's instantaneous regret at their own
    /// state; they are never deleted again within the tick.
    fn resample(&mut self, deleted: &[usize], learner: &LearnerLoss, losses_by_cell: &[f64]) {
        let n = self.params.n_actions;
        let grid = self.loss.grid();
        let keep = 1.0 - self.params.discount;

        let mut source_weights: Vec<f64> = (0..n)
            .map(|i| {
                if self.regrets[i] > 0.0 {
                    self.prev_weights[i]
                } else {
                    0.0
                }
            })
            .collect();
        let any_positive = self.regrets.iter().any(|&r| r > 0.0);
        if !any_positive {
            source_weights.fill(1.0);
        } else if !(source_weights.iter().sum::<f64>() > 0.0) {
            // positive-regret actions all had zero weight last round
            for (w, r) in source_weights.iter_mut().zip(&self.regrets) {
                *w = if *r > 0.0 { 1.0 } else { 0.0 };
            }
        }
        let sources = WeightedIndex::new(&source_weights).expect("some positive source weight");
        let jitter = Normal::new(0.0, self.params.resample_var.sqrt()).expect("finite variance");

        for &j in deleted {
            let i = sources.sample(&mut self.rng);
            let child = grid.clamp(self.prev_states[i] + jitter.sample(&mut self.rng));
            self.states[j] = child;
            self.regrets[j] = keep * self.prev_regrets[i]
                + learner.regret_against(losses_by_cell[grid.nearest_index(child)]);
        }
    }
}

impl<F: Dynamics> Tracker for NhTracker<F> {
    fn step(&mut self, frame: &MeasurementFrame) -> f64 {
        let grid = self.loss.grid();
        let keep = 1.0 - self.params.discount;
        let losses_by_cell = observation_losses(frame, &self.loss);

        self.prev_states.clone_from(&self.states);
        self.prev_regrets.clone_from(&self.regrets);
        self.prev_weights.clone_from(&self.weights);

        let losses: Vec<f64> = self
            .states
            .iter()
            .map(|&x| losses_by_cell[grid.nearest_index(x)])
            .collect();
        let learner = LearnerLoss::new(&self.weights, &losses);
        for (r, &l) in self.regrets.iter_mut().zip(&losses) {
            *r = keep * *r + learner.regret_against(l);
        }

        let deleted: Vec<usize> = (0..self.regrets.len())
            .filter(|&i| self.regrets[i] <= 0.0)
            .collect();
        if !deleted.is_empty() {
            self.resample(&deleted, &learner, &losses_by_cell);
        }

        let sol = hedge::weights_into(&self.regrets, &mut self.weights);
        self.last = Diagnostics::Nh {
            deleted: deleted.len(),
            c: sol.map(|s| s.c),
        };

        let estimate: f64 = self
            .weights
            .iter()
            .zip(&self.states)
            .map(|(p, x)| p * x)
            .sum();
        for x in &mut self.states {
            *x = grid.clamp(self.dynamics.apply(*x));
        }
        grid.clamp(estimate)
    }

    fn diagnostics(&self) -> Diagnostics {
        self.last
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Grid;
    use crate::rng;
    use crate::world::{pulse, simulate, WorldConfig};

    fn loss_cfg() -> LossConfig {
        LossConfig::new(50, 1.0, Grid::standard()).unwrap()
    }

    fn pulse_frame(z: f64) -> MeasurementFrame {
        let g = Grid::standard();
        MeasurementFrame::new(g, g.cells().map(|c| pulse(c, z, 50)).collect()).unwrap()
    }

    #[test]
    fn single_action_estimate_is_its_state() {
        let params = NhParams {
            n_actions: 1,
            ..Default::default()
        };
        let mut nh = NhTracker::new(loss_cfg(), params, Identity, rng::stream(0, 2));
        for z in [0.0, 40.0, -300.0] {
            let est = nh.step(&pulse_frame(z));
            assert_eq!(est, nh.states()[0]);
        }
    }

    #[test]
    fn mirror_pair_estimates_midpoint() {
        let params = NhParams {
            n_actions: 2,
            ..Default::default()
        };
        let mut nh = NhTracker::from_pool(
            loss_cfg(),
            params,
            Identity,
            rng::stream(0, 2),
            vec![-30.0, 50.0],
            vec![1.0, 1.0],
            vec![0.5, 0.5],
        );
        // pulse centred on the midpoint: both actions see the same loss
        let est = nh.step(&pulse_frame(10.0));
        assert_eq!(est, 10.0);
        assert_eq!(nh.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn pool_is_conserved() {
        let cfg = WorldConfig {
            outlier_frac: 0.1,
            seed: 21,
            ..Default::default()
        };
        let trace = simulate(&cfg).unwrap();
        let mut nh = NhTracker::new(
            loss_cfg(),
            NhParams::default(),
            Identity,
            rng::stream(21, 2),
        );
        for f in &trace.frames {
            let est = nh.step(f);
            assert!((-500.0..=500.0).contains(&est));
            assert_eq!(nh.states().len(), 100);
            assert_eq!(nh.regrets().len(), 100);
            assert!((nh.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(nh
                .states()
                .iter()
                .chain(nh.regrets())
                .all(|v| v.is_finite()));
            if nh.regrets().iter().any(|&r| r > 0.0) {
                for (w, r) in nh.weights().iter().zip(nh.regrets()) {
                    assert_eq!(*w > 0.0, *r > 0.0);
                }
            }
        }
    }

    #[test]
    fn child_regret_inherits_discounted_parent() {
        // parent regret 1, α = 0.02, learner loss -5, child loss -6 → 1.98
        let params = NhParams {
            n_actions: 2,
            discount: 0.02,
            resample_var: 0.0,
        };
        let mut nh = NhTracker::from_pool(
            loss_cfg(),
            params,
            Identity,
            rng::stream(0, 2),
            vec![0.0, 0.0],
            vec![1.0, -1.0],
            vec![1.0, 0.0],
        );
        nh.prev_states = vec![0.0, 0.0];
        nh.prev_regrets = vec![1.0, -1.0];
        nh.prev_weights = vec![1.0, 0.0];
        nh.regrets = vec![0.5, -0.5];
        let mut by_cell = vec![0.0; 1001];
        by_cell[500] = -6.0;
        let learner = LearnerLoss {
            floor: -6.0,
            excess: 1.0,
        };
        nh.resample(&[1], &learner, &by_cell);
        assert!((nh.regrets()[1] - 1.98).abs() < 1e-12);
        assert_eq!(nh.states()[1], 0.0);
    }

    #[test]
    fn tracks_a_clean_pulse() {
        let mut nh = NhTracker::new(loss_cfg(), NhParams::default(), Identity, rng::stream(3, 2));
        let mut est = 0.0;
        for _ in 0..30 {
            est = nh.step(&pulse_frame(-120.0));
        }
        assert!((est + 120.0).abs() < 5.0, "estimate {est}");
    }
}
