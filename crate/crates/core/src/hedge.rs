//! Decision-theoretic NormalHedge over `N` abstract actions.
//!
//! The learner keeps one (optionally discounted) regret per action and turns
//! the regret vector into a distribution through the NormalHedge potential:
//!
//! ```text
//! (1/N) Σ exp([R_i]₊² / 2c) = e,        p_i ∝ ([R_i]₊ / c) · exp([R_i]₊² / 2c)
//! ```
//!
//! The scale `c` is found by bisection. Internally the equation is solved in
//! normalized form: with `m = max_i [R_i]₊`, `u_i = [R_i]₊ / m` and
//! `k = m² / 2c`, the potential becomes `(1/N) Σ exp(u_i² k)`, which is
//! increasing in `k` and has its root in `[1, 1 + ln N]`. This keeps every
//! exponent bounded by `1 + ln N` no matter how large the regrets are.

use std::f64::consts::E;

use thiserror::Error;

/// Absolute residual required of every potential solve.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Bisection iteration cap.
pub const MAX_BISECTION_ITERS: usize = 200;

// Stop refining once the residual is this small; the interval usually
// collapses to adjacent floats a few iterations later anyway.
const EARLY_EXIT_RESIDUAL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HedgeError {
    #[error("every regret is non-positive; the potential equation has no solution")]
    AllNonPositive,
    #[error("expected {expected} losses, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("loss for action {index} is not finite")]
    NonFiniteLoss { index: usize },
    #[error("no actions")]
    EmptyActions,
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("discount must lie in [0, 1), got {0}")]
    BadDiscount(f64),
}

/// Root of the NormalHedge potential equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSolution {
    /// The scale `c_t > 0`. Saturates to `+inf` when the largest regret is so
    /// large that `max²` overflows; the weights stay well defined regardless.
    pub c: f64,
    /// `|(1/N) Σ exp([R]₊²/2c) − e|` at the returned `c`.
    pub residual: f64,
    // normalized root k = m² / 2c and the largest positive regret m
    scaled_root: f64,
    max_positive: f64,
}

impl PotentialSolution {
    /// Evaluates the potential `(1/N) Σ exp([R]₊²/2c)` at an arbitrary scale.
    pub fn potential_at(regrets: &[f64], c: f64) -> f64 {
        let n = regrets.len() as f64;
        regrets
            .iter()
            .map(|&r| {
                let r = r.max(0.0);
                // saturate instead of overflowing for tiny c
                (r * r / (2.0 * c)).min(700.0).exp()
            })
            .sum::<f64>()
            / n
    }
}

fn scaled_potential(scaled: &[f64], k: f64) -> f64 {
    scaled.iter().map(|&u| (u * u * k).exp()).sum::<f64>() / scaled.len() as f64
}

/// Solves `(1/N) Σ exp([R_i]₊²/2c) = e` for `c > 0`.
pub fn solve_potential(regrets: &[f64]) -> Result<PotentialSolution, HedgeError> {
    if regrets.is_empty() {
        return Err(HedgeError::EmptyActions);
    }
    let max_positive = regrets.iter().fold(0.0_f64, |m, &r| m.max(r));
    if !(max_positive > 0.0) {
        return Err(HedgeError::AllNonPositive);
    }
    let scaled: Vec<f64> = regrets.iter().map(|&r| r.max(0.0) / max_positive).collect();
    Ok(solve_scaled(&scaled, max_positive))
}

fn solve_scaled(scaled: &[f64], max_positive: f64) -> PotentialSolution {
    let n = scaled.len() as f64;
    // g(1) <= e because every term is at most e; g(1 + ln N) >= e because the
    // largest term alone contributes N·e.
    let mut lo = 1.0;
    let mut hi = 1.0 + n.ln();
    let mut g_lo = scaled_potential(scaled, lo) - E;
    let g_hi = scaled_potential(scaled, hi) - E;

    let (mut best_k, mut best_res) = if g_lo.abs() <= g_hi.abs() {
        (lo, g_lo.abs())
    } else {
        (hi, g_hi.abs())
    };

    let mut iters = 0;
    while best_res > EARLY_EXIT_RESIDUAL && iters < MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = scaled_potential(scaled, mid) - E;
        if g_mid.abs() < best_res {
            best_k = mid;
            best_res = g_mid.abs();
        }
        if g_mid == 0.0 {
            break;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }

    PotentialSolution {
        c: max_positive * max_positive / (2.0 * best_k),
        residual: best_res,
        scaled_root: best_k,
        max_positive,
    }
}

/// NormalHedge weights for a regret vector.
///
/// Falls back to the uniform distribution when no regret is positive.
pub fn weights_from_regrets(regrets: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; regrets.len()];
    weights_into(regrets, &mut out);
    out
}

/// Writes NormalHedge weights into `out` and returns the solved scale, or
/// `None` when the uniform fallback was used.
///
/// # Panics
///
/// Panics if `out.len() != regrets.len()`.
pub fn weights_into(regrets: &[f64], out: &mut [f64]) -> Option<PotentialSolution> {
    assert_eq!(regrets.len(), out.len());
    if regrets.is_empty() {
        return None;
    }
    match solve_potential(regrets) {
        Ok(sol) => {
            let k = sol.scaled_root;
            let m = sol.max_positive;
            let mut total = 0.0;
            for (w, &r) in out.iter_mut().zip(regrets) {
                let u = r.max(0.0) / m;
                // the common factor m / c is dropped by normalization
                *w = u * (u * u * k).exp();
                total += *w;
            }
            for w in out.iter_mut() {
                *w /= total;
            }
            Some(sol)
        }
        Err(_) => {
            out.fill(1.0 / regrets.len() as f64);
            None
        }
    }
}

/// Regrets and weights of a NormalHedge learner with geometric discounting.
///
/// A discount of 0 is the undiscounted algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState {
    regrets: Vec<f64>,
    weights: Vec<f64>,
    discount: f64,
}

impl HedgeState {
    pub fn new(n_actions: usize, discount: f64) -> Result<Self, HedgeError> {
        if n_actions == 0 {
            return Err(HedgeError::EmptyActions);
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(HedgeError::BadDiscount(discount));
        }
        Ok(Self {
            regrets: vec![0.0; n_actions],
            weights: vec![1.0 / n_actions as f64; n_actions],
            discount,
        })
    }

    /// Starts from explicit regrets; weights are derived from them.
    pub fn with_regrets(regrets: Vec<f64>, discount: f64) -> Result<Self, HedgeError> {
        if regrets.is_empty() {
            return Err(HedgeError::EmptyActions);
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(HedgeError::BadDiscount(discount));
        }
        let weights = weights_from_regrets(&regrets);
        Ok(Self {
            regrets,
            weights,
            discount,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.regrets.len()
    }

    pub fn regrets(&self) -> &[f64] {
        &self.regrets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Plays one round: charges the learner the expected loss under the
    /// current weights, updates the regrets, and recomputes the weights.
    /// Returns the learner's loss for the round.
    pub fn round(&mut self, losses: &[f64]) -> Result<f64, HedgeError> {
        if losses.len() != self.regrets.len() {
            return Err(HedgeError::LengthMismatch {
                expected: self.regrets.len(),
                got: losses.len(),
            });
        }
        if let Some(index) = losses.iter().position(|l| !l.is_finite()) {
            return Err(HedgeError::NonFiniteLoss { index });
        }
        let learner = LearnerLoss::new(&self.weights, losses);
        let keep = 1.0 - self.discount;
        for (r, &l) in self.regrets.iter_mut().zip(losses) {
            *r = keep * *r + learner.regret_against(l);
        }
        weights_into(&self.regrets, &mut self.weights);
        Ok(learner.total())
    }
}

/// Expected loss under `weights`, split as `floor + excess` where `floor` is
/// the smallest loss. Regret increments are formed as
/// `excess - (ℓ_i - floor)`, so equal losses give increments of exactly zero.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LearnerLoss {
    pub floor: f64,
    pub excess: f64,
}

impl LearnerLoss {
    pub(crate) fn new(weights: &[f64], losses: &[f64]) -> Self {
        let floor = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let excess = weights
            .iter()
            .zip(losses)
            .map(|(p, l)| p * (l - floor))
            .sum();
        Self { floor, excess }
    }

    pub(crate) fn total(&self) -> f64 {
        self.floor + self.excess
    }

    /// `ℓ_A - loss`.
    pub(crate) fn regret_against(&self, loss: f64) -> f64 {
        self.excess - (loss - self.floor)
    }
}

/// Regret of the learner to the top `epsilon`-quantile of actions: the
/// learner's cumulative loss minus the `⌈εN⌉`-th smallest action loss.
pub fn regret_to_quantile(
    action_cum_losses: &[f64],
    algorithm_cum_loss: f64,
    epsilon: f64,
) -> Result<f64, HedgeError> {
    if action_cum_losses.is_empty() {
        return Err(HedgeError::EmptyActions);
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(HedgeError::BadEpsilon(epsilon));
    }
    let n = action_cum_losses.len();
    // guard against εN landing a hair above an integer through rounding
    let rank = ((epsilon * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let mut sorted = action_cum_losses.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(algorithm_cum_loss - sorted[rank - 1])
}
