//! Particle filter against the exact grid filter, and tracker sanity on
//! simulated traces.

use nhtrack::bench::rmse;
use nhtrack::rng;
use nhtrack::trackers::{BayesParams, GridPosterior, ParticleFilter, PfParams, Tracker};
use nhtrack::world::{simulate, WorldConfig};

const HORIZON: usize = 40;

/// Per-step |PF − Bayes| over a few clean traces.
fn gaps(n_particles: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for seed in 0..3u64 {
        let cfg = WorldConfig {
            horizon: HORIZON,
            seed: 900 + seed,
            ..Default::default()
        };
        let trace = simulate(&cfg).unwrap();
        let mut bayes = GridPosterior::point_mass(cfg.grid, 0, BayesParams::new(1.0));
        let params = PfParams {
            n_particles,
            ..PfParams::new(1.0)
        };
        let mut pf =
            ParticleFilter::new(cfg.grid, 0.0, params, rng::stream(cfg.seed, rng::PF_STREAM));
        for f in &trace.frames {
            out.push((pf.step(f) - bayes.step(f)).abs());
        }
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn particle_filter_converges_to_grid_filter() {
    let sizes = [100, 1_000, 10_000, 100_000];
    let errs: Vec<Vec<f64>> = sizes.iter().map(|&n| gaps(n)).collect();
    let means: Vec<f64> = errs.iter().map(|e| mean(e)).collect();
    for w in means.windows(2) {
        assert!(w[1] < w[0], "gap did not shrink: {means:?}");
    }
    let mut big = errs[3].clone();
    big.sort_by(f64::total_cmp);
    let p95 = big[(big.len() * 95) / 100];
    assert!(p95 < 1.0, "95th percentile gap {p95} at 1e5 particles");
}

#[test]
fn grid_filter_tracks_a_clean_trace() {
    let cfg = WorldConfig {
        seed: 31,
        ..Default::default()
    };
    let trace = simulate(&cfg).unwrap();
    let mut bayes = GridPosterior::point_mass(cfg.grid, 0, BayesParams::new(1.0));
    let est: Vec<f64> = trace.frames.iter().map(|f| bayes.step(f)).collect();
    let e = rmse(&est, &trace.true_states).unwrap();
    assert!(e < 2.5, "rmse {e}");
}
