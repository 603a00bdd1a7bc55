//! Synthetic 1D world: a slow-moving target observed through a square-pulse
//! detector response corrupted by a two-component Gaussian noise mixture.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::frame::{Grid, MeasurementFrame};
use crate::rng;

/// Scale of the outlier component relative to `σ_o`.
pub const OUTLIER_SCALE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("outlier fraction must lie in [0, 1], got {0}")]
    OutlierFrac(f64),
    #[error("noise scale must be finite and non-negative, got {0}")]
    NoiseScale(f64),
    #[error("horizon must be at least 1")]
    Horizon,
    #[error("trajectory law: {0}")]
    Law(&'static str),
}

/// How the true state moves: piecewise-constant velocity drawn from a fixed
/// set, redrawn with probability `1 / mean_segment` each step, reflected at
/// `±reflect_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLaw {
    pub velocities: Vec<f64>,
    pub mean_segment: f64,
    pub reflect_bound: f64,
}

impl Default for TrajectoryLaw {
    fn default() -> Self {
        Self {
            velocities: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            mean_segment: 50.0,
            reflect_bound: 450.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub half_width: usize,
    pub noise_scale: f64,
    pub outlier_frac: f64,
    pub horizon: usize,
    pub grid: Grid,
    pub seed: u64,
    pub law: TrajectoryLaw,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            half_width: 50,
            noise_scale: 1.0,
            outlier_frac: 0.0,
            horizon: 200,
            grid: Grid::standard(),
            seed: 0,
            law: TrajectoryLaw::default(),
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        if !(0.0..=1.0).contains(&self.outlier_frac) {
            return Err(WorldError::OutlierFrac(self.outlier_frac));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(WorldError::NoiseScale(self.noise_scale));
        }
        if self.horizon == 0 {
            return Err(WorldError::Horizon);
        }
        if self.law.velocities.is_empty() || self.law.velocities.iter().any(|v| v.abs() > 1.0) {
            return Err(WorldError::Law(
                "velocities must be non-empty with |v| <= 1",
            ));
        }
        if !(self.law.mean_segment >= 1.0) {
            return Err(WorldError::Law("mean segment length must be at least 1"));
        }
        if !(self.law.reflect_bound >= 1.0) {
            return Err(WorldError::Law("reflection bound must be at least 1"));
        }
        Ok(())
    }
}

/// True states and the frames observed at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub true_states: Vec<f64>,
    pub frames: Vec<MeasurementFrame>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.true_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_states.is_empty()
    }

    /// CSV with columns `t,z_t`, followed by one column per grid cell when
    /// `with_frames` is set. `t` starts at 1.
    pub fn write_csv<W: Write>(&self, mut out: W, with_frames: bool) -> io::Result<()> {
        write!(out, "t,z_t")?;
        if with_frames {
            if let Some(f) = self.frames.first() {
                for c in f.grid().cells() {
                    write!(out, ",m_{c}")?;
                }
            }
        }
        writeln!(out)?;
        for (t, (z, f)) in self.true_states.iter().zip(&self.frames).enumerate() {
            write!(out, "{},{}", t + 1, z)?;
            if with_frames {
                for v in f.values() {
                    write!(out, ",{v}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Square pulse `H(x, z)`: 1 when `|x - z| <= W`.
pub fn pulse(x: i64, z: f64, half_width: usize) -> f64 {
    if (x as f64 - z).abs() <= half_width as f64 {
        1.0
    } else {
        0.0
    }
}

/// One draw from `(1-ρ)·N(0, σ²) + ρ·N(0, (10σ)²)`.
///
/// Always consumes one uniform and one normal, so streams stay aligned across
/// different `ρ`.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, noise_scale: f64, outlier_frac: f64) -> f64 {
    let u: f64 = rng.random();
    let z: f64 = rng.sample(StandardNormal);
    let scale = if u < outlier_frac {
        OUTLIER_SCALE * noise_scale
    } else {
        noise_scale
    };
    z * scale
}

pub fn gen_trajectory<R: Rng + ?Sized>(cfg: &WorldConfig, rng: &mut R) -> Vec<f64> {
    let law = &cfg.law;
    let bound = law
        .reflect_bound
        .min(cfg.grid.max() as f64)
        .min(-cfg.grid.min() as f64);
    let switch_p = 1.0 / law.mean_segment;
    let pick = |rng: &mut R| law.velocities[rng.random_range(0..law.velocities.len())];

    let mut states = Vec::with_capacity(cfg.horizon);
    let mut z = 0.0;
    let mut v = pick(rng);
    states.push(z);
    for _ in 1..cfg.horizon {
        if rng.random::<f64>() < switch_p {
            v = pick(rng);
        }
        z += v;
        if z > bound {
            z = 2.0 * bound - z;
            v = -v;
        } else if z < -bound {
            z = -2.0 * bound - z;
            v = -v;
        }
        states.push(z);
    }
    states
}

/// `M(x) = H(x, z) + n(x)` over the whole grid.
pub fn gen_measurements<R: Rng + ?Sized>(
    z: f64,
    cfg: &WorldConfig,
    rng: &mut R,
) -> MeasurementFrame {
    let values = cfg
        .grid
        .cells()
        .map(|x| pulse(x, z, cfg.half_width) + sample_noise(rng, cfg.noise_scale, cfg.outlier_frac))
        .collect();
    MeasurementFrame::new(cfg.grid, values).expect("one value per grid cell")
}

/// Draws a full trace. The trajectory and the noise come from separate
/// streams of `cfg.seed`, so the trajectory does not depend on `σ_o` or `ρ`.
pub fn simulate(cfg: &WorldConfig) -> Result<Trace, WorldError> {
    cfg.validate()?;
    let mut traj_rng = rng::stream(cfg.seed, rng::TRAJECTORY_STREAM);
    let mut noise_rng = rng::stream(cfg.seed, rng::NOISE_STREAM);
    let true_states = gen_trajectory(cfg, &mut traj_rng);
    let frames = true_states
        .iter()
        .map(|&z| gen_measurements(z, cfg, &mut noise_rng))
        .collect();
    Ok(Trace {
        true_states,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empirical_std(rho: f64, sigma: f64, n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s2 = 0.0;
        let mut s1 = 0.0;
        for _ in 0..n {
            let x = sample_noise(&mut rng, sigma, rho);
            s1 += x;
            s2 += x * x;
        }
        let m = s1 / n as f64;
        (s2 / n as f64 - m * m).sqrt()
    }

    #[test]
    fn pulse_is_inclusive() {
        assert_eq!(pulse(30, 0.0, 50), 1.0);
        assert_eq!(pulse(51, 0.0, 50), 0.0);
        assert_eq!(pulse(-50, 0.0, 50), 1.0);
        assert_eq!(pulse(-51, 0.0, 50), 0.0);
    }

    #[test]
    fn noise_std_matches_components() {
        let n = 1_000_000;
        assert!((empirical_std(0.0, 1.0, n, 1) / 1.0 - 1.0).abs() < 0.01);
        assert!((empirical_std(1.0, 1.0, n, 2) / 10.0 - 1.0).abs() < 0.01);
        let var = empirical_std(0.2, 1.0, n, 3).powi(2);
        assert!((var / 20.8 - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn noiseless_frame_is_the_pulse() {
        let cfg = WorldConfig {
            noise_scale: 0.0,
            ..Default::default()
        };
        let f = gen_measurements(12.0, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(f.values().len(), 1001);
        for (x, v) in cfg.grid.cells().zip(f.values()) {
            assert_eq!(*v, pulse(x, 12.0, 50));
        }
    }

    #[test]
    fn frame_mean_converges_to_pulse() {
        let cfg = WorldConfig {
            outlier_frac: 0.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sum = vec![0.0; 1001];
        let reps = 10_000;
        for _ in 0..reps {
            let f = gen_measurements(-40.0, &cfg, &mut rng);
            for (s, v) in sum.iter_mut().zip(f.values()) {
                *s += v;
            }
        }
        for (x, s) in cfg.grid.cells().zip(&sum) {
            assert!((s / reps as f64 - pulse(x, -40.0, 50)).abs() < 0.05);
        }
    }

    #[test]
    fn noise_has_no_lag_one_correlation() {
        let cfg = WorldConfig {
            horizon: 100,
            outlier_frac: 0.1,
            ..Default::default()
        };
        let trace = simulate(&cfg).unwrap();
        // residual noise, 100 x 1001 ≈ 10^5 samples
        let noise: Vec<Vec<f64>> = trace
            .frames
            .iter()
            .zip(&trace.true_states)
            .map(|(f, &z)| {
                cfg.grid
                    .cells()
                    .zip(f.values())
                    .map(|(x, v)| v - pulse(x, z, 50))
                    .collect()
            })
            .collect();
        let corr = |pairs: Vec<(f64, f64)>| {
            let n = pairs.len() as f64;
            let (ma, mb) = pairs
                .iter()
                .fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
            let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
            for (a, b) in &pairs {
                sab += (a - ma) * (b - mb);
                saa += (a - ma).powi(2);
                sbb += (b - mb).powi(2);
            }
            sab / (saa * sbb).sqrt()
        };
        let across_x = noise
            .iter()
            .flat_map(|row| row.windows(2).map(|w| (w[0], w[1])))
            .collect();
        let across_t = noise
            .windows(2)
            .flat_map(|w| {
                w[0].iter()
                    .copied()
                    .zip(w[1].iter().copied())
                    .collect::<Vec<_>>()
            })
            .collect();
        assert!(corr(across_x).abs() < 0.02);
        assert!(corr(across_t).abs() < 0.02);
    }

    #[test]
    fn trace_invariants_over_many_seeds() {
        for seed in 0..1000 {
            let cfg = WorldConfig {
                seed,
                horizon: 200,
                ..Default::default()
            };
            let z = gen_trajectory(&cfg, &mut rng::stream(seed, rng::TRAJECTORY_STREAM));
            assert_eq!(z.len(), 200);
            assert_eq!(z[0], 0.0);
            assert!(z.windows(2).all(|w| (w[1] - w[0]).abs() <= 1.0));
            assert!(z.iter().all(|x| (-500.0..=500.0).contains(x)));
        }
    }

    #[test]
    fn reflection_keeps_long_paths_inside() {
        let cfg = WorldConfig {
            horizon: 20_000,
            law: TrajectoryLaw {
                velocities: vec![1.0],
                ..Default::default()
            },
            ..Default::default()
        };
        let z = gen_trajectory(&cfg, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(z.iter().all(|x| x.abs() <= 450.0));
        assert!(z.windows(2).all(|w| (w[1] - w[0]).abs() <= 1.0));
    }

    #[test]
    fn simulate_is_deterministic() {
        let cfg = WorldConfig {
            seed: 99,
            outlier_frac: 0.05,
            ..Default::default()
        };
        let a = simulate(&cfg).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a.frames.len(), 200);
        assert_eq!(a, simulate(&cfg).unwrap());
        let b = simulate(&WorldConfig {
            seed: 100,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a.frames[0].values(), b.frames[0].values());
    }

    #[test]
    fn trajectory_ignores_noise_parameters() {
        let a = simulate(&WorldConfig {
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        let b = simulate(&WorldConfig {
            seed: 5,
            noise_scale: 8.0,
            outlier_frac: 0.2,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(a.true_states, b.true_states);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = WorldConfig {
            outlier_frac: 1.5,
            ..Default::default()
        };
        assert_eq!(simulate(&bad), Err(WorldError::OutlierFrac(1.5)));
        let bad = WorldConfig {
            horizon: 0,
            ..Default::default()
        };
        assert_eq!(simulate(&bad), Err(WorldError::Horizon));
    }

    #[test]
    fn csv_export() {
        let cfg = WorldConfig {
            horizon: 3,
            ..Default::default()
        };
        let trace = simulate(&cfg).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,z_t");
        assert_eq!(lines.len(), 4);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 2 + 1001);
    }
}
