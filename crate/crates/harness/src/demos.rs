//! Synthetic demonstrations and goal trajectories.

use std::f64::consts::TAU;

use cgda_core::trajectory::{compute_goal_count, Demonstration, FeatureTrajectory, GeneralizedAction, TrajectoryError};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::WaxDemoConfig;

/// Noiseless point of the circle at phase `s` in `[0, 1]`.
pub fn circle_point(cfg: &WaxDemoConfig, s: f64) -> [f64; 3] {
    let r = cfg.diameter / 2.0;
    let a = TAU * cfg.revolutions * s;
    [cfg.center[0] + r * a.cos(), cfg.center[1] + r * a.sin(), cfg.center[2]]
}

/// `cfg.count` demonstrations of the tool tracing a horizontal circle, with
/// isotropic Gaussian noise of `cfg.noise` meters on every sample.
pub fn generate_wax_demos<R: Rng>(cfg: &WaxDemoConfig, rng: &mut R) -> Vec<Demonstration<f64>> {
    let noise = Normal::new(0.0, cfg.noise).expect("noise is finite and non-negative");
    let last = (cfg.samples - 1) as f64;
    (0..cfg.count)
        .map(|_| {
            let samples = (0..cfg.samples).map(|k| {
                let s = k as f64 / last;
                let p = circle_point(cfg, s).map(|v| v + noise.sample(rng));
                (cfg.duration * s, p.to_vec())
            });
            Demonstration::from_samples(samples).expect("generated timestamps increase")
        })
        .collect()
}

/// Painted-percentage ramp: goal `j` of `n` (1-based) is `(j / n)^exponent * 100`.
pub fn generate_paint_goal(t_min: f64, duration: f64, exponent: f64) -> Result<GeneralizedAction<f64>, TrajectoryError> {
    let n = compute_goal_count(duration, t_min)?;
    let goals: Vec<[f64; 1]> = (1..=n).map(|j| [(j as f64 / n as f64).powf(exponent) * 100.0]).collect();
    let traj = FeatureTrajectory::from_columns(goals)?;
    GeneralizedAction::from_goals(traj, duration, t_min)
}
