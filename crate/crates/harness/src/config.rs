//! TOML experiment configuration.
//!
//! ```toml
//! repetitions = 10
//! seed = 7
//! t_min = 1.0
//!
//! [action]
//! kind = "wax"
//! diameter = 0.30
//! duration = 8.0
//!
//! [optimizer]
//! method = ["sst", "fi-pso"]
//!
//! [constraints]
//! dilatation = [0.1, inf]
//! max_velocity = inf
//! ```

use std::path::{Path, PathBuf};

use cgda_core::scalar::serde_float;
use cgda_core::simenv::{Axis, WallSpec};
use cgda_core::{OptimizerConfig, OptimizerKind, PenaltyStrategy, Termination, VelocityNorm};
use serde::{Deserialize, Deserializer};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    pub t_min: f64,
    pub action: ActionConfig,
    #[serde(default)]
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub optimizer: OptimizerBlock,
    #[serde(default)]
    pub constraints: ConstraintsBlock,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ActionConfig {
    Wax(WaxDemoConfig),
    Paint(PaintGoalConfig),
    /// Demonstration CSV files, resolved against the config file's directory.
    Custom { files: Vec<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaxDemoConfig {
    /// Meters.
    #[serde(default = "WaxDemoConfig::default_diameter")]
    pub diameter: f64,
    #[serde(default = "one")]
    pub revolutions: f64,
    /// Feature noise standard deviation, meters.
    #[serde(default = "WaxDemoConfig::default_noise")]
    pub noise: f64,
    #[serde(default = "WaxDemoConfig::default_count")]
    pub count: usize,
    /// Seconds.
    pub duration: f64,
    #[serde(default = "WaxDemoConfig::default_samples")]
    pub samples: usize,
    #[serde(default = "WaxDemoConfig::default_center")]
    pub center: [f64; 3],
}

impl WaxDemoConfig {
    fn default_diameter() -> f64 {
        0.30
    }

    fn default_noise() -> f64 {
        0.005
    }

    fn default_count() -> usize {
        5
    }

    fn default_samples() -> usize {
        100
    }

    pub fn default_center() -> [f64; 3] {
        [0.3, 0.25, -0.4]
    }

    pub fn with_duration(duration: f64) -> Self {
        Self {
            diameter: Self::default_diameter(),
            revolutions: 1.0,
            noise: Self::default_noise(),
            count: Self::default_count(),
            duration,
            samples: Self::default_samples(),
            center: Self::default_center(),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaintGoalConfig {
    pub duration: f64,
    /// Goal j of n is `(j / n)^exponent * 100`.
    #[serde(default = "one")]
    pub ramp_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    /// Degrees; defaults to all zeros.
    #[serde(default)]
    pub home: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default = "EnvironmentConfig::default_warm_noise")]
    pub warm_start_noise: f64,
    /// Replaces the default three-joint arm.
    #[serde(default)]
    pub chain: Option<Vec<LinkConfig>>,
    /// Meters, in the last link frame.
    #[serde(default)]
    pub tool_offset: Option<[f64; 3]>,
    /// Overrides of the default wall (paint only).
    #[serde(default)]
    pub wall: WallConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    /// Meters.
    pub length: f64,
    pub axis: Axis,
    /// Degrees.
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallConfig {
    pub center: Option<[f64; 3]>,
    pub u_axis: Option<[f64; 3]>,
    pub v_axis: Option<[f64; 3]>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub resolution: Option<[usize; 2]>,
    pub paint_distance: Option<f64>,
}

impl WallConfig {
    pub fn spec(&self) -> WallSpec<f64> {
        let d = WallSpec::default_for_arm();
        WallSpec {
            center: self.center.unwrap_or(d.center),
            u_axis: self.u_axis.unwrap_or(d.u_axis),
            v_axis: self.v_axis.unwrap_or(d.v_axis),
            width: self.width.unwrap_or(d.width),
            height: self.height.unwrap_or(d.height),
            resolution: self.resolution.map_or(d.resolution, |[u, v]| (u, v)),
            paint_distance: self.paint_distance.unwrap_or(d.paint_distance),
        }
    }
}

impl EnvironmentConfig {
    fn default_warm_noise() -> f64 {
        10.0
    }
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            home: None,
            warm_start: true,
            warm_start_noise: Self::default_warm_noise(),
            chain: None,
            tool_offset: None,
            wall: WallConfig::default(),
        }
    }
}

fn yes() -> bool {
    true
}

/// Optimizer hyperparameters. Unset fields take the per-action defaults.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerBlock {
    #[serde(default, deserialize_with = "one_or_many")]
    pub method: Vec<OptimizerKind>,
    pub population_size: Option<usize>,
    pub mutation_probability: Option<f64>,
    pub inertia: Option<f64>,
    pub cognitive: Option<f64>,
    pub social: Option<f64>,
    pub v_max: Option<f64>,
    pub inheritance_proportion: Option<f64>,
    pub max_granules: Option<usize>,
    pub granule_width: Option<f64>,
    pub granule_threshold: Option<f64>,
    pub stall_generations: Option<usize>,
    pub zero_error_epsilon: Option<f64>,
    pub max_generations: Option<usize>,
    #[serde(default)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    #[default]
    Death,
    Static,
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    #[default]
    MaxAbs,
    L2,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsBlock {
    /// `false` runs without any feasibility checks.
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Meters, or `inf`.
    #[serde(default = "unbounded", deserialize_with = "floats_one_or_many")]
    pub dilatation: Vec<f64>,
    /// Degrees per goal, or `inf`.
    #[serde(default = "unbounded", deserialize_with = "floats_one_or_many")]
    pub max_velocity: Vec<f64>,
    #[serde(default)]
    pub penalty: PenaltyKind,
    pub penalty_value: Option<f64>,
    #[serde(default)]
    pub velocity_norm: NormKind,
}

impl Default for ConstraintsBlock {
    fn default() -> Self {
        Self {
            enabled: true,
            dilatation: unbounded(),
            max_velocity: unbounded(),
            penalty: PenaltyKind::Death,
            penalty_value: None,
            velocity_norm: NormKind::MaxAbs,
        }
    }
}

fn unbounded() -> Vec<f64> {
    vec![f64::INFINITY]
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D: Deserializer<'de>, T: Deserialize<'de>>(d: D) -> Result<Vec<T>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Deserialize)]
struct Float(#[serde(with = "serde_float")] f64);

fn floats_one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Ok(match OneOrMany::<Float>::deserialize(d)? {
        OneOrMany::One(v) => vec![v.0],
        OneOrMany::Many(v) => v.into_iter().map(|f| f.0).collect(),
    })
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads, parses, resolves relative demo paths and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let ActionConfig::Custom { files } = &mut cfg.action {
            let base = path.parent().unwrap_or(Path::new("."));
            for f in files.iter_mut() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn methods(&self) -> Vec<OptimizerKind> {
        if self.optimizer.method.is_empty() {
            vec![OptimizerKind::Sst]
        } else {
            self.optimizer.method.clone()
        }
    }

    pub fn is_paint(&self) -> bool {
        matches!(self.action, ActionConfig::Paint(_))
    }

    /// Optimizer settings with action defaults: population 50 and a
    /// three-iteration stall for wax-like actions, population 10 and a
    /// ten-iteration stall for paint.
    pub fn optimizer_config(&self, seed: u64) -> OptimizerConfig<f64> {
        let o = &self.optimizer;
        let base = OptimizerConfig::<f64>::default();
        let (pop, stall) = if self.is_paint() { (10, 10) } else { (50, 3) };
        OptimizerConfig {
            population_size: o.population_size.unwrap_or(pop),
            mutation_probability: o.mutation_probability.unwrap_or(base.mutation_probability),
            inertia: o.inertia.unwrap_or(base.inertia),
            cognitive: o.cognitive.unwrap_or(base.cognitive),
            social: o.social.unwrap_or(base.social),
            v_max: o.v_max.unwrap_or(base.v_max),
            inheritance_proportion: o.inheritance_proportion.unwrap_or(base.inheritance_proportion),
            max_granules: o.max_granules.unwrap_or(base.max_granules),
            granule_width: o.granule_width.unwrap_or(base.granule_width),
            granule_threshold: o.granule_threshold.unwrap_or(base.granule_threshold),
            termination: Termination {
                stall_generations: o.stall_generations.unwrap_or(stall),
                zero_error_epsilon: o.zero_error_epsilon.unwrap_or(base.termination.zero_error_epsilon),
                max_generations: o.max_generations.unwrap_or(base.termination.max_generations),
            },
            rng_seed: seed,
            parallel: o.parallel,
        }
    }

    pub fn penalty(&self) -> PenaltyStrategy<f64> {
        let c = &self.constraints;
        match c.penalty {
            PenaltyKind::Death => PenaltyStrategy::Death,
            PenaltyKind::Static => PenaltyStrategy::Static(c.penalty_value.unwrap_or(0.0)),
            PenaltyKind::Additive => PenaltyStrategy::Additive(c.penalty_value.unwrap_or(0.0)),
            PenaltyKind::Multiplicative => PenaltyStrategy::Multiplicative(c.penalty_value.unwrap_or(1.0)),
        }
    }

    pub fn velocity_norm(&self) -> VelocityNorm {
        match self.constraints.velocity_norm {
            NormKind::MaxAbs => VelocityNorm::MaxAbs,
            NormKind::L2 => VelocityNorm::L2,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return bad("t_min must be positive and finite".into());
        }
        match &self.action {
            ActionConfig::Wax(w) => {
                if !(w.diameter > 0.0) || !w.diameter.is_finite() {
                    return bad("action.diameter must be positive".into());
                }
                if w.count == 0 {
                    return bad("action.count must be at least 1".into());
                }
                if !(w.noise >= 0.0) {
                    return bad("action.noise must be non-negative".into());
                }
                if w.samples < 2 {
                    return bad("action.samples must be at least 2".into());
                }
                if !(w.revolutions > 0.0) {
                    return bad("action.revolutions must be positive".into());
                }
                if !(w.duration >= self.t_min) {
                    return bad("action.duration must be at least t_min".into());
                }
            }
            ActionConfig::Paint(p) => {
                if !(p.duration >= self.t_min) || !p.duration.is_finite() {
                    return bad("action.duration must be at least t_min".into());
                }
                if !(p.ramp_exponent > 0.0) {
                    return bad("action.ramp_exponent must be positive".into());
                }
            }
            ActionConfig::Custom { files } => {
                if files.is_empty() {
                    return bad("action.files must list at least one demonstration".into());
                }
                if let Some(missing) = files.iter().find(|f| !f.is_file()) {
                    return bad(format!("demonstration file {} does not exist", missing.display()));
                }
            }
        }
        if !(self.environment.warm_start_noise >= 0.0) {
            return bad("environment.warm_start_noise must be non-negative".into());
        }
        let c = &self.constraints;
        if c.dilatation.is_empty() || c.dilatation.iter().any(|d| !(*d >= 0.0)) {
            return bad("constraints.dilatation values must be non-negative".into());
        }
        if c.max_velocity.is_empty() || c.max_velocity.iter().any(|v| !(*v > 0.0)) {
            return bad("constraints.max_velocity values must be positive".into());
        }
        match (c.penalty, c.penalty_value) {
            (PenaltyKind::Death, Some(_)) => return bad("constraints.penalty_value has no meaning for the death penalty".into()),
            (PenaltyKind::Static | PenaltyKind::Additive, Some(p)) if !(p >= 0.0) => {
                return bad("constraints.penalty_value must be non-negative".into());
            }
            (PenaltyKind::Multiplicative, Some(p)) if !(p >= 1.0) => {
                return bad("constraints.penalty_value must be at least 1 for the multiplicative penalty".into());
            }
            _ => {}
        }
        self.optimizer_config(self.seed).validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.methods().contains(&OptimizerKind::Sst) && self.optimizer_config(0).population_size < 3 {
            return bad("sst needs a population of at least 3".into());
        }
        Ok(())
    }
}
