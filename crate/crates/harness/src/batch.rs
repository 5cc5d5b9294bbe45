//! Expands a config into sweep cells and runs seeded repetitions of each.

use cgda_core::constraints::{build_box, BoundingBox, ConstraintSet, VelocityLimit};
use cgda_core::iet::{iet_execute, ExecutionPlan, RunReport, WarmStart};
use cgda_core::simenv::{EnvState, FeatureKind, JointLimits, JointVector, KinematicChain, Link, Pose, WallGrid};
use cgda_core::trajectory::{generalize, Demonstration, GeneralizedAction};
use cgda_core::OptimizerKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ActionConfig, ExperimentConfig};
use crate::demos::{generate_paint_goal, generate_wax_demos};
use crate::report::{AggregateReport, ConfigurationReport};
use crate::HarnessError;

/// One point of the method x dilatation x velocity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: OptimizerKind,
    pub dilatation: f64,
    pub max_velocity: f64,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}/d={}/v={}", self.method, crate::report::fmt_float(self.dilatation), crate::report::fmt_float(self.max_velocity))
    }
}

pub fn expand_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for method in cfg.methods() {
        for &dilatation in &cfg.constraints.dilatation {
            for &max_velocity in &cfg.constraints.max_velocity {
                cells.push(Cell { method, dilatation, max_velocity });
            }
        }
    }
    cells
}

/// Generalized action for the config. Wax demonstrations are drawn from a
/// generator seeded with the base seed, so every run of a batch shares them.
pub fn build_action(cfg: &ExperimentConfig) -> Result<GeneralizedAction<f64>, HarnessError> {
    let action = match &cfg.action {
        ActionConfig::Wax(w) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            generalize(&generate_wax_demos(w, &mut rng), cfg.t_min)?
        }
        ActionConfig::Paint(p) => generate_paint_goal(cfg.t_min, p.duration, p.ramp_exponent)?,
        ActionConfig::Custom { files } => {
            let demos = files.iter().map(Demonstration::load_csv).collect::<Result<Vec<_>, _>>()?;
            generalize(&demos, cfg.t_min)?
        }
    };
    Ok(action)
}

pub fn build_env(cfg: &ExperimentConfig) -> Result<EnvState<f64>, HarnessError> {
    let e = &cfg.environment;
    let mut chain = match &e.chain {
        None => KinematicChain::default_arm(),
        Some(links) => KinematicChain::new(
            links.iter().map(|l| Link { length: l.length, axis: l.axis }).collect(),
            links.iter().map(|l| JointLimits { min: l.min, max: l.max }).collect(),
            Pose::identity(),
        )
        .map_err(|err| HarnessError::Config(err.to_string()))?,
    };
    if let Some(offset) = e.tool_offset {
        chain = chain.with_tool_offset(offset);
    }
    let home = JointVector(e.home.clone().unwrap_or_else(|| vec![0.0; chain.dof()]));
    let env = if cfg.is_paint() {
        let wall = WallGrid::new(e.wall.spec()).map_err(|err| HarnessError::Config(err.to_string()))?;
        EnvState::new(chain, home, Some(wall), FeatureKind::Paint)
    } else {
        EnvState::new(chain, home, None, FeatureKind::Wax)
    };
    // A bad home pose is a configuration problem.
    let env = env.map_err(|err| HarnessError::Config(err.to_string()))?;
    Ok(env)
}

/// Feasibility rules for one cell, or `None` when constraints are disabled.
///
/// The box surrounds the wall for paint and the goal positions otherwise; it
/// is always checked against the tool position.
pub fn build_constraints(
    cfg: &ExperimentConfig,
    action: &GeneralizedAction<f64>,
    env: &EnvState<f64>,
    cell: &Cell,
) -> Result<Option<ConstraintSet<f64>>, HarnessError> {
    if !cfg.constraints.enabled {
        return Ok(None);
    }
    let bounding_box = if cell.dilatation.is_infinite() {
        BoundingBox::Unbounded
    } else {
        let points: Vec<Vec<f64>> = match env.wall() {
            Some(wall) => wall.corners().iter().map(|c| c.to_vec()).collect(),
            None => {
                if action.trajectory().m() != 3 {
                    return Err(HarnessError::Config("a finite dilatation needs 3-D position goals".into()));
                }
                action.trajectory().columns().map(<[f64]>::to_vec).collect()
            }
        };
        build_box(&points, cell.dilatation)?
    };
    let velocity = if cell.max_velocity.is_infinite() {
        VelocityLimit::unlimited()
    } else {
        VelocityLimit::with_norm(cell.max_velocity, cfg.velocity_norm())?
    };
    Ok(Some(ConstraintSet { bounding_box, velocity, penalty: cfg.penalty() }))
}

/// Everything shared by the runs of one batch.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub action: GeneralizedAction<f64>,
    pub env: EnvState<f64>,
    pub cells: Vec<Cell>,
    pub constraints: Vec<Option<ConstraintSet<f64>>>,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    cfg.validate()?;
    let action = build_action(cfg)?;
    let env = build_env(cfg)?;
    let cells = expand_cells(cfg);
    let constraints = cells.iter().map(|c| build_constraints(cfg, &action, &env, c)).collect::<Result<Vec<_>, _>>()?;
    Ok(Prepared { action, env, cells, constraints })
}

pub fn plan_for(cfg: &ExperimentConfig, prepared: &Prepared, cell_index: usize, seed: u64) -> ExecutionPlan<f64> {
    ExecutionPlan {
        action: prepared.action.clone(),
        env: prepared.env.clone(),
        kind: prepared.cells[cell_index].method,
        config: cfg.optimizer_config(seed),
        constraints: prepared.constraints[cell_index].clone(),
        warm_start: WarmStart { enabled: cfg.environment.warm_start, noise: cfg.environment.warm_start_noise },
    }
}

/// Re-runs a single seed of one cell.
pub fn run_single(cfg: &ExperimentConfig, prepared: &Prepared, cell_index: usize, seed: u64) -> Result<RunReport<f64>, HarnessError> {
    let (_, report) = iet_execute(&plan_for(cfg, prepared, cell_index, seed))?;
    Ok(report)
}

/// Runs `repetitions` seeds (`seed + index`) of every cell. `jobs` bounds the
/// worker threads; `None` uses the global rayon pool. Results do not depend
/// on the thread count.
pub fn run_batch(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<AggregateReport, HarnessError> {
    let prepared = prepare(cfg)?;
    let tasks: Vec<(usize, u64)> = (0..prepared.cells.len())
        .flat_map(|c| (0..cfg.repetitions as u64).map(move |i| (c, cfg.seed.wrapping_add(i))))
        .collect();
    let run_all = || tasks.par_iter().map(|&(c, seed)| run_single(cfg, &prepared, c, seed)).collect::<Result<Vec<_>, _>>();
    let mut reports = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Runtime(e.to_string()))?
            .install(run_all)?,
        None => run_all()?,
    }
    .into_iter();

    let configurations = prepared
        .cells
        .iter()
        .map(|cell| {
            let runs: Vec<RunReport<f64>> = reports.by_ref().take(cfg.repetitions).collect();
            ConfigurationReport::aggregate(cell, runs)
        })
        .collect();
    Ok(AggregateReport { seed: cfg.seed, repetitions: cfg.repetitions, goal_count: prepared.action.goal_count(), configurations })
}
