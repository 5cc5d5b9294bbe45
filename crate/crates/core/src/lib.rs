//! Continuous goal-directed actions: feature-space action encoding, DTW
//! recognition, a simulated arm, evaluation-frugal optimizers, feasibility
//! constraints and the incremental trajectory executor.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

mod linalg;

pub mod constraints;
pub mod evolvers;
pub mod iet;
pub mod recognition;
pub mod scalar;
pub mod simenv;
pub mod trajectory;

pub use constraints::{apply_penalty, build_box, feasible_position, feasible_velocity, BoundingBox, ConstraintError, ConstraintSet, PenaltyStrategy, VelocityLimit, VelocityNorm};
pub use evolvers::{
    affg_pso_step, fi_pso_step, pso_step, run_optimizer, sst_generation, sst_step, EvalBudget, EvolverError, FitnessFn, OptimizerConfig, OptimizerKind,
    OptimizerOutcome, Provenance, SearchBox, Termination,
};
pub use iet::{goal_fitness, iet_execute, ExecutionPlan, GoalResult, IetError, RunReport, WarmStart};
pub use recognition::{cost_matrix, discrepancy, optimal_path_cost, CostMatrix, RecognitionError, WarpPath};
pub use scalar::Scalar;
pub use simenv::{forward_kinematics, EnvState, FeatureKind, JointVector, KinematicChain, SimError, WallGrid, WallSpec};
pub use trajectory::{compute_goal_count, fit_rbf, generalize, resample, sample_action, Demonstration, FeatureTrajectory, GeneralizedAction, Kernel, RbfInterpolant, TrajectoryError};

pub type DemonstrationF64 = Demonstration<f64>;
pub type FeatureTrajectoryF64 = FeatureTrajectory<f64>;
pub type GeneralizedActionF64 = GeneralizedAction<f64>;
pub type EnvStateF64 = EnvState<f64>;
pub type OptimizerConfigF64 = OptimizerConfig<f64>;
pub type ConstraintSetF64 = ConstraintSet<f64>;
pub type ExecutionPlanF64 = ExecutionPlan<f64>;
pub type RunReportF64 = RunReport<f64>;

pub type DemonstrationF32 = Demonstration<f32>;
pub type FeatureTrajectoryF32 = FeatureTrajectory<f32>;
pub type GeneralizedActionF32 = GeneralizedAction<f32>;
pub type EnvStateF32 = EnvState<f32>;
pub type ExecutionPlanF32 = ExecutionPlan<f32>;
