//! Incrementally evolved trajectories: one optimizer run per intermediate
//! goal, each candidate scored by replaying the already chosen prefix and
//! comparing the resulting features with the goal column.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{apply_penalty, ConstraintSet, PenaltyStrategy};
use crate::evolvers::{run_optimizer, EvalBudget, EvolverError, OptimizerConfig, OptimizerKind, SearchBox};
use crate::recognition::{discrepancy, RecognitionError};
use crate::scalar::{serde_float, Scalar};
use crate::simenv::{forward_kinematics, EnvState, FeatureKind, JointVector, SimError};
use crate::trajectory::GeneralizedAction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IetError {
    #[error("action has {action} features, environment observes {env}")]
    FeatureMismatch { action: usize, env: usize },
    #[error("action has no goals")]
    NoGoals,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Evolver(#[from] EvolverError),
    #[error(transparent)]
    Recognition(#[from] RecognitionError),
}

/// Initial population for each goal: the previous choice (the home pose for
/// the first goal), then Gaussian perturbations of it filling half the
/// population. The optimizer fills the rest uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmStart<T> {
    pub enabled: bool,
    /// Per-joint standard deviation, degrees.
    pub noise: T,
}

impl<T: Scalar> Default for WarmStart<T> {
    fn default() -> Self {
        Self { enabled: true, noise: T::lit(10.0) }
    }
}

#[derive(Debug, Clone)]
pub struct ExecutionPlan<T> {
    pub action: GeneralizedAction<T>,
    /// Template state; every replay starts from a clone of it.
    pub env: EnvState<T>,
    pub kind: OptimizerKind,
    pub config: OptimizerConfig<T>,
    /// `None` runs without any feasibility checks at all.
    pub constraints: Option<ConstraintSet<T>>,
    pub warm_start: WarmStart<T>,
}

impl<T: Scalar> ExecutionPlan<T> {
    pub fn validate(&self) -> Result<(), IetError> {
        if self.action.goal_count() == 0 {
            return Err(IetError::NoGoals);
        }
        let (action, env) = (self.action.trajectory().m(), self.env.feature_dimension());
        if action != env {
            return Err(IetError::FeatureMismatch { action, env });
        }
        self.config.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalResult<T: Scalar> {
    pub goal_index: usize,
    #[serde(with = "serde_float::vec")]
    pub joints: Vec<T>,
    #[serde(with = "serde_float")]
    pub discrepancy: T,
    pub true_evaluations: u64,
    pub approximated_assignments: u64,
    pub generations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport<T: Scalar> {
    pub seed: u64,
    pub goals: Vec<GoalResult<T>>,
    /// Running total of true evaluations after each goal.
    pub cumulative_evaluations: Vec<u64>,
    /// Discrepancy of one fresh replay of the whole trajectory against the
    /// generalized action; infinite when the run is invalid.
    #[serde(with = "serde_float")]
    pub total_discrepancy: T,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_float")]
    pub painted_percent: Option<T>,
    /// The final trajectory violates a death-penalty constraint.
    pub invalid: bool,
}

impl<T: Scalar> RunReport<T> {
    pub fn true_evaluations(&self) -> u64 {
        self.cumulative_evaluations.last().copied().unwrap_or(0)
    }
}

mod opt_float {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::{serde_float, Scalar};

    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(bound = "")]
    struct Wrap<T: Scalar>(#[serde(with = "serde_float")] T);

    pub fn serialize<T: Scalar, S: Serializer>(value: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&Wrap(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Option<T>, D::Error> {
        Ok(Option::<Wrap<T>>::deserialize(d)?.map(|w| w.0))
    }
}

/// Length-one DTW between two feature columns: the summed absolute
/// differences.
fn column_discrepancy<T: Scalar>(observed: &[T], goal: &[T]) -> T {
    observed.iter().zip(goal).fold(T::zero(), |acc, (&o, &x)| acc + (o - x).abs())
}

fn penalized<T: Scalar>(
    env: &EnvState<T>,
    constraints: Option<&ConstraintSet<T>>,
    prev: Option<&[T]>,
    candidate: &[T],
    raw: T,
) -> T {
    let Some(set) = constraints else { return raw };
    let feasible = match forward_kinematics(env.chain(), &JointVector(candidate.to_vec())) {
        Ok(tool) => set.is_feasible(&tool, prev, candidate),
        Err(_) => false,
    };
    apply_penalty(&set.penalty, raw, feasible)
}

/// Fitness of `candidate` as goal `goal`: replay `prefix` on a clone of
/// `env_template`, apply the candidate, compare with the goal column, then
/// penalize. Anything the simulator rejects scores `+inf`.
pub fn goal_fitness<T: Scalar>(
    env_template: &EnvState<T>,
    prefix: &[JointVector<T>],
    candidate: &JointVector<T>,
    goal: &[T],
    constraints: Option<&ConstraintSet<T>>,
) -> T {
    let mut env = env_template.clone();
    if env.mental_execution(prefix).is_err() {
        return T::infinity();
    }
    let Ok(observed) = env.step(candidate) else { return T::infinity() };
    let raw = column_discrepancy(&observed, goal);
    let prev = prefix.last().map(JointVector::as_slice);
    penalized(&env, constraints, prev, candidate.as_slice(), raw)
}

/// [`goal_fitness`] with the prefix replayed once up front. Yields the same
/// values bit for bit.
#[derive(Debug, Clone)]
pub struct GoalContext<'a, T> {
    snapshot: EnvState<T>,
    prev: Option<Vec<T>>,
    goal: &'a [T],
    constraints: Option<&'a ConstraintSet<T>>,
}

impl<'a, T: Scalar> GoalContext<'a, T> {
    pub fn new(
        env_template: &EnvState<T>,
        prefix: &[JointVector<T>],
        goal: &'a [T],
        constraints: Option<&'a ConstraintSet<T>>,
    ) -> Result<Self, SimError> {
        let mut snapshot = env_template.clone();
        snapshot.mental_execution(prefix)?;
        let prev = prefix.last().map(|q| q.0.clone());
        Ok(Self { snapshot, prev, goal, constraints })
    }

    pub fn fitness(&self, candidate: &[T]) -> T {
        let mut env = self.snapshot.clone();
        let Ok(observed) = env.step(&JointVector(candidate.to_vec())) else { return T::infinity() };
        let raw = column_discrepancy(&observed, self.goal);
        penalized(&env, self.constraints, self.prev.as_deref(), candidate, raw)
    }
}

/// Whether a full trajectory satisfies every constraint at every step.
pub fn trajectory_feasible<T: Scalar>(env: &EnvState<T>, constraints: &ConstraintSet<T>, trajectory: &[JointVector<T>]) -> bool {
    let mut prev: Option<&[T]> = None;
    for q in trajectory {
        let Ok(tool) = forward_kinematics(env.chain(), q) else { return false };
        if !constraints.is_feasible(&tool, prev, q.as_slice()) {
            return false;
        }
        prev = Some(q.as_slice());
    }
    true
}

fn warm_seeds<T: Scalar>(previous: &[T], size: usize, warm: &WarmStart<T>, bounds: &SearchBox<T>, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    if !warm.enabled || size == 0 {
        return Vec::new();
    }
    let noise = Normal::new(0.0, warm.noise.as_f64()).expect("warm-start noise is finite and non-negative");
    let mut seeds = vec![previous.to_vec()];
    while seeds.len() < size / 2 {
        let mut g: Vec<T> = previous.iter().map(|&v| v + T::lit(noise.sample(rng))).collect();
        bounds.clamp(&mut g);
        seeds.push(g);
    }
    seeds
}

/// Runs the executor and returns the joint trajectory with its report.
pub fn iet_execute<T: Scalar>(plan: &ExecutionPlan<T>) -> Result<(Vec<JointVector<T>>, RunReport<T>), IetError> {
    plan.validate()?;
    let chain = plan.env.chain();
    let bounds = SearchBox::new(chain.lower_bounds(), chain.upper_bounds())?;
    let goals = plan.action.trajectory();
    let constraints = plan.constraints.as_ref();
    let mut master = ChaCha8Rng::seed_from_u64(plan.config.rng_seed);

    let mut trajectory: Vec<JointVector<T>> = Vec::with_capacity(goals.n());
    let mut results = Vec::with_capacity(goals.n());
    let mut budget = EvalBudget::default();
    let mut cumulative = Vec::with_capacity(goals.n());

    for j in 0..goals.n() {
        let goal_seed: u64 = master.random();
        let mut seed_rng = ChaCha8Rng::seed_from_u64(master.random());
        let previous = trajectory.last().unwrap_or(plan.env.home()).0.clone();
        let seeds = warm_seeds(&previous, plan.config.population_size, &plan.warm_start, &bounds, &mut seed_rng);

        let ctx = GoalContext::new(&plan.env, &trajectory, goals.column(j), constraints)?;
        let config = OptimizerConfig { rng_seed: goal_seed, ..plan.config.clone() };
        let fitness = |g: &[T]| ctx.fitness(g);
        let outcome = run_optimizer(plan.kind, &fitness, &bounds, &config, &seeds)?;

        budget.absorb_goal(&outcome.budget);
        cumulative.push(budget.true_evaluations);
        results.push(GoalResult {
            goal_index: j,
            joints: outcome.best_genome.clone(),
            discrepancy: outcome.best_fitness,
            true_evaluations: outcome.budget.true_evaluations,
            approximated_assignments: outcome.budget.approximated_assignments,
            generations: outcome.generations,
        });
        trajectory.push(JointVector(outcome.best_genome));
    }

    let mut env = plan.env.clone();
    let observed = env.mental_execution(&trajectory)?;
    let invalid = constraints
        .is_some_and(|set| set.penalty == PenaltyStrategy::Death && !trajectory_feasible(&plan.env, set, &trajectory));
    let total_discrepancy = if invalid { T::infinity() } else { discrepancy(&observed, goals)? };
    let painted_percent = match env.feature_kind() {
        FeatureKind::Paint => Some(env.paint_features()?),
        FeatureKind::Wax => None,
    };

    let report = RunReport {
        seed: plan.config.rng_seed,
        goals: results,
        cumulative_evaluations: cumulative,
        total_discrepancy,
        painted_percent,
        invalid,
    };
    Ok((trajectory, report))
}
