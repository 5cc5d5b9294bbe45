//! Optimizer backends over box-bounded joint vectors, all minimizing.
//!
//! Every fitness assignment is counted: a *true* evaluation runs the fitness
//! function, an *approximated* assignment (fitness inheritance or granule
//! reuse) does not. Only truly evaluated fitness values ever become a
//! personal, swarm or run best.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolverError {
    #[error("population of {size} is too small, need at least {required}")]
    PopulationTooSmall { size: usize, required: usize },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid search box: {0}")]
    InvalidBounds(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "sst")]
    Sst,
    #[serde(rename = "pso")]
    Pso,
    #[serde(rename = "fi-pso")]
    FiPso,
    #[serde(rename = "affg-pso")]
    AffgPso,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 4] = [OptimizerKind::Sst, OptimizerKind::Pso, OptimizerKind::FiPso, OptimizerKind::AffgPso];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sst => "sst",
            OptimizerKind::Pso => "pso",
            OptimizerKind::FiPso => "fi-pso",
            OptimizerKind::AffgPso => "affg-pso",
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = EvolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| EvolverError::InvalidConfig(format!("unknown optimizer `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination<T> {
    /// Consecutive iterations without improvement before stopping.
    pub stall_generations: usize,
    /// Improvement must exceed this; a best at or below it stops the run.
    pub zero_error_epsilon: T,
    /// Hard cap on iterations.
    pub max_generations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub population_size: usize,
    /// Per-gene mutation probability (SST).
    pub mutation_probability: T,
    pub inertia: T,
    pub cognitive: T,
    pub social: T,
    /// Velocity clamp, degrees per iteration.
    pub v_max: T,
    /// Fraction of the swarm that inherits fitness each step (FI-PSO).
    pub inheritance_proportion: T,
    pub max_granules: usize,
    /// Granule Gaussian width, degrees.
    pub granule_width: T,
    /// Minimum membership for a particle to reuse a granule's fitness.
    pub granule_threshold: T,
    pub termination: Termination<T>,
    pub rng_seed: u64,
    /// Evaluate independent candidates on the rayon pool. Results are
    /// identical either way.
    pub parallel: bool,
}

impl<T: Scalar> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            population_size: 50,
            mutation_probability: T::lit(0.60),
            inertia: T::lit(1.2),
            cognitive: T::lit(2.0),
            social: T::lit(2.0),
            v_max: T::lit(5.0),
            inheritance_proportion: T::lit(0.55),
            max_granules: 3,
            granule_width: T::lit(10.0),
            granule_threshold: T::lit(0.6),
            termination: Termination { stall_generations: 3, zero_error_epsilon: T::lit(1e-9), max_generations: 10_000 },
            rng_seed: 0,
            parallel: false,
        }
    }
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<(), EvolverError> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        let bad = |msg: &str| Err(EvolverError::InvalidConfig(msg.into()));
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if !unit(self.mutation_probability) {
            return bad("mutation_probability must lie in [0, 1]");
        }
        if !unit(self.inheritance_proportion) {
            return bad("inheritance_proportion must lie in [0, 1]");
        }
        if !(self.v_max > T::zero()) {
            return bad("v_max must be positive");
        }
        if !(self.inertia.is_finite() && self.cognitive.is_finite() && self.social.is_finite()) {
            return bad("inertia and acceleration coefficients must be finite");
        }
        if !(self.granule_width > T::zero() && self.granule_width.is_finite()) {
            return bad("granule_width must be positive and finite");
        }
        if !unit(self.granule_threshold) {
            return bad("granule_threshold must lie in [0, 1]");
        }
        if self.termination.stall_generations == 0 {
            return bad("stall_generations must be positive");
        }
        if !(self.termination.zero_error_epsilon >= T::zero()) {
            return bad("zero_error_epsilon must be non-negative");
        }
        Ok(())
    }

    /// Number of particles that inherit fitness each FI-PSO step:
    /// `floor(p * N)`. A relative slack absorbs products such as
    /// `0.29 * 100 = 28.999...`.
    pub fn inherited_count(&self) -> usize {
        let exact = self.inheritance_proportion.as_f64() * self.population_size as f64;
        let k = (exact * (1.0 + 1e-12)).floor() as usize;
        k.min(self.population_size)
    }
}

/// Per-joint search interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> SearchBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self, EvolverError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(EvolverError::InvalidBounds("bounds must be non-empty and of equal length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(EvolverError::InvalidBounds("every lower bound must be finite and below its upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn clamp(&self, x: &mut [T]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(lo).min(hi);
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((&v, &lo), &hi)| lo <= v && v <= hi)
    }

    fn sample_gene<R: Rng>(&self, k: usize, rng: &mut R) -> T {
        let u = T::lit(rng.random::<f64>());
        let v = self.lower[k] + (self.upper[k] - self.lower[k]) * u;
        v.min(self.upper[k])
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<T> {
        (0..self.dim()).map(|k| self.sample_gene(k, rng)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Evaluated,
    Inherited,
    Granulated,
    Unevaluated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub genome: Vec<T>,
    pub fitness: T,
    pub provenance: Provenance,
    /// Degrees per iteration (PSO variants).
    pub velocity: Vec<T>,
    /// Best truly evaluated position of this particle (PSO variants).
    pub personal_best: Option<(Vec<T>, T)>,
}

impl<T: Scalar> Individual<T> {
    pub fn unevaluated(genome: Vec<T>) -> Self {
        let d = genome.len();
        Self { genome, fitness: T::infinity(), provenance: Provenance::Unevaluated, velocity: vec![T::zero(); d], personal_best: None }
    }

    fn set_evaluated(&mut self, fitness: T) {
        self.fitness = fitness;
        self.provenance = Provenance::Evaluated;
        let better = self.personal_best.as_ref().is_none_or(|(_, f)| fitness < *f);
        if better {
            self.personal_best = Some((self.genome.clone(), fitness));
        }
    }
}

/// True-evaluation / approximated-assignment counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalBudget {
    pub true_evaluations: u64,
    pub approximated_assignments: u64,
    /// One entry per intermediate goal when driven by the executor.
    pub per_goal: Vec<GoalBudget>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalBudget {
    pub true_evaluations: u64,
    pub approximated_assignments: u64,
}

impl EvalBudget {
    pub fn total_assignments(&self) -> u64 {
        self.true_evaluations + self.approximated_assignments
    }

    pub fn record_true(&mut self, count: u64) {
        self.true_evaluations += count;
        if let Some(g) = self.per_goal.last_mut() {
            g.true_evaluations += count;
        }
    }

    pub fn record_approximated(&mut self, count: u64) {
        self.approximated_assignments += count;
        if let Some(g) = self.per_goal.last_mut() {
            g.approximated_assignments += count;
        }
    }

    /// Opens a new per-goal counter.
    pub fn begin_goal(&mut self) {
        self.per_goal.push(GoalBudget::default());
    }

    /// Adds another budget's totals as one new goal.
    pub fn absorb_goal(&mut self, other: &EvalBudget) {
        self.begin_goal();
        self.record_true(other.true_evaluations);
        self.record_approximated(other.approximated_assignments);
    }
}

/// Objective to minimize. Implemented for every `Fn(&[T]) -> T + Sync`.
pub trait FitnessFn<T>: Sync {
    fn evaluate(&self, genome: &[T]) -> T;
}

impl<T, F> FitnessFn<T> for F
where
    F: Fn(&[T]) -> T + Sync,
{
    fn evaluate(&self, genome: &[T]) -> T {
        self(genome)
    }
}

#[inline]
fn sanitize<T: Scalar>(f: T) -> T {
    if f.is_nan() {
        T::infinity()
    } else {
        f
    }
}

fn evaluate_batch<T: Scalar, F: FitnessFn<T> + ?Sized>(fitness: &F, genomes: &[&[T]], parallel: bool) -> Vec<T> {
    if parallel && genomes.len() > 1 {
        genomes.par_iter().map(|g| sanitize(fitness.evaluate(g))).collect()
    } else {
        genomes.iter().map(|g| sanitize(fitness.evaluate(g))).collect()
    }
}

/// Best truly evaluated genome seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Elite<T> {
    pub genome: Vec<T>,
    pub fitness: T,
}

fn offer<T: Scalar>(elite: &mut Option<Elite<T>>, genome: &[T], fitness: T) {
    if elite.as_ref().is_none_or(|e| fitness < e.fitness) {
        *elite = Some(Elite { genome: genome.to_vec(), fitness });
    }
}

fn initial_genomes<T: Scalar, R: Rng>(bounds: &SearchBox<T>, size: usize, seeds: &[Vec<T>], rng: &mut R) -> Result<Vec<Vec<T>>, EvolverError> {
    let mut out = Vec::with_capacity(size);
    for s in seeds.iter().take(size) {
        if s.len() != bounds.dim() {
            return Err(EvolverError::InvalidBounds(format!("seed genome has {} genes, search box has {}", s.len(), bounds.dim())));
        }
        let mut g = s.clone();
        bounds.clamp(&mut g);
        out.push(g);
    }
    while out.len() < size {
        out.push(bounds.sample(rng));
    }
    Ok(out)
}

/// Steady-state tournament population.
#[derive(Debug, Clone)]
pub struct Population<T> {
    individuals: Vec<Individual<T>>,
    bounds: SearchBox<T>,
    rng: ChaCha8Rng,
    elite: Option<Elite<T>>,
}

impl<T: Scalar> Population<T> {
    /// Seeds from `seeds` (clamped) then uniform samples, evaluating all.
    pub fn initialize<F: FitnessFn<T> + ?Sized>(
        bounds: SearchBox<T>,
        config: &OptimizerConfig<T>,
        seeds: &[Vec<T>],
        fitness: &F,
        budget: &mut EvalBudget,
    ) -> Result<Self, EvolverError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let genomes = initial_genomes(&bounds, config.population_size, seeds, &mut rng)?;
        let refs: Vec<&[T]> = genomes.iter().map(Vec::as_slice).collect();
        let values = evaluate_batch(fitness, &refs, config.parallel);
        budget.record_true(values.len() as u64);
        let mut elite = None;
        let individuals = genomes
            .into_iter()
            .zip(values)
            .map(|(g, f)| {
                offer(&mut elite, &g, f);
                let mut ind = Individual::unevaluated(g);
                ind.set_evaluated(f);
                ind
            })
            .collect();
        Ok(Self { individuals, bounds, rng, elite })
    }

    pub fn individuals(&self) -> &[Individual<T>] {
        &self.individuals
    }

    pub fn elite(&self) -> Option<&Elite<T>> {
        self.elite.as_ref()
    }

    pub fn best_fitness(&self) -> T {
        self.elite.as_ref().map_or(T::infinity(), |e| e.fitness)
    }
}

/// One tournament: draw three distinct individuals, replace the worst by the
/// mutated uniform crossover of the other two, evaluate the child.
pub fn sst_step<T: Scalar, F: FitnessFn<T> + ?Sized>(
    pop: &mut Population<T>,
    fitness: &F,
    config: &OptimizerConfig<T>,
    budget: &mut EvalBudget,
) -> Result<(), EvolverError> {
    let n = pop.individuals.len();
    if n < 3 {
        return Err(EvolverError::PopulationTooSmall { size: n, required: 3 });
    }
    let picks = index::sample(&mut pop.rng, n, 3).into_vec();
    let worst_pos = (1..3).fold(0, |w, k| if pop.individuals[picks[k]].fitness > pop.individuals[picks[w]].fitness { k } else { w });
    let worst = picks[worst_pos];
    let parents: Vec<usize> = picks.iter().copied().filter(|&i| i != worst).collect();
    let (a, b) = (&pop.individuals[parents[0]].genome, &pop.individuals[parents[1]].genome);

    let p_mut = config.mutation_probability.as_f64();
    let mut child = Vec::with_capacity(a.len());
    for k in 0..a.len() {
        let gene = if pop.rng.random::<bool>() { a[k] } else { b[k] };
        child.push(gene);
    }
    for (k, gene) in child.iter_mut().enumerate() {
        if pop.rng.random::<f64>() < p_mut {
            *gene = pop.bounds.sample_gene(k, &mut pop.rng);
        }
    }

    let f = sanitize(fitness.evaluate(&child));
    budget.record_true(1);
    offer(&mut pop.elite, &child, f);
    let slot = &mut pop.individuals[worst];
    *slot = Individual::unevaluated(child);
    slot.set_evaluated(f);
    Ok(())
}

/// One SST generation: `population_size` tournaments.
pub fn sst_generation<T: Scalar, F: FitnessFn<T> + ?Sized>(
    pop: &mut Population<T>,
    fitness: &F,
    config: &OptimizerConfig<T>,
    budget: &mut EvalBudget,
) -> Result<(), EvolverError> {
    for _ in 0..pop.individuals.len() {
        sst_step(pop, fitness, config, budget)?;
    }
    Ok(())
}

/// Gaussian fitness cache entry for AFFG-PSO.
#[derive(Debug, Clone, PartialEq)]
pub struct Granule<T> {
    pub center: Vec<T>,
    pub fitness: T,
    pub width: T,
    pub last_used: u64,
}

impl<T: Scalar> Granule<T> {
    /// `exp(-|x - c|^2 / (2 width^2))`.
    pub fn membership(&self, x: &[T]) -> T {
        let d2 = self.center.iter().zip(x).fold(T::zero(), |acc, (&c, &v)| acc + (v - c) * (v - c));
        (-d2 / (T::lit(2.0) * self.width * self.width)).exp()
    }
}

/// Particle swarm shared by the PSO, FI-PSO and AFFG-PSO steps.
#[derive(Debug, Clone)]
pub struct Swarm<T> {
    particles: Vec<Individual<T>>,
    bounds: SearchBox<T>,
    rng: ChaCha8Rng,
    global_best: Option<(Vec<T>, T)>,
    granules: Vec<Granule<T>>,
    generation: u64,
    elite: Option<Elite<T>>,
}

impl<T: Scalar> Swarm<T> {
    /// Seeds from `seeds` (clamped) then uniform samples, evaluating all.
    /// Velocities start at zero.
    pub fn initialize<F: FitnessFn<T> + ?Sized>(
        bounds: SearchBox<T>,
        config: &OptimizerConfig<T>,
        seeds: &[Vec<T>],
        fitness: &F,
        budget: &mut EvalBudget,
    ) -> Result<Self, EvolverError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let genomes = initial_genomes(&bounds, config.population_size, seeds, &mut rng)?;
        let refs: Vec<&[T]> = genomes.iter().map(Vec::as_slice).collect();
        let values = evaluate_batch(fitness, &refs, config.parallel);
        budget.record_true(values.len() as u64);
        let particles = genomes
            .into_iter()
            .zip(values)
            .map(|(g, f)| {
                let mut p = Individual::unevaluated(g);
                p.set_evaluated(f);
                p
            })
            .collect();
        Ok(Self::from_particles(particles, bounds, config.rng_seed.wrapping_add(1)))
    }

    /// Builds a swarm from already-evaluated particles. Bests are derived from
    /// the particles' personal bests.
    pub fn from_particles(particles: Vec<Individual<T>>, bounds: SearchBox<T>, seed: u64) -> Self {
        let mut swarm = Self {
            particles,
            bounds,
            rng: ChaCha8Rng::seed_from_u64(seed),
            global_best: None,
            granules: Vec::new(),
            generation: 0,
            elite: None,
        };
        for i in 0..swarm.particles.len() {
            if let Some((g, f)) = swarm.particles[i].personal_best.clone() {
                offer(&mut swarm.elite, &g, f);
                if swarm.global_best.as_ref().is_none_or(|(_, gf)| f < *gf) {
                    swarm.global_best = Some((g, f));
                }
            }
        }
        swarm
    }

    pub fn particles(&self) -> &[Individual<T>] {
        &self.particles
    }

    pub fn particles_mut(&mut self) -> &mut [Individual<T>] {
        &mut self.particles
    }

    pub fn global_best(&self) -> Option<&(Vec<T>, T)> {
        self.global_best.as_ref()
    }

    pub fn granules(&self) -> &[Granule<T>] {
        &self.granules
    }

    /// Installs a granule directly, bypassing the cap.
    pub fn push_granule(&mut self, granule: Granule<T>) {
        self.granules.push(granule);
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn elite(&self) -> Option<&Elite<T>> {
        self.elite.as_ref()
    }

    pub fn best_fitness(&self) -> T {
        self.elite.as_ref().map_or(T::infinity(), |e| e.fitness)
    }

    /// Velocity and position update for every particle. Random coefficients
    /// are drawn for the whole swarm before any particle moves.
    fn fly(&mut self, config: &OptimizerConfig<T>) {
        let d = self.bounds.dim();
        let draws: Vec<f64> = (0..self.particles.len() * d * 2).map(|_| self.rng.random::<f64>()).collect();
        let gbest = self.global_best.as_ref().map(|(g, _)| g.clone());
        for (i, p) in self.particles.iter_mut().enumerate() {
            let pbest = p.personal_best.as_ref().map_or_else(|| p.genome.clone(), |(g, _)| g.clone());
            let gbest = gbest.as_ref().unwrap_or(&pbest);
            for k in 0..d {
                let r1 = T::lit(draws[(i * d + k) * 2]);
                let r2 = T::lit(draws[(i * d + k) * 2 + 1]);
                let x = p.genome[k];
                let v = config.inertia * p.velocity[k] + config.cognitive * r1 * (pbest[k] - x) + config.social * r2 * (gbest[k] - x);
                p.velocity[k] = v.max(-config.v_max).min(config.v_max);
                p.genome[k] = x + p.velocity[k];
            }
            self.bounds.clamp(&mut p.genome);
        }
        self.generation += 1;
    }

    fn evaluate_indices<F: FitnessFn<T> + ?Sized>(&mut self, which: &[usize], fitness: &F, parallel: bool, budget: &mut EvalBudget) {
        let refs: Vec<&[T]> = which.iter().map(|&i| self.particles[i].genome.as_slice()).collect();
        let values = evaluate_batch(fitness, &refs, parallel);
        budget.record_true(values.len() as u64);
        for (&i, f) in which.iter().zip(values) {
            self.record_true(i, f);
        }
    }

    fn record_true(&mut self, i: usize, f: T) {
        let p = &mut self.particles[i];
        p.set_evaluated(f);
        offer(&mut self.elite, &p.genome, f);
        if self.global_best.as_ref().is_none_or(|(_, gf)| f < *gf) {
            self.global_best = Some((p.genome.clone(), f));
        }
    }
}

/// Canonical PSO step: fly, then evaluate every particle.
pub fn pso_step<T: Scalar, F: FitnessFn<T> + ?Sized>(swarm: &mut Swarm<T>, fitness: &F, config: &OptimizerConfig<T>, budget: &mut EvalBudget) {
    swarm.fly(config);
    let all: Vec<usize> = (0..swarm.particles.len()).collect();
    swarm.evaluate_indices(&all, fitness, config.parallel, budget);
}

/// Fitness-inheritance PSO step. After the flight a random `floor(p N)`
/// particles receive
/// `(w f_prev + c1 r1 f_pbest + c2 r2 f_gbest) / (w + c1 r1 + c2 r2)`
/// instead of an evaluation; the rest are evaluated.
pub fn fi_pso_step<T: Scalar, F: FitnessFn<T> + ?Sized>(swarm: &mut Swarm<T>, fitness: &F, config: &OptimizerConfig<T>, budget: &mut EvalBudget) {
    swarm.fly(config);
    let n = swarm.particles.len();
    let k = config.inherited_count().min(n);
    let mut inherit = vec![false; n];
    let mut coeffs = Vec::with_capacity(k);
    if k > 0 {
        let mut chosen = index::sample(&mut swarm.rng, n, k).into_vec();
        chosen.sort_unstable();
        for &i in &chosen {
            inherit[i] = true;
            coeffs.push((i, T::lit(swarm.rng.random::<f64>()), T::lit(swarm.rng.random::<f64>())));
        }
    }

    let gbest_f = swarm.global_best.as_ref().map_or(T::infinity(), |(_, f)| *f);
    for &(i, r1, r2) in &coeffs {
        let p = &mut swarm.particles[i];
        let pbest_f = p.personal_best.as_ref().map_or(p.fitness, |(_, f)| *f);
        p.fitness = inherited_fitness(config, p.fitness, pbest_f, gbest_f, r1, r2);
        p.provenance = Provenance::Inherited;
    }
    budget.record_approximated(k as u64);

    let evaluated: Vec<usize> = (0..n).filter(|&i| !inherit[i]).collect();
    swarm.evaluate_indices(&evaluated, fitness, config.parallel, budget);
}

fn inherited_fitness<T: Scalar>(config: &OptimizerConfig<T>, prev: T, pbest: T, gbest: T, r1: T, r2: T) -> T {
    let terms = [(config.inertia, prev), (config.cognitive * r1, pbest), (config.social * r2, gbest)];
    let (mut num, mut den) = (T::zero(), T::zero());
    for (w, f) in terms {
        // A zero weight must not turn an infinite fitness into NaN.
        if w != T::zero() {
            num += w * f;
            den += w;
        }
    }
    if den == T::zero() {
        prev
    } else {
        sanitize(num / den)
    }
}

/// Adaptive fuzzy fitness granulation step. Particles whose best membership
/// reaches the threshold reuse that granule's fitness; the others are
/// evaluated and become new granules (least recently used evicted past the
/// cap).
pub fn affg_pso_step<T: Scalar, F: FitnessFn<T> + ?Sized>(swarm: &mut Swarm<T>, fitness: &F, config: &OptimizerConfig<T>, budget: &mut EvalBudget) {
    swarm.fly(config);
    let generation = swarm.generation;
    for i in 0..swarm.particles.len() {
        let x = &swarm.particles[i].genome;
        let hit = swarm
            .granules
            .iter()
            .enumerate()
            .map(|(g, gr)| (g, gr.membership(x)))
            .fold(None, |best: Option<(usize, T)>, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
            .filter(|&(_, m)| m >= config.granule_threshold);

        if let Some((g, _)) = hit {
            let granule = &mut swarm.granules[g];
            granule.last_used = generation;
            let p = &mut swarm.particles[i];
            p.fitness = granule.fitness;
            p.provenance = Provenance::Granulated;
            budget.record_approximated(1);
            continue;
        }

        let f = sanitize(fitness.evaluate(x));
        budget.record_true(1);
        swarm.record_true(i, f);
        if config.max_granules == 0 {
            continue;
        }
        while swarm.granules.len() >= config.max_granules {
            let lru = (1..swarm.granules.len()).fold(0, |a, b| if swarm.granules[b].last_used < swarm.granules[a].last_used { b } else { a });
            swarm.granules.remove(lru);
        }
        swarm.granules.push(Granule {
            center: swarm.particles[i].genome.clone(),
            fitness: f,
            width: config.granule_width,
            last_used: generation,
        });
    }
}

/// Result of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOutcome<T> {
    pub best_genome: Vec<T>,
    pub best_fitness: T,
    pub budget: EvalBudget,
    /// Iterations after initialization.
    pub generations: usize,
    /// Best-so-far after initialization and after every iteration.
    pub trace: Vec<T>,
}

/// Runs `kind` until the stall or zero-error rule fires.
///
/// One iteration is an SST generation (`population_size` tournaments) or one
/// swarm step.
pub fn run_optimizer<T: Scalar, F: FitnessFn<T> + ?Sized>(
    kind: OptimizerKind,
    fitness: &F,
    bounds: &SearchBox<T>,
    config: &OptimizerConfig<T>,
    seeds: &[Vec<T>],
) -> Result<OptimizerOutcome<T>, EvolverError> {
    config.validate()?;
    let mut budget = EvalBudget::default();
    match kind {
        OptimizerKind::Sst => {
            if config.population_size < 3 {
                return Err(EvolverError::PopulationTooSmall { size: config.population_size, required: 3 });
            }
            let mut pop = Population::initialize(bounds.clone(), config, seeds, fitness, &mut budget)?;
            let (generations, trace) = iterate(config, &mut pop, Population::best_fitness, &mut budget, |pop, budget| sst_generation(pop, fitness, config, budget))?;
            let elite = pop.elite.expect("initialized population has an elite");
            Ok(OptimizerOutcome { best_genome: elite.genome, best_fitness: elite.fitness, budget, generations, trace })
        }
        _ => {
            let mut swarm = Swarm::initialize(bounds.clone(), config, seeds, fitness, &mut budget)?;
            let (generations, trace) = iterate(config, &mut swarm, Swarm::best_fitness, &mut budget, |swarm, budget| {
                match kind {
                    OptimizerKind::Pso => pso_step(swarm, fitness, config, budget),
                    OptimizerKind::FiPso => fi_pso_step(swarm, fitness, config, budget),
                    OptimizerKind::AffgPso => affg_pso_step(swarm, fitness, config, budget),
                    OptimizerKind::Sst => unreachable!("handled above"),
                }
                Ok(())
            })?;
            let elite = swarm.elite.expect("initialized swarm has an elite");
            Ok(OptimizerOutcome { best_genome: elite.genome, best_fitness: elite.fitness, budget, generations, trace })
        }
    }
}

fn iterate<T: Scalar, S>(
    config: &OptimizerConfig<T>,
    state: &mut S,
    best: fn(&S) -> T,
    budget: &mut EvalBudget,
    mut step: impl FnMut(&mut S, &mut EvalBudget) -> Result<(), EvolverError>,
) -> Result<(usize, Vec<T>), EvolverError> {
    let term = &config.termination;
    let mut current = best(state);
    let mut trace = vec![current];
    let mut stall = 0;
    let mut generations = 0;
    while current > term.zero_error_epsilon && generations < term.max_generations {
        step(state, budget)?;
        generations += 1;
        let next = best(state);
        trace.push(next);
        // inf - inf is NaN, which counts as no improvement.
        if current - next > term.zero_error_epsilon {
            stall = 0;
        } else {
            stall += 1;
        }
        current = next;
        if stall >= term.stall_generations {
            break;
        }
    }
    Ok((generations, trace))
}
