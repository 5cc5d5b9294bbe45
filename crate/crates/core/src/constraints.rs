//! Feasibility predicates and penalty strategies.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("a finite dilatation needs at least one solution point")]
    EmptyPointSet,
    #[error("points disagree on dimension: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dilatation must be non-negative")]
    NegativeDilatation,
    #[error("velocity limit must be positive")]
    NonPositiveVelocity,
}

/// Axis-aligned feasible region, or the whole space.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundingBox<T> {
    Unbounded,
    Bounded { min: Vec<T>, max: Vec<T> },
}

impl<T: Scalar> BoundingBox<T> {
    pub fn is_bounded(&self) -> bool {
        matches!(self, BoundingBox::Bounded { .. })
    }

    pub fn contains(&self, p: &[T]) -> bool {
        feasible_position(self, p)
    }
}

/// Minimum bounding box of `points` grown by `dilatation` on every axis. An
/// infinite dilatation gives the unbounded box.
pub fn build_box<T: Scalar, P: AsRef<[T]>>(points: &[P], dilatation: T) -> Result<BoundingBox<T>, ConstraintError> {
    if dilatation.is_infinite() && dilatation > T::zero() {
        return Ok(BoundingBox::Unbounded);
    }
    if !(dilatation >= T::zero()) {
        return Err(ConstraintError::NegativeDilatation);
    }
    let first = points.first().ok_or(ConstraintError::EmptyPointSet)?.as_ref();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for p in &points[1..] {
        let p = p.as_ref();
        if p.len() != min.len() {
            return Err(ConstraintError::DimensionMismatch { expected: min.len(), found: p.len() });
        }
        for (k, &v) in p.iter().enumerate() {
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
        }
    }
    min.iter_mut().for_each(|v| *v -= dilatation);
    max.iter_mut().for_each(|v| *v += dilatation);
    Ok(BoundingBox::Bounded { min, max })
}

/// Inclusive containment test. A point of the wrong dimension is infeasible.
pub fn feasible_position<T: Scalar>(bbox: &BoundingBox<T>, p: &[T]) -> bool {
    match bbox {
        BoundingBox::Unbounded => true,
        BoundingBox::Bounded { min, max } => {
            p.len() == min.len() && p.iter().zip(min.iter().zip(max)).all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
        }
    }
}

/// How a joint-space displacement is measured against the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityNorm {
    /// Largest absolute per-joint change.
    #[default]
    MaxAbs,
    /// Euclidean length of the change vector.
    L2,
}

/// Cap on joint displacement per iteration, degrees. May be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityLimit<T> {
    max_step: T,
    norm: VelocityNorm,
}

impl<T: Scalar> VelocityLimit<T> {
    pub fn new(max_step: T) -> Result<Self, ConstraintError> {
        Self::with_norm(max_step, VelocityNorm::MaxAbs)
    }

    pub fn with_norm(max_step: T, norm: VelocityNorm) -> Result<Self, ConstraintError> {
        if !(max_step > T::zero()) {
            return Err(ConstraintError::NonPositiveVelocity);
        }
        Ok(Self { max_step, norm })
    }

    pub fn unlimited() -> Self {
        Self { max_step: T::infinity(), norm: VelocityNorm::MaxAbs }
    }

    pub fn max_step(&self) -> T {
        self.max_step
    }

    pub fn norm(&self) -> VelocityNorm {
        self.norm
    }

    pub fn is_unlimited(&self) -> bool {
        self.max_step.is_infinite()
    }
}

pub fn feasible_velocity<T: Scalar>(limit: &VelocityLimit<T>, q_prev: &[T], q_new: &[T]) -> Result<bool, ConstraintError> {
    if q_prev.len() != q_new.len() {
        return Err(ConstraintError::DimensionMismatch { expected: q_prev.len(), found: q_new.len() });
    }
    if limit.is_unlimited() {
        return Ok(true);
    }
    let deltas = q_prev.iter().zip(q_new).map(|(&a, &b)| (b - a).abs());
    let step = match limit.norm {
        VelocityNorm::MaxAbs => deltas.fold(T::zero(), T::max),
        VelocityNorm::L2 => deltas.fold(T::zero(), |acc, d| acc + d * d).sqrt(),
    };
    Ok(step <= limit.max_step)
}

/// What happens to the fitness (to be minimized) of an infeasible candidate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PenaltyStrategy<T> {
    /// Infeasible candidates get `+inf`.
    #[default]
    Death,
    /// Fixed finite addend.
    Static(T),
    /// `f(x) + p`.
    Additive(T),
    /// `f(x) * p`.
    Multiplicative(T),
}

pub fn apply_penalty<T: Scalar>(strategy: &PenaltyStrategy<T>, raw_fitness: T, feasible: bool) -> T {
    if feasible {
        return raw_fitness;
    }
    match *strategy {
        PenaltyStrategy::Death => T::infinity(),
        PenaltyStrategy::Static(p) | PenaltyStrategy::Additive(p) => raw_fitness + p,
        PenaltyStrategy::Multiplicative(p) => raw_fitness * p,
    }
}

/// Everything that decides feasibility of a candidate joint vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet<T> {
    pub bounding_box: BoundingBox<T>,
    pub velocity: VelocityLimit<T>,
    pub penalty: PenaltyStrategy<T>,
}

impl<T: Scalar> ConstraintSet<T> {
    pub fn unconstrained() -> Self {
        Self { bounding_box: BoundingBox::Unbounded, velocity: VelocityLimit::unlimited(), penalty: PenaltyStrategy::Death }
    }

    /// Tool position inside the box and, when a previous pose exists, the
    /// joint step within the velocity limit.
    pub fn is_feasible(&self, tool_position: &[T], q_prev: Option<&[T]>, q_new: &[T]) -> bool {
        feasible_position(&self.bounding_box, tool_position)
            && q_prev.is_none_or(|prev| feasible_velocity(&self.velocity, prev, q_new).unwrap_or(false))
    }
}
