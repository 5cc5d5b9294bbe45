//! DTW discrepancy between an observed and a reference feature trajectory.
//!
//! Each feature dimension is warped independently; the per-dimension optimal
//! path cost is divided by its path length and the results are summed.

use std::ops::{Add, Sub};

use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{abs_diff, Scalar};
use crate::trajectory::FeatureTrajectory;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecognitionError {
    #[error("cannot align an empty sequence")]
    EmptySequence,
    #[error("feature dimension mismatch: observed {observed}, reference {reference}")]
    DimensionMismatch { observed: usize, reference: usize },
}

/// Local costs: rows follow the reference sequence, columns the observed one.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Copy> CostMatrix<T> {
    /// Wraps precomputed row-major local costs.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self, RecognitionError> {
        if rows == 0 || cols == 0 {
            return Err(RecognitionError::EmptySequence);
        }
        assert_eq!(entries.len(), rows * cols, "cost matrix storage does not match shape");
        Ok(Self { rows, cols, entries })
    }

    /// Reference length `n`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Observed length `n'`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self { rows: self.cols, cols: self.rows, entries }
    }
}

/// Monotone, contiguous alignment from `(0, 0)` to `(n - 1, n' - 1)`.
///
/// Indices are zero-based `(reference, observed)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpPath {
    steps: Vec<(usize, usize)>,
}

impl WarpPath {
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_diagonal(&self) -> bool {
        self.steps.iter().all(|&(i, j)| i == j)
    }
}

/// Pairwise `|o_j - x_i|` for two scalar sequences.
pub fn cost_matrix<T>(observed: &[T], reference: &[T]) -> Result<CostMatrix<T>, RecognitionError>
where
    T: Copy + PartialOrd + Sub<Output = T>,
{
    if observed.is_empty() || reference.is_empty() {
        return Err(RecognitionError::EmptySequence);
    }
    let entries = reference
        .iter()
        .flat_map(|&x| observed.iter().map(move |&o| abs_diff(o, x)))
        .collect();
    Ok(CostMatrix { rows: reference.len(), cols: observed.len(), entries })
}

/// Minimum-cost warp path and its total cost (every visited cell counted).
///
/// Among equal-cost predecessors the diagonal step wins, then the step that
/// advances the reference index, then the one that advances the observed
/// index.
pub fn optimal_path_cost<T>(cm: &CostMatrix<T>) -> (WarpPath, T)
where
    T: Copy + PartialOrd + Add<Output = T> + Zero,
{
    let (rows, cols) = (cm.rows, cm.cols);
    let mut acc: Vec<T> = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let local = cm.get(i, j);
            let best_prev = match (i, j) {
                (0, 0) => None,
                (0, _) => Some(acc[j - 1]),
                (_, 0) => Some(acc[(i - 1) * cols]),
                _ => {
                    let diag = acc[(i - 1) * cols + j - 1];
                    let up = acc[(i - 1) * cols + j];
                    let left = acc[i * cols + j - 1];
                    Some(min3(diag, up, left).1)
                }
            };
            acc.push(match best_prev {
                None => local,
                Some(p) => p + local,
            });
        }
    }

    let mut steps = Vec::with_capacity(rows + cols);
    let (mut i, mut j) = (rows - 1, cols - 1);
    steps.push((i, j));
    while (i, j) != (0, 0) {
        (i, j) = match (i, j) {
            (0, _) => (0, j - 1),
            (_, 0) => (i - 1, 0),
            _ => {
                let diag = acc[(i - 1) * cols + j - 1];
                let up = acc[(i - 1) * cols + j];
                let left = acc[i * cols + j - 1];
                match min3(diag, up, left).0 {
                    0 => (i - 1, j - 1),
                    1 => (i - 1, j),
                    _ => (i, j - 1),
                }
            }
        };
        steps.push((i, j));
    }
    steps.reverse();
    (WarpPath { steps }, acc[rows * cols - 1])
}

// Index and value of the smallest candidate, earliest wins on ties.
#[inline]
fn min3<T: Copy + PartialOrd>(a: T, b: T, c: T) -> (u8, T) {
    let mut best = (0, a);
    if b < best.1 {
        best = (1, b);
    }
    if c < best.1 {
        best = (2, c);
    }
    best
}

/// Path cost divided by path length for one pair of scalar sequences.
pub fn normalized_path_cost<T: Scalar>(observed: &[T], reference: &[T]) -> Result<T, RecognitionError> {
    let cm = cost_matrix(observed, reference)?;
    let (path, cost) = optimal_path_cost(&cm);
    Ok(cost / T::from_count(path.len()))
}

/// Sum over feature dimensions of the length-normalized optimal path cost.
pub fn discrepancy<T: Scalar>(
    observed: &FeatureTrajectory<T>,
    reference: &FeatureTrajectory<T>,
) -> Result<T, RecognitionError> {
    let per_dim = per_dimension_costs(observed, reference)?;
    Ok(per_dim.into_iter().fold(T::zero(), |acc, c| acc + c))
}

/// Same as [`discrepancy`] with the dimensions aligned on the rayon pool. The
/// per-dimension costs are summed in dimension order, so the result is
/// identical to the sequential one.
pub fn discrepancy_par<T: Scalar>(
    observed: &FeatureTrajectory<T>,
    reference: &FeatureTrajectory<T>,
) -> Result<T, RecognitionError> {
    use rayon::prelude::*;

    check_shapes(observed, reference)?;
    let per_dim = (0..observed.m())
        .into_par_iter()
        .map(|d| normalized_path_cost(&observed.row(d), &reference.row(d)))
        .collect::<Result<Vec<T>, _>>()?;
    Ok(per_dim.into_iter().fold(T::zero(), |acc, c| acc + c))
}

/// Normalized optimal path cost of every feature dimension.
pub fn per_dimension_costs<T: Scalar>(
    observed: &FeatureTrajectory<T>,
    reference: &FeatureTrajectory<T>,
) -> Result<Vec<T>, RecognitionError> {
    check_shapes(observed, reference)?;
    (0..observed.m())
        .map(|d| normalized_path_cost(&observed.row(d), &reference.row(d)))
        .collect()
}

fn check_shapes<T: Scalar>(
    observed: &FeatureTrajectory<T>,
    reference: &FeatureTrajectory<T>,
) -> Result<(), RecognitionError> {
    if observed.m() != reference.m() {
        return Err(RecognitionError::DimensionMismatch { observed: observed.m(), reference: reference.m() });
    }
    if observed.n() == 0 || reference.n() == 0 {
        return Err(RecognitionError::EmptySequence);
    }
    Ok(())
}
