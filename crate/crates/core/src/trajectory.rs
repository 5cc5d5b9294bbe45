//! Demonstrations, time normalization, generalized feature trajectories and
//! radial-basis interpolation between intermediate goals.

use std::io::{Read, Write};
use std::path::Path;

use num_traits::{Num, ToPrimitive};
use thiserror::Error;

use crate::linalg::Lu;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("durations must be positive (d_time = {d_time}, t_min = {t_min})")]
    NonPositiveDuration { d_time: f64, t_min: f64 },
    #[error("action shorter than one goal interval yields zero intermediate goals")]
    DegenerateAction,
    #[error("a demonstration needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("timestamps must be strictly increasing (sample {index})")]
    NonMonotoneTimestamps { index: usize },
    #[error("sample {index} has {found} features, expected {expected}")]
    FeatureCountMismatch { index: usize, expected: usize, found: usize },
    #[error("feature dimension must be at least 1")]
    NoFeatures,
    #[error("no demonstrations supplied")]
    EmptyDemoSet,
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("goal count mismatch: trajectory has {found} goals, timing implies {expected}")]
    GoalCountMismatch { expected: usize, found: usize },
    #[error("trajectory must contain at least one goal")]
    EmptyTrajectory,
    #[error("kernel system is numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },
    #[error("interpolation nodes must be sorted")]
    UnsortedNodes,
    #[error("normalized time {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("malformed demonstration file: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = TrajectoryError> = std::result::Result<T, E>;

/// A single recorded execution of an action: timestamped feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration<T> {
    times: Vec<T>,
    samples: Vec<Vec<T>>,
}

impl<T: Scalar> Demonstration<T> {
    pub fn new(times: Vec<T>, samples: Vec<Vec<T>>) -> Result<Self> {
        if times.len() != samples.len() {
            return Err(TrajectoryError::Parse(format!(
                "{} timestamps for {} samples",
                times.len(),
                samples.len()
            )));
        }
        if times.len() < 2 {
            return Err(TrajectoryError::TooFewSamples(times.len()));
        }
        let m = samples[0].len();
        if m == 0 {
            return Err(TrajectoryError::NoFeatures);
        }
        for (index, s) in samples.iter().enumerate() {
            if s.len() != m {
                return Err(TrajectoryError::FeatureCountMismatch { index, expected: m, found: s.len() });
            }
        }
        for (index, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(TrajectoryError::NonMonotoneTimestamps { index: index + 1 });
            }
        }
        Ok(Self { times, samples })
    }

    /// Builds a demonstration from `(timestamp, features)` pairs.
    pub fn from_samples(samples: impl IntoIterator<Item = (T, Vec<T>)>) -> Result<Self> {
        let (times, feats) = samples.into_iter().unzip();
        Self::new(times, feats)
    }

    /// Treats the columns of a trajectory as samples taken at uniformly
    /// spaced normalized times in `[0, 1]`.
    pub fn from_trajectory(traj: &FeatureTrajectory<T>) -> Result<Self> {
        let n = traj.n();
        let times = (0..n)
            .map(|k| if n == 1 { T::zero() } else { T::from_count(k) / T::from_count(n - 1) })
            .collect();
        Self::new(times, traj.columns().map(<[T]>::to_vec).collect())
    }

    pub fn feature_count(&self) -> usize {
        self.samples[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn samples(&self) -> &[Vec<T>] {
        &self.samples
    }

    pub fn duration(&self) -> T {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Reads the `t,f1,...,fm` CSV layout.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "t" {
            return Err(TrajectoryError::Parse("header must be `t,f1,...,fm`".into()));
        }
        let m = headers.len() - 1;
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |field: &str| -> Result<T> {
                field
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| TrajectoryError::Parse(format!("row {}: `{field}`: {e}", row + 1)))
            };
            if record.len() != m + 1 {
                return Err(TrajectoryError::FeatureCountMismatch { index: row, expected: m, found: record.len().saturating_sub(1) });
            }
            times.push(parse(&record[0])?);
            samples.push(record.iter().skip(1).map(parse).collect::<Result<Vec<T>>>()?);
        }
        Self::new(times, samples)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.feature_count()).map(|i| format!("f{i}")));
        wtr.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.samples) {
            let mut row = vec![t.to_string()];
            row.extend(s.iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Dense `m x n` matrix of feature values; column `j` is intermediate goal `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrajectory<T> {
    m: usize,
    n: usize,
    // Column-major: goal j occupies data[j*m .. (j+1)*m].
    data: Vec<T>,
}

impl<T: Scalar> FeatureTrajectory<T> {
    /// An `m x 0` trajectory, as produced by replaying nothing.
    pub fn empty(m: usize) -> Self {
        Self { m, n: 0, data: Vec::new() }
    }

    pub fn from_columns<C: AsRef<[T]>>(columns: impl IntoIterator<Item = C>) -> Result<Self> {
        let mut data = Vec::new();
        let mut m = None;
        let mut n = 0;
        for col in columns {
            let col = col.as_ref();
            match m {
                None if col.is_empty() => return Err(TrajectoryError::NoFeatures),
                None => m = Some(col.len()),
                Some(m) if m != col.len() => {
                    return Err(TrajectoryError::DimensionMismatch { expected: m, found: col.len() })
                }
                _ => {}
            }
            data.extend_from_slice(col);
            n += 1;
        }
        let m = m.ok_or(TrajectoryError::EmptyTrajectory)?;
        Ok(Self { m, n, data })
    }

    /// Builds from one series per feature dimension.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(TrajectoryError::NoFeatures);
        }
        let n = rows[0].as_ref().len();
        if n == 0 {
            return Err(TrajectoryError::EmptyTrajectory);
        }
        if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != n) {
            return Err(TrajectoryError::DimensionMismatch { expected: n, found: bad.as_ref().len() });
        }
        let data = (0..n).flat_map(|j| rows.iter().map(move |r| r.as_ref()[j])).collect();
        Ok(Self { m, n, data })
    }

    pub(crate) fn push_column(&mut self, column: &[T]) {
        debug_assert_eq!(column.len(), self.m);
        self.data.extend_from_slice(column);
        self.n += 1;
    }

    /// Feature dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Goal count.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, feature: usize, goal: usize) -> T {
        self.data[goal * self.m + feature]
    }

    pub fn column(&self, goal: usize) -> &[T] {
        &self.data[goal * self.m..(goal + 1) * self.m]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        // chunks_exact on an empty slice with m >= 1 yields nothing.
        self.data.chunks_exact(self.m.max(1))
    }

    /// Series of one feature dimension across all goals.
    pub fn row(&self, feature: usize) -> Vec<T> {
        self.columns().map(|c| c[feature]).collect()
    }

    pub fn as_column_major(&self) -> &[T] {
        &self.data
    }
}

/// Number of intermediate goals: `floor(d_time / t_min)`.
///
/// Generic over any ordered numeric type so exact rationals can be used as
/// well as floats.
pub fn compute_goal_count<N>(d_time: N, t_min: N) -> Result<usize>
where
    N: Num + PartialOrd + Copy + ToPrimitive,
{
    if !(d_time > N::zero()) || !(t_min > N::zero()) {
        return Err(TrajectoryError::NonPositiveDuration {
            d_time: d_time.to_f64().unwrap_or(f64::NAN),
            t_min: t_min.to_f64().unwrap_or(f64::NAN),
        });
    }
    // Both operands are positive, so truncation is the floor.
    let n = (d_time / t_min).to_usize().ok_or(TrajectoryError::DegenerateAction)?;
    if n == 0 {
        return Err(TrajectoryError::DegenerateAction);
    }
    Ok(n)
}

/// Normalized query time of goal `k` out of `n`. A single goal sits at the end
/// of the action.
fn goal_time<T: Scalar>(k: usize, n: usize) -> T {
    if n == 1 {
        T::one()
    } else {
        T::from_count(k) / T::from_count(n - 1)
    }
}

/// Resamples a demonstration to `n` columns at uniformly spaced normalized
/// times by piecewise-linear interpolation.
pub fn resample<T: Scalar>(demo: &Demonstration<T>, n: usize) -> Result<FeatureTrajectory<T>> {
    if demo.len() < 2 {
        return Err(TrajectoryError::TooFewSamples(demo.len()));
    }
    if n == 0 {
        return Err(TrajectoryError::EmptyTrajectory);
    }
    let t0 = demo.times[0];
    let span = demo.duration();
    let norm: Vec<T> = demo.times.iter().map(|&t| (t - t0) / span).collect();
    let snap = T::epsilon() * T::lit(8.0);

    let mut out = FeatureTrajectory { m: demo.feature_count(), n: 0, data: Vec::with_capacity(n * demo.feature_count()) };
    for k in 0..n {
        let u: T = goal_time(k, n);
        let hi = norm.partition_point(|&s| s < u).min(norm.len() - 1);
        if hi == 0 || (norm[hi] - u).abs() <= snap {
            out.push_column(&demo.samples[hi]);
            continue;
        }
        let lo = hi - 1;
        if (u - norm[lo]).abs() <= snap {
            out.push_column(&demo.samples[lo]);
            continue;
        }
        let w = (u - norm[lo]) / (norm[hi] - norm[lo]);
        let col: Vec<T> = demo.samples[lo]
            .iter()
            .zip(&demo.samples[hi])
            .map(|(&a, &b)| a + (b - a) * w)
            .collect();
        out.push_column(&col);
    }
    Ok(out)
}

/// Radial kernel `phi(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel<T> {
    /// `exp(-(shape * r)^2)`.
    Gaussian { shape: T },
}

impl<T: Scalar> Kernel<T> {
    /// Gaussian whose shape parameter equals the node count, so neighbouring
    /// nodes always sit about one shape-length apart.
    pub fn default_for(node_count: usize) -> Self {
        Kernel::Gaussian { shape: T::from_count(node_count.max(1)) }
    }

    #[inline]
    pub fn phi(&self, r: T) -> T {
        match *self {
            Kernel::Gaussian { shape } => {
                let s = shape * r;
                (-(s * s)).exp()
            }
        }
    }
}

/// Per-dimension RBF interpolant over normalized time.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfInterpolant<T> {
    nodes: Vec<T>,
    m: usize,
    // Column-major m x n, same layout as FeatureTrajectory.
    weights: Vec<T>,
    kernel: Kernel<T>,
}

impl<T: Scalar> RbfInterpolant<T> {
    /// Fits with nodes at `j / (n - 1)` (a single node at 0).
    pub fn fit(trajectory: &FeatureTrajectory<T>, kernel: Kernel<T>) -> Result<Self> {
        let n = trajectory.n();
        let nodes = (0..n)
            .map(|j| if n == 1 { T::zero() } else { T::from_count(j) / T::from_count(n - 1) })
            .collect();
        Self::fit_nodes(nodes, trajectory, kernel)
    }

    /// Fits at caller-supplied abscissae, one per trajectory column.
    pub fn fit_nodes(nodes: Vec<T>, trajectory: &FeatureTrajectory<T>, kernel: Kernel<T>) -> Result<Self> {
        let n = trajectory.n();
        if n == 0 {
            return Err(TrajectoryError::EmptyTrajectory);
        }
        if nodes.len() != n {
            return Err(TrajectoryError::GoalCountMismatch { expected: n, found: nodes.len() });
        }
        if nodes.windows(2).any(|w| w[1] < w[0]) {
            return Err(TrajectoryError::UnsortedNodes);
        }
        let m = trajectory.m();
        let mut a = Vec::with_capacity(n * n);
        for &xi in &nodes {
            for &xj in &nodes {
                a.push(kernel.phi((xi - xj).abs()));
            }
        }
        let lu = Lu::factor(n, a.clone()).map_err(|_| TrajectoryError::SingularSystem { condition: f64::INFINITY })?;
        let condition = lu.condition_1(&a);
        if !(condition <= singular_threshold::<T>()) {
            return Err(TrajectoryError::SingularSystem { condition: condition.as_f64() });
        }
        let mut weights = vec![T::zero(); m * n];
        for feature in 0..m {
            let w = lu.solve(&trajectory.row(feature));
            for (j, wj) in w.into_iter().enumerate() {
                weights[j * m + feature] = wj;
            }
        }
        Ok(Self { nodes, m, weights, kernel })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn kernel(&self) -> Kernel<T> {
        self.kernel
    }

    pub fn feature_count(&self) -> usize {
        self.m
    }

    /// Weight of node `node` for feature dimension `feature`.
    pub fn weight(&self, feature: usize, node: usize) -> T {
        self.weights[node * self.m + feature]
    }

    /// `f(x) = sum_i w_i phi(|x - x_i|)` for every feature dimension.
    pub fn eval(&self, x: T) -> Vec<T> {
        if self.nodes.len() == 1 {
            // A single goal interpolates to a constant.
            return self.weights.clone();
        }
        let mut out = vec![T::zero(); self.m];
        for (i, &xi) in self.nodes.iter().enumerate() {
            let phi = self.kernel.phi((x - xi).abs());
            for (f, o) in out.iter_mut().enumerate() {
                *o += self.weights[i * self.m + f] * phi;
            }
        }
        out
    }
}

fn singular_threshold<T: Scalar>() -> T {
    T::one() / (T::epsilon() * T::lit(1e4))
}

/// Fits the default Gaussian interpolant through every goal column.
pub fn fit_rbf<T: Scalar>(trajectory: &FeatureTrajectory<T>) -> Result<RbfInterpolant<T>> {
    RbfInterpolant::fit(trajectory, Kernel::default_for(trajectory.n()))
}

/// Generalized action: mean goal trajectory plus its timing and interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedAction<T> {
    trajectory: FeatureTrajectory<T>,
    d_time: T,
    t_min: T,
    interpolant: RbfInterpolant<T>,
}

impl<T: Scalar> GeneralizedAction<T> {
    /// Wraps an existing goal trajectory, checking it agrees with the timing.
    pub fn from_goals(trajectory: FeatureTrajectory<T>, d_time: T, t_min: T) -> Result<Self> {
        let expected = compute_goal_count(d_time, t_min)?;
        if trajectory.n() != expected {
            return Err(TrajectoryError::GoalCountMismatch { expected, found: trajectory.n() });
        }
        let interpolant = fit_rbf(&trajectory)?;
        Ok(Self { trajectory, d_time, t_min, interpolant })
    }

    pub fn trajectory(&self) -> &FeatureTrajectory<T> {
        &self.trajectory
    }

    pub fn d_time(&self) -> T {
        self.d_time
    }

    pub fn t_min(&self) -> T {
        self.t_min
    }

    pub fn interpolant(&self) -> &RbfInterpolant<T> {
        &self.interpolant
    }

    pub fn goal_count(&self) -> usize {
        self.trajectory.n()
    }
}

/// Averages time-normalized demonstrations into a generalized action.
pub fn generalize<T: Scalar>(demos: &[Demonstration<T>], t_min: T) -> Result<GeneralizedAction<T>> {
    let first = demos.first().ok_or(TrajectoryError::EmptyDemoSet)?;
    let m = first.feature_count();
    if let Some(bad) = demos.iter().find(|d| d.feature_count() != m) {
        return Err(TrajectoryError::DimensionMismatch { expected: m, found: bad.feature_count() });
    }
    let count = T::from_count(demos.len());
    let d_time = demos.iter().fold(T::zero(), |acc, d| acc + d.duration()) / count;
    let n = compute_goal_count(d_time, t_min)?;

    let resampled = demos.iter().map(|d| resample(d, n)).collect::<Result<Vec<_>>>()?;
    let mut data = vec![T::zero(); m * n];
    for r in &resampled {
        for (acc, &v) in data.iter_mut().zip(r.as_column_major()) {
            *acc += v;
        }
    }
    data.iter_mut().for_each(|v| *v /= count);
    let trajectory = FeatureTrajectory { m, n, data };
    let interpolant = fit_rbf(&trajectory)?;
    Ok(GeneralizedAction { trajectory, d_time, t_min, interpolant })
}

/// Evaluates the action's interpolant at normalized time `t`.
pub fn sample_action<T: Scalar>(action: &GeneralizedAction<T>, t: T) -> Result<Vec<T>> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(TrajectoryError::OutOfRange(t.as_f64()));
    }
    Ok(action.interpolant.eval(t))
}
