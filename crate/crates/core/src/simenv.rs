//! Simulated serial arm with feature extractors for the "wax" (tool position)
//! and "paint" (wall coverage) actions.
//!
//! Joint angles are in degrees, lengths and positions in meters. Every link
//! first rotates about its joint axis and then extends along its local x axis,
//! so an all-zero pose stretches the chain along the base x axis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::trajectory::FeatureTrajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("joint {joint} at {value} deg outside [{min}, {max}]")]
    JointLimitViolation { joint: usize, value: f64, min: f64, max: f64 },
    #[error("joint vector has {found} entries, chain has {expected} joints")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no wall configured")]
    NoWallConfigured,
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid wall: {0}")]
    InvalidWall(String),
}

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn rotation<T: Scalar>(self, degrees: T) -> Mat3<T> {
        let (s, c) = degrees.to_radians_lit().sin_cos();
        let (o, z) = (T::one(), T::zero());
        match self {
            Axis::X => [[o, z, z], [z, c, -s], [z, s, c]],
            Axis::Y => [[c, z, s], [z, o, z], [-s, z, c]],
            Axis::Z => [[c, -s, z], [s, c, z], [z, z, o]],
        }
    }
}

pub fn mat_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    out
}

pub fn mat_vec<T: Scalar>(a: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

pub fn distance_sq<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

fn identity<T: Scalar>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link<T> {
    pub length: T,
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> JointLimits<T> {
    pub fn contains(&self, v: T) -> bool {
        self.min <= v && v <= self.max
    }

    pub fn clamp(&self, v: T) -> T {
        v.max(self.min).min(self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T> {
    pub position: Vec3<T>,
    pub rotation: Mat3<T>,
}

impl<T: Scalar> Pose<T> {
    pub fn identity() -> Self {
        Self { position: [T::zero(); 3], rotation: identity() }
    }

    /// Position plus intrinsic Z-Y-X (yaw, pitch, roll) orientation in degrees.
    pub fn from_position_ypr(position: Vec3<T>, yaw: T, pitch: T, roll: T) -> Self {
        let r = mat_mul(&mat_mul(&Axis::Z.rotation(yaw), &Axis::Y.rotation(pitch)), &Axis::X.rotation(roll));
        Self { position, rotation: r }
    }
}

/// Joint angles in degrees, one per chain joint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector<T>(pub Vec<T>);

impl<T: Scalar> JointVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<T> From<Vec<T>> for JointVector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain<T> {
    links: Vec<Link<T>>,
    limits: Vec<JointLimits<T>>,
    base: Pose<T>,
    tool_offset: Vec3<T>,
}

impl<T: Scalar> KinematicChain<T> {
    pub fn new(links: Vec<Link<T>>, limits: Vec<JointLimits<T>>, base: Pose<T>) -> Result<Self, SimError> {
        if links.is_empty() {
            return Err(SimError::InvalidChain("chain needs at least one link".into()));
        }
        if links.len() != limits.len() {
            return Err(SimError::InvalidChain(format!("{} links but {} joint limits", links.len(), limits.len())));
        }
        // Zero-length links are allowed (co-located joints).
        if let Some((i, _)) = links.iter().enumerate().find(|(_, l)| !(l.length >= T::zero() && l.length.is_finite())) {
            return Err(SimError::InvalidChain(format!("link {i} length must be finite and non-negative")));
        }
        if let Some((i, _)) = limits.iter().enumerate().find(|(_, l)| !(l.min < l.max)) {
            return Err(SimError::InvalidChain(format!("joint {i} limits need min < max")));
        }
        Ok(Self { links, limits, base, tool_offset: [T::zero(); 3] })
    }

    /// Three revolute joints (Z, Y, Y), links 0.3/0.3/0.2 m, every joint
    /// limited to [-15, 100] degrees.
    pub fn default_arm() -> Self {
        let limits = JointLimits { min: T::lit(-15.0), max: T::lit(100.0) };
        Self::new(
            vec![
                Link { length: T::lit(0.3), axis: Axis::Z },
                Link { length: T::lit(0.3), axis: Axis::Y },
                Link { length: T::lit(0.2), axis: Axis::Y },
            ],
            vec![limits; 3],
            Pose::identity(),
        )
        .expect("default arm is valid")
    }

    /// Offset of the tool point (grasped object centroid, paint nozzle) in the
    /// last link frame.
    pub fn with_tool_offset(mut self, offset: Vec3<T>) -> Self {
        self.tool_offset = offset;
        self
    }

    pub fn dof(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link<T>] {
        &self.links
    }

    pub fn limits(&self) -> &[JointLimits<T>] {
        &self.limits
    }

    pub fn base(&self) -> &Pose<T> {
        &self.base
    }

    pub fn tool_offset(&self) -> Vec3<T> {
        self.tool_offset
    }

    pub fn lower_bounds(&self) -> Vec<T> {
        self.limits.iter().map(|l| l.min).collect()
    }

    pub fn upper_bounds(&self) -> Vec<T> {
        self.limits.iter().map(|l| l.max).collect()
    }

    pub fn clamp(&self, q: &mut [T]) {
        for (v, l) in q.iter_mut().zip(&self.limits) {
            *v = l.clamp(*v);
        }
    }

    pub fn check(&self, q: &[T]) -> Result<(), SimError> {
        if q.len() != self.dof() {
            return Err(SimError::DimensionMismatch { expected: self.dof(), found: q.len() });
        }
        for (joint, (&value, l)) in q.iter().zip(&self.limits).enumerate() {
            if !l.contains(value) {
                return Err(SimError::JointLimitViolation {
                    joint,
                    value: value.as_f64(),
                    min: l.min.as_f64(),
                    max: l.max.as_f64(),
                });
            }
        }
        Ok(())
    }

    // Caller guarantees `q` passed `check`.
    fn tool_position(&self, q: &[T]) -> Vec3<T> {
        let mut rot = self.base.rotation;
        let mut pos = self.base.position;
        for (link, &angle) in self.links.iter().zip(q) {
            rot = mat_mul(&rot, &link.axis.rotation(angle));
            let step = [rot[0][0] * link.length, rot[1][0] * link.length, rot[2][0] * link.length];
            pos = [pos[0] + step[0], pos[1] + step[1], pos[2] + step[2]];
        }
        let off = mat_vec(&rot, &self.tool_offset);
        [pos[0] + off[0], pos[1] + off[1], pos[2] + off[2]]
    }
}

/// Tool-point position for joint angles `q` (degrees).
pub fn forward_kinematics<T: Scalar>(chain: &KinematicChain<T>, q: &JointVector<T>) -> Result<Vec3<T>, SimError> {
    chain.check(q.as_slice())?;
    Ok(chain.tool_position(q.as_slice()))
}

/// Geometry of a paintable wall, independent of its paint state.
#[derive(Debug, Clone, PartialEq)]
pub struct WallSpec<T> {
    pub center: Vec3<T>,
    pub u_axis: Vec3<T>,
    pub v_axis: Vec3<T>,
    pub width: T,
    pub height: T,
    pub resolution: (usize, usize),
    pub paint_distance: T,
}

impl<T: Scalar> WallSpec<T> {
    /// 0.6 m square horizontal panel below the default arm, 16 x 16 cells,
    /// painted within 0.1 m.
    pub fn default_for_arm() -> Self {
        Self {
            center: [T::lit(0.25), T::lit(0.25), T::lit(-0.35)],
            u_axis: [T::one(), T::zero(), T::zero()],
            v_axis: [T::zero(), T::one(), T::zero()],
            width: T::lit(0.6),
            height: T::lit(0.6),
            resolution: (16, 16),
            paint_distance: T::lit(0.1),
        }
    }
}

/// Wall discretized into cells that become painted when the tool point comes
/// within `paint_distance` of their centers.
#[derive(Debug, Clone, PartialEq)]
pub struct WallGrid<T> {
    spec: WallSpec<T>,
    centers: Vec<Vec3<T>>,
    painted: Vec<bool>,
    painted_count: usize,
}

impl<T: Scalar> WallGrid<T> {
    pub fn new(spec: WallSpec<T>) -> Result<Self, SimError> {
        let norm = |v: &Vec3<T>| distance_sq(v, &[T::zero(); 3]).sqrt();
        let (nu, nv) = (norm(&spec.u_axis), norm(&spec.v_axis));
        if !(nu > T::zero() && nv > T::zero()) {
            return Err(SimError::InvalidWall("plane axes must be non-zero".into()));
        }
        if !(spec.width > T::zero() && spec.height > T::zero()) {
            return Err(SimError::InvalidWall("width and height must be positive".into()));
        }
        if spec.resolution.0 == 0 || spec.resolution.1 == 0 {
            return Err(SimError::InvalidWall("resolution must be at least 1 x 1".into()));
        }
        if !(spec.paint_distance >= T::zero()) {
            return Err(SimError::InvalidWall("paint distance must be non-negative".into()));
        }
        let u = spec.u_axis.map(|c| c / nu);
        let v = spec.v_axis.map(|c| c / nv);
        let (ru, rv) = spec.resolution;
        let half = T::lit(0.5);
        let mut centers = Vec::with_capacity(ru * rv);
        for b in 0..rv {
            let sv = (T::from_count(b) + half) / T::from_count(rv) - half;
            for a in 0..ru {
                let su = (T::from_count(a) + half) / T::from_count(ru) - half;
                let (du, dv) = (su * spec.width, sv * spec.height);
                centers.push([
                    spec.center[0] + du * u[0] + dv * v[0],
                    spec.center[1] + du * u[1] + dv * v[1],
                    spec.center[2] + du * u[2] + dv * v[2],
                ]);
            }
        }
        let cells = centers.len();
        Ok(Self { spec, centers, painted: vec![false; cells], painted_count: 0 })
    }

    pub fn spec(&self) -> &WallSpec<T> {
        &self.spec
    }

    pub fn cell_centers(&self) -> &[Vec3<T>] {
        &self.centers
    }

    pub fn painted_cells(&self) -> &[bool] {
        &self.painted
    }

    pub fn painted_count(&self) -> usize {
        self.painted_count
    }

    pub fn total_cells(&self) -> usize {
        self.centers.len()
    }

    /// Corner points of the wall rectangle.
    pub fn corners(&self) -> [Vec3<T>; 4] {
        let nu = distance_sq(&self.spec.u_axis, &[T::zero(); 3]).sqrt();
        let nv = distance_sq(&self.spec.v_axis, &[T::zero(); 3]).sqrt();
        let half = T::lit(0.5);
        let u = self.spec.u_axis.map(|c| c / nu * self.spec.width * half);
        let v = self.spec.v_axis.map(|c| c / nv * self.spec.height * half);
        let c = self.spec.center;
        let at = |su: T, sv: T| [c[0] + su * u[0] + sv * v[0], c[1] + su * u[1] + sv * v[1], c[2] + su * u[2] + sv * v[2]];
        let (p, m) = (T::one(), -T::one());
        [at(m, m), at(p, m), at(p, p), at(m, p)]
    }

    pub fn paint_at(&mut self, tool: &Vec3<T>) {
        let reach = self.spec.paint_distance * self.spec.paint_distance;
        for (cell, center) in self.painted.iter_mut().zip(&self.centers) {
            if !*cell && distance_sq(tool, center) <= reach {
                *cell = true;
                self.painted_count += 1;
            }
        }
    }

    pub fn painted_percent(&self) -> T {
        T::lit(100.0) * T::from_count(self.painted_count) / T::from_count(self.total_cells())
    }

    pub fn clear(&mut self) {
        self.painted.iter_mut().for_each(|c| *c = false);
        self.painted_count = 0;
    }
}

/// Which environment features an execution observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Tool-point position `(x, y, z)`.
    Wax,
    /// Percentage of painted wall.
    Paint,
}

impl FeatureKind {
    pub fn dimension(self) -> usize {
        match self {
            FeatureKind::Wax => 3,
            FeatureKind::Paint => 1,
        }
    }
}

/// Mutable simulation state owned by one executor. Clones evolve
/// independently.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState<T> {
    chain: KinematicChain<T>,
    home: JointVector<T>,
    q: JointVector<T>,
    wall: Option<WallGrid<T>>,
    history: Vec<JointVector<T>>,
    features: FeatureKind,
}

impl<T: Scalar> EnvState<T> {
    pub fn new(
        chain: KinematicChain<T>,
        home: JointVector<T>,
        wall: Option<WallGrid<T>>,
        features: FeatureKind,
    ) -> Result<Self, SimError> {
        chain.check(home.as_slice())?;
        if features == FeatureKind::Paint && wall.is_none() {
            return Err(SimError::NoWallConfigured);
        }
        Ok(Self { chain, q: home.clone(), home, wall, history: Vec::new(), features })
    }

    /// Default arm at the all-zero pose observing the tool position.
    pub fn wax_default() -> Self {
        let chain = KinematicChain::default_arm();
        let home = JointVector(vec![T::zero(); chain.dof()]);
        Self::new(chain, home, None, FeatureKind::Wax).expect("default wax environment is valid")
    }

    /// Default arm at the all-zero pose observing the default wall.
    pub fn paint_default() -> Self {
        let chain = KinematicChain::default_arm();
        let home = JointVector(vec![T::zero(); chain.dof()]);
        let wall = WallGrid::new(WallSpec::default_for_arm()).expect("default wall is valid");
        Self::new(chain, home, Some(wall), FeatureKind::Paint).expect("default paint environment is valid")
    }

    pub fn chain(&self) -> &KinematicChain<T> {
        &self.chain
    }

    pub fn home(&self) -> &JointVector<T> {
        &self.home
    }

    pub fn q(&self) -> &JointVector<T> {
        &self.q
    }

    pub fn wall(&self) -> Option<&WallGrid<T>> {
        self.wall.as_ref()
    }

    pub fn history(&self) -> &[JointVector<T>] {
        &self.history
    }

    pub fn feature_kind(&self) -> FeatureKind {
        self.features
    }

    pub fn feature_dimension(&self) -> usize {
        self.features.dimension()
    }

    /// Back to the home pose with a clean wall and no history. The chain is
    /// left untouched.
    pub fn reset(&mut self) {
        self.q = self.home.clone();
        self.history.clear();
        if let Some(w) = self.wall.as_mut() {
            w.clear();
        }
    }

    /// Tool-point position at the current pose.
    pub fn wax_features(&self) -> Vec3<T> {
        self.chain.tool_position(self.q.as_slice())
    }

    pub fn paint_features(&self) -> Result<T, SimError> {
        self.wall.as_ref().map(WallGrid::painted_percent).ok_or(SimError::NoWallConfigured)
    }

    /// Current feature vector for the configured extractor.
    pub fn observe(&self) -> Vec<T> {
        match self.features {
            FeatureKind::Wax => self.wax_features().to_vec(),
            FeatureKind::Paint => vec![self.paint_features().expect("paint environments always carry a wall")],
        }
    }

    /// Moves to `q`, paints, and returns the observed features.
    pub fn step(&mut self, q: &JointVector<T>) -> Result<Vec<T>, SimError> {
        self.chain.check(q.as_slice())?;
        Ok(self.step_unchecked(q))
    }

    fn step_unchecked(&mut self, q: &JointVector<T>) -> Vec<T> {
        self.q = q.clone();
        if let Some(wall) = self.wall.as_mut() {
            let tool = self.chain.tool_position(self.q.as_slice());
            wall.paint_at(&tool);
        }
        self.history.push(q.clone());
        self.observe()
    }

    /// Replays `trajectory` from the current state, one observed column per
    /// pose. The whole trajectory is validated first; on error the state is
    /// unchanged.
    pub fn mental_execution(&mut self, trajectory: &[JointVector<T>]) -> Result<FeatureTrajectory<T>, SimError> {
        for q in trajectory {
            self.chain.check(q.as_slice())?;
        }
        let mut out = FeatureTrajectory::empty(self.feature_dimension());
        for q in trajectory {
            let col = self.step_unchecked(q);
            out.push_column(&col);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3<f64>, b: Vec3<f64>) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn zero_pose_extends_along_x() {
        let chain = KinematicChain::<f64>::new(
            vec![
                Link { length: 0.3, axis: Axis::Z },
                Link { length: 0.3, axis: Axis::Z },
                Link { length: 0.2, axis: Axis::Z },
            ],
            vec![JointLimits { min: -15.0, max: 100.0 }; 3],
            Pose::identity(),
        )
        .unwrap();
        let p = forward_kinematics(&chain, &JointVector(vec![0.0; 3])).unwrap();
        assert!(close(p, [0.8, 0.0, 0.0]));
        let p = forward_kinematics(&chain, &JointVector(vec![90.0, 0.0, 0.0])).unwrap();
        assert!(close(p, [0.0, 0.8, 0.0]));
    }

    #[test]
    fn limits_and_dimensions_enforced() {
        let chain = KinematicChain::<f64>::default_arm();
        assert!(matches!(
            forward_kinematics(&chain, &JointVector(vec![0.0, 101.0, 0.0])),
            Err(SimError::JointLimitViolation { joint: 1, .. })
        ));
        assert!(matches!(
            forward_kinematics(&chain, &JointVector(vec![0.0, 0.0])),
            Err(SimError::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(forward_kinematics(&chain, &JointVector(vec![-15.0, 100.0, 0.0])).is_ok());
    }

    #[test]
    fn invalid_chains_rejected() {
        let bad_len = KinematicChain::<f64>::new(
            vec![Link { length: -0.1, axis: Axis::Z }],
            vec![JointLimits { min: 0.0, max: 1.0 }],
            Pose::identity(),
        );
        assert!(matches!(bad_len, Err(SimError::InvalidChain(_))));
        let bad_lim = KinematicChain::<f64>::new(
            vec![Link { length: 0.1, axis: Axis::Z }],
            vec![JointLimits { min: 1.0, max: 1.0 }],
            Pose::identity(),
        );
        assert!(matches!(bad_lim, Err(SimError::InvalidChain(_))));
    }

    #[test]
    fn empty_execution_leaves_state() {
        let mut env = EnvState::<f64>::wax_default();
        let before = env.clone();
        let f = env.mental_execution(&[]).unwrap();
        assert_eq!(f.n(), 0);
        assert_eq!(f.m(), 3);
        assert_eq!(env, before);
    }

    #[test]
    fn rejected_trajectory_is_atomic() {
        let mut env = EnvState::<f64>::paint_default();
        let good = JointVector(vec![30.0, 40.0, 50.0]);
        let bad = JointVector(vec![30.0, 400.0, 50.0]);
        let before = env.clone();
        assert!(env.mental_execution(&[good, bad]).is_err());
        assert_eq!(env, before);
    }

    #[test]
    fn wax_single_pose_matches_fk() {
        let mut env = EnvState::<f64>::wax_default();
        let q = JointVector(vec![10.0, 20.0, 30.0]);
        let f = env.mental_execution(std::slice::from_ref(&q)).unwrap();
        let p = forward_kinematics(env.chain(), &q).unwrap();
        assert_eq!(f.column(0), &p);
        assert_eq!(env.wax_features(), p);
        assert_eq!(env.history(), &[q]);
    }

    #[test]
    fn reset_clears_paint_and_keeps_chain() {
        let mut env = EnvState::<f64>::paint_default();
        let chain = env.chain().clone();
        env.mental_execution(&[JointVector(vec![29.0, 42.0, 50.0])]).unwrap();
        assert!(env.paint_features().unwrap() > 0.0);
        env.reset();
        assert_eq!(env.paint_features().unwrap(), 0.0);
        assert_eq!(env.chain(), &chain);
        assert!(env.history().is_empty());
        assert_eq!(env.q(), env.home());
    }

    #[test]
    fn paint_requires_wall() {
        let env = EnvState::<f64>::wax_default();
        assert_eq!(env.paint_features(), Err(SimError::NoWallConfigured));
        let chain = KinematicChain::<f64>::default_arm();
        assert!(matches!(
            EnvState::new(chain, JointVector(vec![0.0; 3]), None, FeatureKind::Paint),
            Err(SimError::NoWallConfigured)
        ));
    }

    #[test]
    fn full_wall_is_one_hundred_percent() {
        let mut spec = WallSpec::<f64>::default_for_arm();
        spec.paint_distance = 10.0;
        let mut wall = WallGrid::new(spec).unwrap();
        wall.paint_at(&[0.0, 0.0, 0.0]);
        assert_eq!(wall.painted_percent(), 100.0);
    }

    #[test]
    fn corners_span_the_wall() {
        let wall = WallGrid::new(WallSpec::<f64>::default_for_arm()).unwrap();
        let c = wall.corners();
        assert!(close(c[0], [-0.05, -0.05, -0.35]));
        assert!(close(c[2], [0.55, 0.55, -0.35]));
    }
}
