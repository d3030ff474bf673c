//! Configuration spaces: representation, sampling, steering and the metric.
//!
//! Articulated objects (rigid bodies are the `n_j = 0` case) live in
//! `SE(3) x R^n_j`; planar scenes reuse the same representation with the
//! position pinned to the `x-z` plane (`y = 0`) and orientation restricted to
//! rotations about `+y`. Closed elastic bands are a list of free key points.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Seeded random stream owned by a single planner run.
pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream index so sub-runs get independent streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Configuration<S: Real> {
    Articulated {
        /// Base position in meters.
        r: Vector3<S>,
        /// Base orientation.
        q: UnitQuaternion<S>,
        /// Joint angles in radians.
        alpha: Vec<S>,
    },
    Band {
        points: Vec<Vector3<S>>,
    },
}

impl<S: Real> Configuration<S> {
    pub fn articulated(r: Vector3<S>, q: UnitQuaternion<S>, alpha: Vec<S>) -> Self {
        Configuration::Articulated { r, q, alpha }
    }

    /// Rigid body at `r` with identity orientation and no joints.
    pub fn point(r: Vector3<S>) -> Self {
        Configuration::Articulated {
            r,
            q: UnitQuaternion::identity(),
            alpha: Vec::new(),
        }
    }

    pub fn band(points: Vec<Vector3<S>>) -> Self {
        Configuration::Band { points }
    }

    pub fn is_band(&self) -> bool {
        matches!(self, Configuration::Band { .. })
    }

    /// Base position (articulated) or centroid of the key points (band).
    pub fn position(&self) -> Vector3<S> {
        match self {
            Configuration::Articulated { r, .. } => *r,
            Configuration::Band { points } => {
                let n = S::from_usize(points.len()).unwrap_or(S::ONE);
                points.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n
            }
        }
    }

    pub fn joints(&self) -> &[S] {
        match self {
            Configuration::Articulated { alpha, .. } => alpha,
            Configuration::Band { .. } => &[],
        }
    }
}

/// Which family of configuration space a scene uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// Full `SE(3) x R^n_j`.
    Spatial,
    /// Position in the `x-z` plane, optional rotation about `+y`.
    Planar { rotation: bool },
    /// `points` free key points in 3D.
    Band { points: usize },
}

/// Weights of the configuration-space metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights<S: Real> {
    pub position: S,
    pub rotation: S,
    pub joint: S,
}

impl<S: Real> Default for Weights<S> {
    fn default() -> Self {
        Weights {
            position: S::ONE,
            rotation: S::ONE,
            joint: S::ONE,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceDescriptor<S: Real> {
    kind: SpaceKind,
    lower: Vector3<S>,
    upper: Vector3<S>,
    joint_limits: Vec<(S, S)>,
    weights: Weights<S>,
}

impl<S: Real> SpaceDescriptor<S> {
    pub fn new(
        kind: SpaceKind,
        lower: Vector3<S>,
        upper: Vector3<S>,
        joint_limits: Vec<(S, S)>,
        weights: Weights<S>,
    ) -> Result<Self> {
        let axes: &[usize] = match kind {
            SpaceKind::Planar { .. } => &[0, 2],
            _ => &[0, 1, 2],
        };
        for &axis in axes {
            let (lo, hi) = (lower[axis], upper[axis]);
            if !(lo.is_finite_value() && hi.is_finite_value() && hi > lo) {
                return Err(Error::scene(
                    format!("space.bounds[{axis}]"),
                    "bounds must be finite with positive extent",
                ));
            }
        }
        for (i, &(a, b)) in joint_limits.iter().enumerate() {
            let pi = S::PI();
            if !(a <= b && a >= -pi && b <= pi) {
                return Err(Error::scene(
                    format!("space.joint_limits[{i}]"),
                    "joint limits must satisfy -pi <= lower <= upper <= pi",
                ));
            }
        }
        if !(weights.position > S::ZERO && weights.rotation > S::ZERO && weights.joint > S::ZERO) {
            return Err(Error::scene(
                "space.weights",
                "all metric weights must be positive",
            ));
        }
        if let SpaceKind::Band { points } = kind {
            if points < 3 {
                return Err(Error::scene(
                    "object.points",
                    "a band needs at least 3 key points",
                ));
            }
            if !joint_limits.is_empty() {
                return Err(Error::scene("space.joint_limits", "bands have no joints"));
            }
        }
        Ok(SpaceDescriptor {
            kind,
            lower,
            upper,
            joint_limits,
            weights,
        })
    }

    /// Planar point mass without rotation over the `x-z` rectangle.
    pub fn planar_point(lower: [S; 2], upper: [S; 2]) -> Result<Self> {
        Self::new(
            SpaceKind::Planar { rotation: false },
            Vector3::new(lower[0], S::ZERO, lower[1]),
            Vector3::new(upper[0], S::ZERO, upper[1]),
            Vec::new(),
            Weights::default(),
        )
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn lower(&self) -> &Vector3<S> {
        &self.lower
    }

    pub fn upper(&self) -> &Vector3<S> {
        &self.upper
    }

    pub fn joint_limits(&self) -> &[(S, S)] {
        &self.joint_limits
    }

    pub fn weights(&self) -> &Weights<S> {
        &self.weights
    }

    pub fn joint_count(&self) -> usize {
        self.joint_limits.len()
    }

    /// Dimension of the configuration space; the exponent of the rewiring radius.
    pub fn dimension(&self) -> usize {
        match self.kind {
            SpaceKind::Spatial => 6 + self.joint_count(),
            SpaceKind::Planar { rotation } => 2 + usize::from(rotation) + self.joint_count(),
            SpaceKind::Band { points } => 3 * points,
        }
    }

    /// Lebesgue measure of the sampling domain under the metric's coordinates.
    pub fn measure(&self) -> S {
        let extent = self.upper - self.lower;
        let joints = self
            .joint_limits
            .iter()
            .fold(S::ONE, |acc, &(a, b)| acc * (b - a).max(S::lit(1e-3)));
        match self.kind {
            SpaceKind::Spatial => extent.x * extent.y * extent.z * S::PI() * S::PI() * joints,
            SpaceKind::Planar { rotation } => {
                let rot = if rotation { S::TAU() } else { S::ONE };
                extent.x * extent.z * rot * joints
            }
            SpaceKind::Band { points } => {
                let box_volume = extent.x * extent.y * extent.z;
                (0..points).fold(S::ONE, |acc, _| acc * box_volume)
            }
        }
    }

    pub fn same_variant(&self, x: &Configuration<S>) -> bool {
        match (self.kind, x) {
            (SpaceKind::Band { points }, Configuration::Band { points: p }) => p.len() == points,
            (SpaceKind::Band { .. }, _) | (_, Configuration::Band { .. }) => false,
            (_, Configuration::Articulated { alpha, .. }) => alpha.len() == self.joint_count(),
        }
    }

    /// Whether `x` lies inside the sampling bounds and joint limits.
    pub fn contains(&self, x: &Configuration<S>) -> bool {
        if !self.same_variant(x) {
            return false;
        }
        let in_box = |p: &Vector3<S>| match self.kind {
            SpaceKind::Planar { .. } => {
                p.x >= self.lower.x
                    && p.x <= self.upper.x
                    && p.z >= self.lower.z
                    && p.z <= self.upper.z
            }
            _ => (0..3).all(|i| p[i] >= self.lower[i] && p[i] <= self.upper[i]),
        };
        match x {
            Configuration::Articulated { r, alpha, .. } => {
                in_box(r)
                    && alpha
                        .iter()
                        .zip(&self.joint_limits)
                        .all(|(&a, &(lo, hi))| a >= lo && a <= hi)
            }
            Configuration::Band { points } => points.iter().all(in_box),
        }
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: S, hi: S) -> S {
        if hi <= lo {
            return lo;
        }
        let u: f64 = rng.random();
        let v = lo + (hi - lo) * S::lit(u);
        v.min(hi)
    }

    fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector3<S> {
        let x = Self::uniform(rng, self.lower.x, self.upper.x);
        let y = match self.kind {
            SpaceKind::Planar { .. } => S::ZERO,
            _ => Self::uniform(rng, self.lower.y, self.upper.y),
        };
        let z = Self::uniform(rng, self.lower.z, self.upper.z);
        Vector3::new(x, y, z)
    }

    /// Orientation drawn uniformly from the rotations this space allows.
    pub fn sample_orientation<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitQuaternion<S> {
        match self.kind {
            SpaceKind::Spatial => uniform_rotation(rng),
            SpaceKind::Planar { rotation: true } => {
                let angle = Self::uniform(rng, -S::PI(), S::PI());
                UnitQuaternion::from_axis_angle(&Vector3::y_axis(), angle)
            }
            _ => UnitQuaternion::identity(),
        }
    }

    /// Draws a configuration uniformly from the bounds.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration<S> {
        match self.kind {
            SpaceKind::Band { points } => {
                Configuration::band((0..points).map(|_| self.sample_position(rng)).collect())
            }
            _ => {
                let r = self.sample_position(rng);
                let q = self.sample_orientation(rng);
                let alpha = self
                    .joint_limits
                    .iter()
                    .map(|&(lo, hi)| Self::uniform(rng, lo, hi))
                    .collect();
                Configuration::articulated(r, q, alpha)
            }
        }
    }

    /// Point on the geodesic from `a` to `b` at fraction `t`.
    pub fn interpolate(
        &self,
        a: &Configuration<S>,
        b: &Configuration<S>,
        t: S,
    ) -> Result<Configuration<S>> {
        match (a, b) {
            (
                Configuration::Articulated {
                    r: ra,
                    q: qa,
                    alpha: aa,
                },
                Configuration::Articulated {
                    r: rb,
                    q: qb,
                    alpha: ab,
                },
            ) if aa.len() == ab.len() => {
                let s = S::ONE - t;
                let r = ra * s + rb * t;
                let q = slerp(qa, qb, t);
                let alpha = aa.iter().zip(ab).map(|(&x, &y)| x * s + y * t).collect();
                Ok(Configuration::articulated(r, q, alpha))
            }
            (Configuration::Band { points: pa }, Configuration::Band { points: pb })
                if pa.len() == pb.len() =>
            {
                let s = S::ONE - t;
                Ok(Configuration::band(
                    pa.iter().zip(pb).map(|(x, y)| x * s + y * t).collect(),
                ))
            }
            _ => Err(Error::usage(
                "interpolate: configurations belong to different spaces",
            )),
        }
    }

    /// Weighted metric: position norm, rotation angle and joint norm (band:
    /// root-sum-square of key-point displacements).
    pub fn distance(&self, a: &Configuration<S>, b: &Configuration<S>) -> Result<S> {
        match (a, b) {
            (
                Configuration::Articulated {
                    r: ra,
                    q: qa,
                    alpha: aa,
                },
                Configuration::Articulated {
                    r: rb,
                    q: qb,
                    alpha: ab,
                },
            ) if aa.len() == ab.len() => {
                let w = &self.weights;
                let dr = (ra - rb).norm();
                let dq = rotation_angle(qa, qb);
                let da = aa
                    .iter()
                    .zip(ab)
                    .fold(S::ZERO, |acc, (&x, &y)| acc + (x - y) * (x - y))
                    .sqrt();
                Ok(w.position * dr + w.rotation * dq + w.joint * da)
            }
            (Configuration::Band { points: pa }, Configuration::Band { points: pb })
                if pa.len() == pb.len() =>
            {
                Ok(pa
                    .iter()
                    .zip(pb)
                    .fold(S::ZERO, |acc, (x, y)| acc + (x - y).norm_squared())
                    .sqrt())
            }
            _ => Err(Error::usage(
                "distance: configurations belong to different spaces",
            )),
        }
    }

    /// Moves from `from` toward `to`, truncated at metric length `step`.
    pub fn steer(
        &self,
        from: &Configuration<S>,
        to: &Configuration<S>,
        step: S,
    ) -> Result<Configuration<S>> {
        let d = self.distance(from, to)?;
        if d <= step {
            Ok(to.clone())
        } else {
            self.interpolate(from, to, step / d)
        }
    }
}

/// Shoemake's construction of a uniformly distributed rotation.
pub fn uniform_rotation<S: Real, R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<S> {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let u3: f64 = rng.random();
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(
        S::lit(b * (tau * u3).cos()),
        S::lit(a * (tau * u2).sin()),
        S::lit(a * (tau * u2).cos()),
        S::lit(b * (tau * u3).sin()),
    );
    UnitQuaternion::new_normalize(q)
}

/// Angle of the relative rotation, in `[0, pi]`; zero for `q` and `-q`.
pub fn rotation_angle<S: Real>(a: &UnitQuaternion<S>, b: &UnitQuaternion<S>) -> S {
    let (ca, cb) = (a.as_ref().coords, b.as_ref().coords);
    let sign = if ca.dot(&cb) < S::ZERO {
        -S::ONE
    } else {
        S::ONE
    };
    let diff = (ca - cb * sign).norm();
    let sum = (ca + cb * sign).norm();
    S::lit(2.0) * diff.atan2(sum)
}

/// Shortest-arc spherical interpolation.
pub fn slerp<S: Real>(a: &UnitQuaternion<S>, b: &UnitQuaternion<S>, t: S) -> UnitQuaternion<S> {
    let ca = a.as_ref().coords;
    let mut cb = b.as_ref().coords;
    let mut dot = ca.dot(&cb);
    if dot < S::ZERO {
        cb = -cb;
        dot = -dot;
    }
    let coords = if dot > S::lit(0.9995) {
        ca * (S::ONE - t) + cb * t
    } else {
        let theta = dot.min(S::ONE).acos();
        let sin = theta.sin();
        ca * (((S::ONE - t) * theta).sin() / sin) + cb * ((t * theta).sin() / sin)
    };
    UnitQuaternion::new_normalize(Quaternion::from(coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> SpaceDescriptor<f64> {
        SpaceDescriptor::planar_point([0.0, 0.0], [1.0, 1.0]).unwrap()
    }

    fn spatial(joints: Vec<(f64, f64)>) -> SpaceDescriptor<f64> {
        SpaceDescriptor::new(
            SpaceKind::Spatial,
            Vector3::new(-1.0, -1.0, -1.0),
            Vector3::new(1.0, 1.0, 1.0),
            joints,
            Weights::default(),
        )
        .unwrap()
    }

    #[test]
    fn two_draws_differ_and_stay_in_bounds() {
        let space = spatial(vec![(-1.0, 1.0)]);
        let mut rng = stream(42);
        let a = space.sample_uniform(&mut rng);
        let b = space.sample_uniform(&mut rng);
        assert_ne!(a, b);
        assert!(space.contains(&a) && space.contains(&b));
    }

    #[test]
    fn zero_range_joint_is_pinned() {
        let space = spatial(vec![(0.3, 0.3)]);
        let mut rng = stream(1);
        for _ in 0..100 {
            assert_eq!(space.sample_uniform(&mut rng).joints(), &[0.3]);
        }
    }

    #[test]
    fn planar_mean_is_center_of_box() {
        let space = unit_square();
        let mut rng = stream(7);
        let n = 10_000;
        let mut sum = Vector3::zeros();
        for _ in 0..n {
            sum += space.sample_uniform(&mut rng).position();
        }
        let mean = sum / n as f64;
        assert!((mean.x - 0.5).abs() < 0.05 && (mean.z - 0.5).abs() < 0.05);
        assert_eq!(mean.y, 0.0);
    }

    #[test]
    fn joint_limits_never_violated() {
        let space = spatial(vec![(-0.5, 0.25), (0.0, 3.0), (-3.0, -2.9)]);
        let mut rng = stream(3);
        let violations = (0..100_000)
            .filter(|_| !space.contains(&space.sample_uniform(&mut rng)))
            .count();
        assert_eq!(violations, 0);
    }

    #[test]
    fn interpolation_endpoints_and_midpoints() {
        let space = unit_square();
        let a = Configuration::point(Vector3::new(0.0, 0.0, 0.0));
        let b = Configuration::point(Vector3::new(2.0, 0.0, 0.0));
        assert_eq!(space.interpolate(&a, &b, 0.0).unwrap(), a);
        assert_eq!(space.interpolate(&a, &b, 1.0).unwrap(), b);
        let m = space.interpolate(&a, &b, 0.25).unwrap();
        assert_eq!(m.position(), Vector3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn mismatched_variants_are_usage_errors() {
        let space = unit_square();
        let a = Configuration::point(Vector3::zeros());
        let b = Configuration::band(vec![Vector3::zeros(); 3]);
        assert!(matches!(space.distance(&a, &b), Err(Error::Usage(_))));
        assert!(matches!(
            space.interpolate(&a, &b, 0.5),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn antipodal_quaternions_are_the_same_rotation() {
        let space = spatial(vec![(-1.0, 1.0)]);
        let q = UnitQuaternion::from_euler_angles(0.3, -1.2, 2.0);
        let neg = UnitQuaternion::new_unchecked(-q.into_inner());
        let r = Vector3::new(0.1, 0.2, 0.3);
        let a = Configuration::articulated(r, q, vec![0.4]);
        let b = Configuration::articulated(r, neg, vec![0.4]);
        assert_eq!(space.distance(&a, &b).unwrap(), 0.0);
        assert_eq!(space.distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn slerp_takes_shortest_arc_and_stays_unit() {
        let a = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.1_f64);
        let b = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.5);
        let far = UnitQuaternion::new_unchecked(-b.into_inner());
        let m = slerp(&a, &far, 0.5);
        assert!(
            (rotation_angle(
                &m,
                &UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.3)
            ))
            .abs()
                < 1e-12
        );
        assert!((m.as_ref().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn steering_truncates_at_step() {
        let space = unit_square();
        let a = Configuration::point(Vector3::new(0.0, 0.0, 0.0));
        let b = Configuration::point(Vector3::new(1.0, 0.0, 1.0));
        let s = space.steer(&a, &b, 0.1).unwrap();
        assert!((space.distance(&a, &s).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(space.steer(&a, &b, 5.0).unwrap(), b);
    }

    #[test]
    fn dimension_matches_radius_exponent() {
        assert_eq!(spatial(vec![(-1.0, 1.0); 2]).dimension(), 8);
        assert_eq!(unit_square().dimension(), 2);
        let band = SpaceDescriptor::<f64>::new(
            SpaceKind::Band { points: 4 },
            Vector3::new(-1.0, -1.0, -1.0),
            Vector3::new(1.0, 1.0, 1.0),
            vec![],
            Weights::default(),
        )
        .unwrap();
        assert_eq!(band.dimension(), 12);
    }

    #[test]
    fn invalid_descriptors_are_rejected() {
        let flat = SpaceDescriptor::<f64>::new(
            SpaceKind::Spatial,
            Vector3::zeros(),
            Vector3::new(1.0, 0.0, 1.0),
            vec![],
            Weights::default(),
        );
        assert!(flat.is_err());
        let weights = Weights {
            rotation: 0.0,
            ..Weights::default()
        };
        assert!(SpaceDescriptor::<f64>::new(
            SpaceKind::Spatial,
            Vector3::zeros(),
            Vector3::new(1.0, 1.0, 1.0),
            vec![],
            weights
        )
        .is_err());
        assert!(SpaceDescriptor::<f64>::new(
            SpaceKind::Band { points: 2 },
            Vector3::zeros(),
            Vector3::new(1.0, 1.0, 1.0),
            vec![],
            Weights::default()
        )
        .is_err());
    }
}
