use nalgebra::Vector3;

use crate::cspace::{Configuration, SpaceDescriptor, SpaceKind};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::world::{ObjectModel, Shape};

/// Escape target: a workspace box below the obstacles, reached with relaxed joints
/// (articulated) or a slack band (all key points inside the box).
#[derive(Clone, Debug, PartialEq)]
pub struct GoalSpec<S: Real> {
    pub lower: Vector3<S>,
    pub upper: Vector3<S>,
    /// Maximum `|alpha_i|` in radians for articulated goals.
    pub joint_tolerance: S,
    /// Maximum elastic energy in joules for band goals.
    pub energy_tolerance: S,
}

impl<S: Real> GoalSpec<S> {
    pub fn new(lower: Vector3<S>, upper: Vector3<S>) -> Self {
        GoalSpec {
            lower,
            upper,
            joint_tolerance: S::ZERO,
            energy_tolerance: S::ZERO,
        }
    }

    fn validate(&self, planar: bool) -> Result<()> {
        let axes: &[usize] = if planar { &[0, 2] } else { &[0, 1, 2] };
        if axes.iter().any(|&i| !(self.lower[i] <= self.upper[i])) {
            return Err(Error::scene("goal", "goal box must be nonempty"));
        }
        if !(self.joint_tolerance >= S::ZERO) {
            return Err(Error::scene("goal.joint_tolerance", "must be >= 0"));
        }
        if !(self.energy_tolerance >= S::ZERO) {
            return Err(Error::scene("goal.energy_tolerance", "must be >= 0"));
        }
        Ok(())
    }

    /// Whether `p` lies in the box; planar scenes ignore the `y` axis.
    pub fn contains_point(&self, p: &Vector3<S>, planar: bool) -> bool {
        (0..3)
            .filter(|&i| !(planar && i == 1))
            .all(|i| p[i] >= self.lower[i] && p[i] <= self.upper[i])
    }

    /// Goal membership. Orientation is arbitrary; articulated goals require
    /// `||alpha||_inf <= joint_tolerance`, band goals require elastic energy at most
    /// `energy_tolerance`.
    pub fn contains(&self, x: &Configuration<S>, energy: &EnergyModel<S>, planar: bool) -> bool {
        match x {
            Configuration::Articulated { r, alpha, .. } => {
                self.contains_point(r, planar)
                    && alpha.iter().all(|a| a.abs() <= self.joint_tolerance)
            }
            Configuration::Band { points } => {
                points.iter().all(|p| self.contains_point(p, planar))
                    && energy
                        .elastic(x)
                        .is_some_and(|e| e <= self.energy_tolerance)
            }
        }
    }
}

/// Energy ceiling for validity checks: `E(x) - reference <= margin`.
///
/// Comparing against the reference instead of an absolute ceiling keeps a path
/// certified at cost `C` valid under margin `C` without rounding slop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sublevel<S: Real> {
    pub reference: S,
    pub margin: S,
}

impl<S: Real> Sublevel<S> {
    /// No energy constraint; only collisions invalidate.
    pub fn unbounded() -> Self {
        Sublevel {
            reference: S::ZERO,
            margin: S::INFINITY,
        }
    }

    pub fn absolute(ceiling: S) -> Self {
        Sublevel {
            reference: S::ZERO,
            margin: ceiling,
        }
    }

    pub fn above(reference: S, margin: S) -> Self {
        Sublevel { reference, margin }
    }

    pub fn admits(&self, energy: S) -> bool {
        energy.is_finite_value()
            && (!self.margin.is_finite_value() || energy - self.reference <= self.margin)
    }
}

/// Everything needed to build a [`Scene`]; validated by [`Scene::new`].
#[derive(Clone, Debug)]
pub struct SceneSpec<S: Real> {
    pub space: SpaceDescriptor<S>,
    pub object: ObjectModel<S>,
    pub obstacles: Vec<Shape<S>>,
    /// Gravitational acceleration in m/s^2, acting along `-z`.
    pub gravity: S,
    pub init: Configuration<S>,
    pub goal: GoalSpec<S>,
    /// Edge-check resolution in metric units; defaults to half the smallest
    /// obstacle feature.
    pub check_resolution: Option<S>,
}

#[derive(Clone, Debug)]
pub struct Scene<S: Real> {
    space: SpaceDescriptor<S>,
    object: ObjectModel<S>,
    obstacles: Vec<Shape<S>>,
    obstacle_boxes: Vec<(Vector3<S>, Vector3<S>)>,
    gravity: S,
    init: Configuration<S>,
    goal: GoalSpec<S>,
    check_resolution: S,
    energy: EnergyModel<S>,
}

impl<S: Real> Scene<S> {
    pub fn new(spec: SceneSpec<S>) -> Result<Self> {
        let SceneSpec {
            space,
            object,
            obstacles,
            gravity,
            init,
            goal,
            check_resolution,
        } = spec;
        object.validate()?;
        for (i, o) in obstacles.iter().enumerate() {
            o.validate(&format!("obstacles[{i}]"))?;
        }
        if !(gravity >= S::ZERO && gravity.is_finite_value()) {
            return Err(Error::scene("gravity", "gravity must be finite and >= 0"));
        }
        let planar = matches!(space.kind(), SpaceKind::Planar { .. });
        goal.validate(planar)?;

        match (&object, space.kind()) {
            (ObjectModel::Band(band), SpaceKind::Band { points }) if band.points == points => {}
            (ObjectModel::Band(_), _) | (_, SpaceKind::Band { .. }) => {
                return Err(Error::scene(
                    "space.type",
                    "space and object variants disagree",
                ));
            }
            (ObjectModel::Articulated { joints, .. }, _) => {
                let limits: Vec<(S, S)> = joints.iter().map(|j| (j.lower, j.upper)).collect();
                if limits != space.joint_limits() {
                    return Err(Error::scene(
                        "space.joint_limits",
                        "must equal the object's joint limits",
                    ));
                }
            }
        }

        let obstacle_boxes: Vec<_> = obstacles.iter().map(Shape::aabb).collect();
        for (i, (lo, hi)) in obstacle_boxes.iter().enumerate() {
            let overlap = (0..3)
                .filter(|&a| !(planar && a == 1))
                .all(|a| goal.lower[a] < hi[a] && lo[a] < goal.upper[a]);
            if overlap {
                return Err(Error::scene(
                    "goal",
                    format!("goal box overlaps the bounding box of obstacles[{i}]"),
                ));
            }
        }

        let check_resolution = match check_resolution {
            Some(r) if r > S::ZERO && r.is_finite_value() => r,
            Some(_) => return Err(Error::scene("space.check_resolution", "must be positive")),
            None => {
                let smallest = obstacles
                    .iter()
                    .map(Shape::feature_size)
                    .fold(S::INFINITY, |a, b| a.min(b));
                if smallest.is_finite_value() {
                    smallest * S::HALF
                } else {
                    S::lit(0.05)
                }
            }
        };

        let energy = EnergyModel::for_object(&object, gravity);
        let scene = Scene {
            space,
            object,
            obstacles,
            obstacle_boxes,
            gravity,
            init: init.clone(),
            goal,
            check_resolution,
            energy,
        };
        scene.validate_init(&init)?;
        Ok(scene)
    }

    fn validate_init(&self, init: &Configuration<S>) -> Result<()> {
        if !self.space.same_variant(init) {
            return Err(Error::scene(
                "init",
                "configuration does not match the space",
            ));
        }
        if let Configuration::Articulated { alpha, .. } = init {
            for (i, (&a, &(lo, hi))) in alpha.iter().zip(self.space.joint_limits()).enumerate() {
                if a < lo || a > hi {
                    return Err(Error::scene(
                        format!("init.alpha[{i}]"),
                        "joint angle outside its limits",
                    ));
                }
            }
        }
        if let Some(i) = self.first_collision(init) {
            return Err(Error::scene(
                "init",
                format!("initial configuration collides with obstacles[{i}]"),
            ));
        }
        Ok(())
    }

    /// Same scene with a different initial configuration (one frame of a sequence).
    pub fn with_init(&self, init: Configuration<S>) -> Result<Self> {
        self.validate_init(&init)?;
        let mut scene = self.clone();
        scene.init = init;
        Ok(scene)
    }

    pub fn space(&self) -> &SpaceDescriptor<S> {
        &self.space
    }

    pub fn object(&self) -> &ObjectModel<S> {
        &self.object
    }

    pub fn obstacles(&self) -> &[Shape<S>] {
        &self.obstacles
    }

    pub fn gravity(&self) -> S {
        self.gravity
    }

    pub fn init(&self) -> &Configuration<S> {
        &self.init
    }

    pub fn goal(&self) -> &GoalSpec<S> {
        &self.goal
    }

    pub fn check_resolution(&self) -> S {
        self.check_resolution
    }

    pub fn energy_model(&self) -> &EnergyModel<S> {
        &self.energy
    }

    pub fn is_planar(&self) -> bool {
        matches!(self.space.kind(), SpaceKind::Planar { .. })
    }

    /// Shape-pair tests one configuration check performs at most.
    pub fn pair_count(&self) -> usize {
        self.object.shape_count() * self.obstacles.len()
    }

    fn first_collision(&self, x: &Configuration<S>) -> Option<usize> {
        let shapes = match self.object.world_shapes(x) {
            Ok(s) => s,
            Err(_) => return Some(usize::MAX),
        };
        for shape in &shapes {
            let (lo, hi) = shape.aabb();
            for (i, (obstacle, (olo, ohi))) in
                self.obstacles.iter().zip(&self.obstacle_boxes).enumerate()
            {
                let disjoint = (0..3).any(|a| hi[a] <= olo[a] || ohi[a] <= lo[a]);
                if !disjoint && shape.intersects(obstacle) {
                    return Some(i);
                }
            }
        }
        None
    }

    /// Whether any object primitive penetrates any obstacle.
    pub fn in_collision(&self, x: &Configuration<S>) -> bool {
        self.first_collision(x).is_some()
    }

    /// Energy at `x`, infinite in collision.
    pub fn energy(&self, x: &Configuration<S>) -> S {
        crate::energy::potential_energy(&self.energy, self, x)
    }

    pub fn in_goal(&self, x: &Configuration<S>) -> bool {
        self.goal.contains(x, &self.energy, self.is_planar())
    }

    /// Number of segments the edge `a -> b` is split into for validation.
    pub fn edge_steps(&self, a: &Configuration<S>, b: &Configuration<S>) -> Result<usize> {
        let d = self.space.distance(a, b)?;
        // The slack keeps an already densified edge at one step despite rounding.
        let ratio = d / self.check_resolution * (S::ONE - S::lit(1e-9));
        let steps = ratio.ceil().to_usize().unwrap_or(usize::MAX);
        Ok(steps.max(1))
    }

    /// Validates the straight edge at the scene's resolution and reports the
    /// highest energy seen, or `None` if some state collides or leaves the
    /// sublevel set. `evaluated` is incremented once per state checked.
    pub fn check_motion(
        &self,
        a: &Configuration<S>,
        b: &Configuration<S>,
        sublevel: &Sublevel<S>,
        include_start: bool,
        evaluated: &mut u64,
    ) -> Option<S> {
        let steps = self.edge_steps(a, b).ok()?;
        let mut highest = -S::INFINITY;
        let n = S::from_usize(steps)?;
        let first = if include_start { 0 } else { 1 };
        for i in first..=steps {
            let x = if i == 0 {
                a.clone()
            } else if i == steps {
                b.clone()
            } else {
                self.space.interpolate(a, b, S::from_usize(i)? / n).ok()?
            };
            *evaluated += 1;
            let e = self.energy(&x);
            if !sublevel.admits(e) {
                return None;
            }
            highest = highest.max(e);
        }
        Some(highest)
    }

    /// Every state on the densified edge is collision-free and inside `sublevel`.
    pub fn motion_valid(
        &self,
        a: &Configuration<S>,
        b: &Configuration<S>,
        sublevel: &Sublevel<S>,
    ) -> bool {
        let mut count = 0;
        self.check_motion(a, b, sublevel, true, &mut count)
            .is_some()
    }

    /// States along the edge at the validation resolution, endpoints included.
    pub fn densify(
        &self,
        a: &Configuration<S>,
        b: &Configuration<S>,
    ) -> Result<Vec<Configuration<S>>> {
        let steps = self.edge_steps(a, b)?;
        let n = S::from_usize(steps).unwrap_or(S::ONE);
        let mut out = Vec::with_capacity(steps + 1);
        out.push(a.clone());
        for i in 1..steps {
            out.push(
                self.space
                    .interpolate(a, b, S::from_usize(i).unwrap_or(S::ZERO) / n)?,
            );
        }
        out.push(b.clone());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspace::Weights;
    use crate::world::Band;
    use nalgebra::UnitQuaternion;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn point_scene(obstacles: Vec<Shape<f64>>, init: Vector3<f64>) -> Result<Scene<f64>> {
        Scene::new(SceneSpec {
            space: SpaceDescriptor::planar_point([-2.0, -2.0], [2.0, 2.0])?,
            object: ObjectModel::point_mass(1.0, 0.1),
            obstacles,
            gravity: 9.81,
            init: Configuration::point(init),
            goal: GoalSpec::new(v(1.5, -1.0, -2.0), v(2.0, 1.0, -1.5)),
            check_resolution: Some(0.01),
        })
    }

    #[test]
    fn sphere_link_against_sphere_obstacle() {
        let scene =
            point_scene(vec![Shape::sphere(v(0.0, 0.0, 0.0), 0.1)], v(0.5, 0.0, 0.0)).unwrap();
        assert!(scene.in_collision(&Configuration::point(v(0.15, 0.0, 0.0))));
        assert!(!scene.in_collision(&Configuration::point(v(0.25, 0.0, 0.0))));
    }

    #[test]
    fn band_segment_through_box_collides() {
        let band = ObjectModel::band(Band {
            points: 3,
            radius: 0.01,
            stiffness: vec![10.0; 3],
            rest_length: 1.0,
        })
        .unwrap();
        let space = SpaceDescriptor::new(
            SpaceKind::Band { points: 3 },
            v(-2.0, -2.0, -2.0),
            v(2.0, 2.0, 2.0),
            vec![],
            Weights::default(),
        )
        .unwrap();
        let clear = Configuration::band(vec![v(1.0, 1.0, 0.0), v(1.5, 1.0, 0.0), v(1.2, 1.5, 0.0)]);
        let scene = Scene::new(SceneSpec {
            space,
            object: band,
            obstacles: vec![Shape::cuboid(
                v(0.0, 0.0, 0.0),
                UnitQuaternion::identity(),
                v(0.2, 0.2, 0.2),
            )],
            gravity: 9.81,
            init: clear,
            goal: GoalSpec::new(v(1.0, 1.0, -2.0), v(2.0, 2.0, -1.0)),
            check_resolution: None,
        })
        .unwrap();
        let through =
            Configuration::band(vec![v(-1.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)]);
        assert!(scene.in_collision(&through));
    }

    #[test]
    fn edge_through_obstacle_is_invalid() {
        let scene = point_scene(
            vec![Shape::sphere(v(0.0, 0.0, 0.0), 0.2)],
            v(-1.0, 0.0, 0.0),
        )
        .unwrap();
        let a = Configuration::point(v(-1.0, 0.0, 0.0));
        let b = Configuration::point(v(1.0, 0.0, 0.0));
        assert!(scene.motion_valid(&a, &a, &Sublevel::unbounded()));
        assert!(!scene.motion_valid(&a, &b, &Sublevel::unbounded()));
    }

    #[test]
    fn midpoint_above_sublevel_is_invalid() {
        let scene = point_scene(vec![], v(-1.0, 0.0, 0.0)).unwrap();
        // Endpoints at z = 0, midpoint of the detour at z = 0.5.
        let a = Configuration::point(v(-1.0, 0.0, 0.0));
        let top = Configuration::point(v(0.0, 0.0, 0.5));
        let ceiling = Sublevel::absolute(9.81 * 0.3);
        assert!(scene.motion_valid(&a, &a, &ceiling));
        assert!(!scene.motion_valid(&a, &top, &ceiling));
        assert!(scene.motion_valid(&a, &top, &Sublevel::absolute(9.81 * 0.5 + 1e-9)));
    }

    #[test]
    fn goal_membership() {
        let scene = point_scene(vec![], v(0.0, 0.0, 0.0)).unwrap();
        assert!(scene.in_goal(&Configuration::point(v(1.75, 0.0, -1.75))));
        assert!(!scene.in_goal(&Configuration::point(v(0.0, 0.0, -1.75))));
        let goal = GoalSpec {
            joint_tolerance: 0.1,
            ..GoalSpec::new(v(-1.0, -1.0, -1.0), v(1.0, 1.0, 1.0))
        };
        let model = EnergyModel::GravityElastic { gravity: 9.81 };
        let ok =
            Configuration::articulated(v(0.0, 0.0, 0.0), UnitQuaternion::identity(), vec![0.1]);
        let bent =
            Configuration::articulated(v(0.0, 0.0, 0.0), UnitQuaternion::identity(), vec![0.11]);
        assert!(goal.contains(&ok, &model, false));
        assert!(!goal.contains(&bent, &model, false));
    }

    #[test]
    fn scene_invariants_are_enforced() {
        let colliding = point_scene(vec![Shape::sphere(v(0.0, 0.0, 0.0), 0.2)], v(0.0, 0.0, 0.0));
        assert!(matches!(colliding, Err(Error::Scene { field, .. }) if field == "init"));
        let over_goal = point_scene(
            vec![Shape::sphere(v(1.7, 0.0, -1.7), 0.1)],
            v(0.0, 0.0, 0.0),
        );
        assert!(matches!(over_goal, Err(Error::Scene { field, .. }) if field == "goal"));
    }

    #[test]
    fn motion_validity_is_symmetric() {
        use crate::cspace::stream;
        let scene = point_scene(
            vec![
                Shape::sphere(v(0.0, 0.0, 0.0), 0.4),
                Shape::capsule(v(-1.0, 0.0, 1.0), v(1.0, 0.0, 1.2), 0.1),
            ],
            v(-1.5, 0.0, 0.0),
        )
        .unwrap();
        let mut rng = stream(5);
        let ceiling = Sublevel::absolute(9.81);
        for _ in 0..500 {
            let a = scene.space().sample_uniform(&mut rng);
            let b = scene.space().sample_uniform(&mut rng);
            assert_eq!(
                scene.motion_valid(&a, &b, &ceiling),
                scene.motion_valid(&b, &a, &ceiling)
            );
        }
    }
}
