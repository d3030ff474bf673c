//! Sublevel-constrained RRT and the energy-biased RRT* with hybrid cost.

pub mod cost;
mod rrt;
mod rrt_star;

use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;

pub use cost::{combine_energy_cost, hybrid_cost, optimal_gamma_rrt, rewire_radius};
pub use rrt::{rrt_search, RrtOutcome};
pub use rrt_star::{optimal_search, AnytimeRecord, OptimalRun, SearchTree};

use crate::clock::{Clock, ClockMode, PAIRS_PER_UNIT, STATE_CHECK_BASE_UNITS};
use crate::cspace::{uniform_rotation, Configuration, SpaceDescriptor, SpaceKind};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::world::{ObjectModel, Scene};

/// A scene together with the energy of its initial configuration.
#[derive(Clone, Debug)]
pub struct PlanningProblem<S: Real> {
    scene: Scene<S>,
    e_init: S,
}

impl<S: Real> PlanningProblem<S> {
    pub fn new(scene: Scene<S>) -> Result<Self> {
        let e_init = scene.energy(scene.init());
        if !e_init.is_finite_value() {
            return Err(Error::scene(
                "init",
                "initial configuration is in collision",
            ));
        }
        Ok(PlanningProblem { scene, e_init })
    }

    pub fn scene(&self) -> &Scene<S> {
        &self.scene
    }

    pub fn e_init(&self) -> S {
        self.e_init
    }

    pub fn x_init(&self) -> &Configuration<S> {
        self.scene.init()
    }

    pub fn space(&self) -> &SpaceDescriptor<S> {
        self.scene.space()
    }

    /// Work units for one configuration check.
    pub(crate) fn state_units(&self) -> u64 {
        STATE_CHECK_BASE_UNITS + (self.scene.pair_count() / PAIRS_PER_UNIT) as u64
    }

    /// Work units for one metric evaluation.
    pub(crate) fn distance_units(&self) -> u64 {
        1
    }

    /// Draws a configuration from the goal region.
    pub(crate) fn sample_goal<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration<S> {
        let scene = &self.scene;
        let space = scene.space();
        let goal = scene.goal();
        let lo = goal.lower.sup(space.lower());
        let hi = goal.upper.inf(space.upper());
        let planar = scene.is_planar();
        let point = |rng: &mut R| {
            let mut p = Vector3::zeros();
            for i in 0..3 {
                if planar && i == 1 {
                    continue;
                }
                p[i] = uniform(rng, lo[i], hi[i]);
            }
            p
        };
        match scene.object() {
            ObjectModel::Band(band) => {
                // Regular polygon with sides no longer than the rest length, so the
                // band is slack and carries no elastic energy.
                let n = band.points;
                let u: f64 = rng.random_range(0.3..1.0);
                let side = band.rest_length * S::lit(u);
                let rho = side / (S::lit(2.0) * (S::PI() / S::lit(n as f64)).sin());
                let rot: UnitQuaternion<S> = uniform_rotation(rng);
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let offsets: Vec<Vector3<S>> = (0..n)
                    .map(|k| {
                        let th = S::lit(phase + std::f64::consts::TAU * k as f64 / n as f64);
                        rot * Vector3::new(rho * th.cos(), rho * th.sin(), S::ZERO)
                    })
                    .collect();
                let mut center = point(rng);
                // Shift the polygon inside the box where it fits.
                for i in 0..3 {
                    let min = offsets
                        .iter()
                        .map(|o| o[i])
                        .fold(S::INFINITY, |a, b| a.min(b));
                    let max = offsets
                        .iter()
                        .map(|o| o[i])
                        .fold(-S::INFINITY, |a, b| a.max(b));
                    if hi[i] - lo[i] >= max - min {
                        center[i] = center[i].max(lo[i] - min).min(hi[i] - max);
                    }
                }
                // Clamping only absorbs rounding at the box faces.
                Configuration::band(
                    offsets
                        .iter()
                        .map(|o| (center + o).sup(&lo).inf(&hi))
                        .collect(),
                )
            }
            ObjectModel::Articulated { .. } => {
                let r = point(rng);
                let q = space.sample_orientation(rng);
                let tol = goal.joint_tolerance;
                let alpha = space
                    .joint_limits()
                    .iter()
                    .map(|&(a, b)| uniform(rng, a.max(-tol), b.min(tol)))
                    .collect();
                Configuration::articulated(r, q, alpha)
            }
        }
    }

    /// Goal-biased sample from the configuration space.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R, goal_bias: f64) -> Configuration<S> {
        let u: f64 = rng.random();
        if u < goal_bias {
            self.sample_goal(rng)
        } else {
            self.space().sample_uniform(rng)
        }
    }
}

fn uniform<S: Real, R: Rng + ?Sized>(rng: &mut R, lo: S, hi: S) -> S {
    if hi <= lo {
        return lo;
    }
    let u: f64 = rng.random();
    (lo + (hi - lo) * S::lit(u)).min(hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerParams<S: Real> {
    /// Steering step in metric units.
    pub step_size: S,
    /// Probability of sampling the goal region.
    pub goal_bias: f64,
    pub max_nodes: usize,
    /// Budget in clock seconds.
    pub time_budget: f64,
    pub gamma_rrt: S,
    /// Upper bound on the rewiring radius in metric units.
    pub radius_cap: S,
    /// Weight of path length in the hybrid cost.
    pub gamma: S,
    pub seed: u64,
    pub clock: ClockMode,
    /// Reject RRT* vertices whose energy alone already reaches the best goal
    /// cost; such vertices cannot lie on a cheaper path.
    pub prune: bool,
}

impl<S: Real> PlannerParams<S> {
    /// Defaults scaled to the sampling bounds of `space`.
    pub fn for_space(space: &SpaceDescriptor<S>) -> Self {
        let extent = space.upper() - space.lower();
        let reach = match space.kind() {
            SpaceKind::Planar { .. } => extent.x.min(extent.z),
            _ => extent.x.min(extent.y).min(extent.z),
        };
        let step = reach * S::lit(0.1);
        PlannerParams {
            step_size: step,
            goal_bias: 0.05,
            max_nodes: 200_000,
            time_budget: 10.0,
            gamma_rrt: optimal_gamma_rrt(space),
            radius_cap: step * S::lit(2.0),
            gamma: S::ZERO,
            seed: 0,
            clock: ClockMode::default(),
            prune: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > S::ZERO && self.step_size.is_finite_value()) {
            return Err(Error::usage("step size must be > 0"));
        }
        if !(0.0..1.0).contains(&self.goal_bias) {
            return Err(Error::usage("goal bias must lie in [0, 1)"));
        }
        if !(self.gamma_rrt > S::ZERO) {
            return Err(Error::usage("gamma_rrt must be > 0"));
        }
        if !(self.radius_cap > S::ZERO) {
            return Err(Error::usage("radius cap must be > 0"));
        }
        if !(self.gamma >= S::ZERO && self.gamma.is_finite_value()) {
            return Err(Error::usage("cost mixture gamma must be >= 0"));
        }
        if !(self.time_budget > 0.0) {
            return Err(Error::usage("time budget must be > 0"));
        }
        if self.max_nodes == 0 {
            return Err(Error::usage("max nodes must be >= 1"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        PlannerParams {
            seed,
            ..self.clone()
        }
    }

    pub fn with_budget(&self, time_budget: f64) -> Self {
        PlannerParams {
            time_budget,
            ..self.clone()
        }
    }

    pub(crate) fn clock(&self) -> Clock {
        Clock::new(self.clock)
    }
}
