//! Potential energy of configurations and the energy cost of paths.

use crate::cspace::Configuration;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::world::{ObjectModel, Scene};

#[derive(Clone, Debug, PartialEq)]
pub enum EnergyModel<S: Real> {
    /// Gravity on every link mass plus torsion springs on every joint.
    GravityElastic { gravity: S },
    /// Tension-only springs between consecutive key points of a closed band.
    BandElastic { stiffness: Vec<S>, rest_length: S },
}

impl<S: Real> EnergyModel<S> {
    pub fn for_object(object: &ObjectModel<S>, gravity: S) -> Self {
        match object {
            ObjectModel::Articulated { .. } => EnergyModel::GravityElastic { gravity },
            ObjectModel::Band(band) => EnergyModel::BandElastic {
                stiffness: band.stiffness.clone(),
                rest_length: band.rest_length,
            },
        }
    }

    /// Band spring energy, ignoring collisions. `None` for non-band inputs.
    pub fn elastic(&self, x: &Configuration<S>) -> Option<S> {
        match (self, x) {
            (
                EnergyModel::BandElastic {
                    stiffness,
                    rest_length,
                },
                Configuration::Band { points },
            ) if points.len() == stiffness.len() => {
                Some(band_energy(points, stiffness, *rest_length))
            }
            _ => None,
        }
    }

    /// Energy ignoring collisions; `None` when model and configuration disagree.
    pub fn evaluate_free(&self, object: &ObjectModel<S>, x: &Configuration<S>) -> Option<S> {
        match self {
            EnergyModel::BandElastic { .. } => self.elastic(x),
            EnergyModel::GravityElastic { gravity } => {
                let ObjectModel::Articulated { links, joints } = object else {
                    return None;
                };
                let poses = object.forward_kinematics(x).ok()?;
                let potential = links.iter().zip(&poses).fold(S::ZERO, |acc, (link, pose)| {
                    acc + link.mass * *gravity * pose.com.z
                });
                let springs = joints
                    .iter()
                    .zip(x.joints())
                    .fold(S::ZERO, |acc, (joint, &a)| {
                        acc + S::HALF * joint.stiffness * a * a
                    });
                Some(potential + springs)
            }
        }
    }
}

fn band_energy<S: Real>(points: &[nalgebra::Vector3<S>], stiffness: &[S], rest: S) -> S {
    let n = points.len();
    (0..n).fold(S::ZERO, |acc, i| {
        let gap = (points[i] - points[(i + n - 1) % n]).norm();
        let stretch = (gap - rest).max(S::ZERO);
        acc + S::HALF * stiffness[i] * stretch * stretch
    })
}

/// Potential energy in joules; `+inf` when `x` collides.
pub fn potential_energy<S: Real>(
    model: &EnergyModel<S>,
    scene: &Scene<S>,
    x: &Configuration<S>,
) -> S {
    if scene.in_collision(x) {
        return S::INFINITY;
    }
    model
        .evaluate_free(scene.object(), x)
        .unwrap_or(S::INFINITY)
}

/// A path with its per-waypoint energies and its energy cost
/// `max(energies) - energies[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCandidate<S: Real> {
    waypoints: Vec<Configuration<S>>,
    energies: Vec<S>,
    cost: S,
}

impl<S: Real> PathCandidate<S> {
    pub fn new(waypoints: Vec<Configuration<S>>, energies: Vec<S>) -> Result<Self> {
        if waypoints.is_empty() || waypoints.len() != energies.len() {
            return Err(Error::usage(
                "a path needs one energy per waypoint and at least one waypoint",
            ));
        }
        if let Some(i) = energies.iter().position(|e| !e.is_finite_value()) {
            return Err(Error::InfeasiblePath(format!(
                "waypoint {i} is in collision"
            )));
        }
        let highest = energies.iter().fold(energies[0], |a, &b| a.max(b));
        let cost = highest - energies[0];
        Ok(PathCandidate {
            waypoints,
            energies,
            cost,
        })
    }

    pub fn waypoints(&self) -> &[Configuration<S>] {
        &self.waypoints
    }

    pub fn energies(&self) -> &[S] {
        &self.energies
    }

    /// Energy cost in joules.
    pub fn cost(&self) -> S {
        self.cost
    }

    pub fn start_energy(&self) -> S {
        self.energies[0]
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }
}

/// Energy cost of the piecewise-geodesic path through `waypoints`, evaluated on
/// the densification the scene validates edges at.
pub fn path_energy_cost<S: Real>(
    model: &EnergyModel<S>,
    scene: &Scene<S>,
    waypoints: &[Configuration<S>],
) -> Result<PathCandidate<S>> {
    let Some(first) = waypoints.first() else {
        return Err(Error::usage("path has no waypoints"));
    };
    let mut dense = vec![first.clone()];
    for pair in waypoints.windows(2) {
        let edge = scene.densify(&pair[0], &pair[1])?;
        dense.extend(edge.into_iter().skip(1));
    }
    let energies = dense
        .iter()
        .map(|x| potential_energy(model, scene, x))
        .collect();
    PathCandidate::new(dense, energies)
}

/// Escape energy expressed as an equivalent lift height `e / (m g)` in meters.
pub fn normalized_escape_energy<S: Real>(e_hat: S, mass: S, gravity: S) -> Result<S> {
    if !(mass > S::ZERO) {
        return Err(Error::usage("mass must be positive"));
    }
    if !(gravity > S::ZERO) {
        return Err(Error::usage("gravity must be positive"));
    }
    if !e_hat.is_finite_value() {
        return Ok(S::INFINITY);
    }
    Ok(e_hat / (mass * gravity))
}
