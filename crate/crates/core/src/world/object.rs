//! Object models: serial chains of rigid links joined by torsion-spring revolute
//! joints, and closed elastic bands of key points.

use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion, Vector3};

use crate::cspace::Configuration;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::world::Shape;

#[derive(Clone, Debug, PartialEq)]
pub struct Link<S: Real> {
    /// Mass in kilograms.
    pub mass: S,
    /// Collision shape, expressed relative to the center of mass.
    pub shape: Shape<S>,
    /// Center of mass (and shape origin) in the link frame.
    pub offset: Vector3<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Joint<S: Real> {
    /// Rotation axis in the parent frame.
    pub axis: Unit<Vector3<S>>,
    /// Point on the axis in the parent frame.
    pub pivot: Vector3<S>,
    pub lower: S,
    pub upper: S,
    /// Torsion stiffness in N*m/rad.
    pub stiffness: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Band<S: Real> {
    pub points: usize,
    /// Collision radius of each segment between consecutive key points.
    pub radius: S,
    /// Per-segment stiffness in N/m; segment `i` joins points `i-1` and `i`.
    pub stiffness: Vec<S>,
    /// Rest length of every segment in meters.
    pub rest_length: S,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectModel<S: Real> {
    Articulated {
        links: Vec<Link<S>>,
        joints: Vec<Joint<S>>,
    },
    Band(Band<S>),
}

/// Pose of one link after forward kinematics.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkPose<S: Real> {
    /// Center of mass in world coordinates.
    pub com: Vector3<S>,
    /// Pose of the collision shape (link frame translated to the center of mass).
    pub shape_pose: Isometry3<S>,
}

impl<S: Real> ObjectModel<S> {
    pub fn articulated(links: Vec<Link<S>>, joints: Vec<Joint<S>>) -> Result<Self> {
        let model = ObjectModel::Articulated { links, joints };
        model.validate()?;
        Ok(model)
    }

    /// Single rigid sphere of the given mass and radius.
    pub fn point_mass(mass: S, radius: S) -> Self {
        ObjectModel::Articulated {
            links: vec![Link {
                mass,
                shape: Shape::sphere(Vector3::zeros(), radius),
                offset: Vector3::zeros(),
            }],
            joints: Vec::new(),
        }
    }

    pub fn band(band: Band<S>) -> Result<Self> {
        let model = ObjectModel::Band(band);
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ObjectModel::Articulated { links, joints } => {
                if links.is_empty() {
                    return Err(Error::scene(
                        "object.links",
                        "at least one link is required",
                    ));
                }
                if joints.len() + 1 != links.len() {
                    return Err(Error::scene(
                        "object.joints",
                        format!(
                            "a serial chain of {} links needs {} joints",
                            links.len(),
                            links.len() - 1
                        ),
                    ));
                }
                for (i, link) in links.iter().enumerate() {
                    if !(link.mass >= S::ZERO && link.mass.is_finite_value()) {
                        return Err(Error::scene(
                            format!("object.links[{i}].mass"),
                            "mass must be >= 0",
                        ));
                    }
                    link.shape.validate(&format!("object.links[{i}].shape"))?;
                }
                let pi = S::PI();
                for (j, joint) in joints.iter().enumerate() {
                    if !(joint.stiffness >= S::ZERO && joint.stiffness.is_finite_value()) {
                        return Err(Error::scene(
                            format!("object.joints[{j}].stiffness"),
                            "stiffness must be >= 0",
                        ));
                    }
                    if !(joint.lower <= joint.upper && joint.lower >= -pi && joint.upper <= pi) {
                        return Err(Error::scene(
                            format!("object.joints[{j}].limits"),
                            "limits must satisfy -pi <= lower <= upper <= pi",
                        ));
                    }
                }
                Ok(())
            }
            ObjectModel::Band(band) => {
                if band.points < 3 {
                    return Err(Error::scene(
                        "object.points",
                        "a band needs at least 3 key points",
                    ));
                }
                if band.stiffness.len() != band.points {
                    return Err(Error::scene(
                        "object.stiffness",
                        "one stiffness per segment is required",
                    ));
                }
                if band
                    .stiffness
                    .iter()
                    .any(|&k| !(k >= S::ZERO && k.is_finite_value()))
                {
                    return Err(Error::scene("object.stiffness", "stiffness must be >= 0"));
                }
                if !(band.rest_length > S::ZERO && band.rest_length.is_finite_value()) {
                    return Err(Error::scene(
                        "object.rest_length",
                        "rest length must be > 0",
                    ));
                }
                if !(band.radius > S::ZERO && band.radius.is_finite_value()) {
                    return Err(Error::scene("object.radius", "segment radius must be > 0"));
                }
                Ok(())
            }
        }
    }

    pub fn is_band(&self) -> bool {
        matches!(self, ObjectModel::Band(_))
    }

    pub fn joints(&self) -> &[Joint<S>] {
        match self {
            ObjectModel::Articulated { joints, .. } => joints,
            ObjectModel::Band(_) => &[],
        }
    }

    pub fn total_mass(&self) -> S {
        match self {
            ObjectModel::Articulated { links, .. } => {
                links.iter().fold(S::ZERO, |acc, l| acc + l.mass)
            }
            ObjectModel::Band(_) => S::ZERO,
        }
    }

    /// Number of collision primitives the object contributes per configuration.
    pub fn shape_count(&self) -> usize {
        match self {
            ObjectModel::Articulated { links, .. } => links.len(),
            ObjectModel::Band(band) => band.points,
        }
    }

    /// A single sphere link without joints: the object the grid oracle supports.
    pub fn is_point_mass(&self) -> bool {
        match self {
            ObjectModel::Articulated { links, joints } => {
                joints.is_empty()
                    && links.len() == 1
                    && matches!(links[0].shape, Shape::Sphere { center, .. } if center == Vector3::zeros())
            }
            ObjectModel::Band(_) => false,
        }
    }

    /// Composes link frames from the base pose through each joint rotation.
    pub fn forward_kinematics(&self, x: &Configuration<S>) -> Result<Vec<LinkPose<S>>> {
        let (links, joints) = match self {
            ObjectModel::Articulated { links, joints } => (links, joints),
            ObjectModel::Band(_) => {
                return Err(Error::usage("forward kinematics is undefined for bands"));
            }
        };
        let (r, q, alpha) = match x {
            Configuration::Articulated { r, q, alpha } => (r, q, alpha),
            Configuration::Band { .. } => {
                return Err(Error::usage(
                    "band configuration passed to an articulated object",
                ));
            }
        };
        if alpha.len() != joints.len() {
            return Err(Error::usage(format!(
                "expected {} joint angles, got {}",
                joints.len(),
                alpha.len()
            )));
        }

        let mut frame = Isometry3::from_parts(Translation3::from(*r), *q);
        let mut poses = Vec::with_capacity(links.len());
        for (i, link) in links.iter().enumerate() {
            if i > 0 {
                let joint = &joints[i - 1];
                let to_pivot = Isometry3::translation(joint.pivot.x, joint.pivot.y, joint.pivot.z);
                let from_pivot =
                    Isometry3::translation(-joint.pivot.x, -joint.pivot.y, -joint.pivot.z);
                let turn = Isometry3::from_parts(
                    Translation3::identity(),
                    UnitQuaternion::from_axis_angle(&joint.axis, alpha[i - 1]),
                );
                frame = frame * to_pivot * turn * from_pivot;
            }
            let shape_pose = frame * Translation3::from(link.offset);
            poses.push(LinkPose {
                com: shape_pose.translation.vector,
                shape_pose,
            });
        }
        Ok(poses)
    }

    /// World-frame collision primitives of the object at `x`.
    pub fn world_shapes(&self, x: &Configuration<S>) -> Result<Vec<Shape<S>>> {
        match (self, x) {
            (ObjectModel::Band(band), Configuration::Band { points }) => {
                if points.len() != band.points {
                    return Err(Error::usage(
                        "band configuration has the wrong number of key points",
                    ));
                }
                let n = points.len();
                Ok((0..n)
                    .map(|i| Shape::capsule(points[(i + n - 1) % n], points[i], band.radius))
                    .collect())
            }
            (ObjectModel::Band(_), _) => {
                Err(Error::usage("articulated configuration passed to a band"))
            }
            (ObjectModel::Articulated { links, .. }, _) => {
                let poses = self.forward_kinematics(x)?;
                Ok(links
                    .iter()
                    .zip(&poses)
                    .map(|(link, pose)| link.shape.transformed(&pose.shape_pose))
                    .collect())
            }
        }
    }
}
