//! JSON scene documents.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Quaternion, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::cspace::{Configuration, SpaceDescriptor, SpaceKind, Weights};
use crate::error::{Error, Result};
use crate::planners::PlannerParams;
use crate::scalar::Real;
use crate::world::{Band, GoalSpec, Joint, Link, ObjectModel, Scene, SceneSpec, Shape};

pub const SCENE_FORMAT_VERSION: u32 = 1;

type V3 = [f64; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub space: SpaceDoc,
    pub object: ObjectDoc,
    #[serde(default)]
    pub obstacles: Vec<ShapeDoc>,
    pub gravity: f64,
    pub init: InitDoc,
    pub goal: GoalDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<ReferenceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planner: Option<PlannerDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    /// `spatial`, `planar` or `band`.
    #[serde(rename = "type")]
    pub kind: String,
    /// Planar spaces only: allow rotation about `+y`.
    #[serde(default)]
    pub rotation: bool,
    /// Position bounds; planar spaces ignore `y`.
    pub lower: V3,
    pub upper: V3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsDoc {
    pub position: f64,
    pub rotation: f64,
    pub joint: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectDoc {
    PointMass {
        mass: f64,
        radius: f64,
    },
    Articulated {
        links: Vec<LinkDoc>,
        #[serde(default)]
        joints: Vec<JointDoc>,
    },
    Band {
        points: usize,
        radius: f64,
        /// One value for every segment, or one per segment.
        stiffness: Stiffness,
        rest_length: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stiffness {
    Uniform(f64),
    PerSegment(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub mass: f64,
    #[serde(default)]
    pub offset: V3,
    pub shape: ShapeDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub axis: V3,
    #[serde(default)]
    pub pivot: V3,
    pub lower: f64,
    pub upper: f64,
    pub stiffness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeDoc {
    Sphere {
        center: V3,
        radius: f64,
    },
    Box {
        center: V3,
        half_extents: V3,
        /// Quaternion `[w, x, y, z]`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<[f64; 4]>,
    },
    Capsule {
        a: V3,
        b: V3,
        radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitDoc {
    Articulated {
        r: V3,
        /// Quaternion `[w, x, y, z]`; identity when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<[f64; 4]>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        alpha: Vec<f64>,
    },
    Band {
        points: Vec<V3>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalDoc {
    pub lower: V3,
    pub upper: V3,
    #[serde(default)]
    pub joint_tolerance: f64,
    #[serde(default)]
    pub energy_tolerance: f64,
}

/// Analytic escape energy shipped with a scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceDoc {
    /// `null` marks a scene with no escape at any energy.
    pub escape_energy: Option<f64>,
    #[serde(default)]
    pub derivation: String,
}

/// Planner defaults tuned for the scene.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_bias: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_rrt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_nodes: Option<usize>,
    /// Drop tree vertices that can no longer improve on the best goal cost.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune: Option<bool>,
}

/// A validated scene plus the metadata that rides along in its file.
#[derive(Clone, Debug)]
pub struct LoadedScene<S: Real> {
    pub path: Option<PathBuf>,
    pub document: SceneDocument,
    pub scene: Scene<S>,
}

impl<S: Real> LoadedScene<S> {
    pub fn name(&self) -> String {
        self.document
            .name
            .clone()
            .or_else(|| {
                self.path
                    .as_ref()
                    .and_then(|p| p.file_stem())
                    .map(|s| s.to_string_lossy().into_owned())
            })
            .unwrap_or_default()
    }

    pub fn reference(&self) -> Option<f64> {
        self.document
            .references
            .as_ref()
            .map(|r| r.escape_energy.unwrap_or(f64::INFINITY))
    }

    /// Planner defaults for the scene's space, overridden by the file's `planner` section.
    pub fn planner_params(&self) -> PlannerParams<S> {
        let mut params = PlannerParams::for_space(self.scene.space());
        if let Some(p) = &self.document.planner {
            if let Some(v) = p.step_size {
                params.step_size = S::lit(v);
                params.radius_cap = S::lit(2.0 * v);
            }
            if let Some(v) = p.goal_bias {
                params.goal_bias = v;
            }
            if let Some(v) = p.radius_cap {
                params.radius_cap = S::lit(v);
            }
            if let Some(v) = p.gamma_rrt {
                params.gamma_rrt = S::lit(v);
            }
            if let Some(v) = p.max_nodes {
                params.max_nodes = v;
            }
            if let Some(v) = p.prune {
                params.prune = v;
            }
        }
        params
    }
}

pub fn load_scene<S: Real>(path: impl AsRef<Path>) -> Result<LoadedScene<S>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut loaded = parse_scene(&text)?;
    loaded.path = Some(path.to_path_buf());
    Ok(loaded)
}

pub fn parse_scene<S: Real>(text: &str) -> Result<LoadedScene<S>> {
    let document: SceneDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let scene = build_scene(&document).map_err(|e| match e {
        Error::Scene { field, message } => {
            let message = match locate(text, &field) {
                Some(line) => format!("{message} (line {line})"),
                None => message,
            };
            Error::Scene { field, message }
        }
        other => other,
    })?;
    Ok(LoadedScene {
        path: None,
        document,
        scene,
    })
}

/// Best-effort line of the key named by a dotted field path such as `init.q`
/// or `object.links[1].mass`.
fn locate(text: &str, field: &str) -> Option<usize> {
    let mut offset = 0;
    for part in field.split('.') {
        let key = part.split('[').next().unwrap_or(part);
        let needle = format!("\"{key}\"");
        offset += text[offset..].find(&needle)?;
    }
    Some(text[..offset].matches('\n').count() + 1)
}

fn v3<S: Real>(v: V3) -> Vector3<S> {
    Vector3::new(S::lit(v[0]), S::lit(v[1]), S::lit(v[2]))
}

fn unit_quaternion<S: Real>(q: [f64; 4], field: &str) -> Result<UnitQuaternion<S>> {
    let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= 1e-6) {
        return Err(Error::scene(
            field,
            format!("quaternion must have unit norm, got {norm}"),
        ));
    }
    Ok(UnitQuaternion::new_normalize(Quaternion::new(
        S::lit(q[0]),
        S::lit(q[1]),
        S::lit(q[2]),
        S::lit(q[3]),
    )))
}

fn shape<S: Real>(doc: &ShapeDoc, field: &str) -> Result<Shape<S>> {
    Ok(match doc {
        ShapeDoc::Sphere { center, radius } => Shape::sphere(v3(*center), S::lit(*radius)),
        ShapeDoc::Box {
            center,
            half_extents,
            rotation,
        } => {
            let q = match rotation {
                Some(q) => unit_quaternion(*q, &format!("{field}.rotation"))?,
                None => UnitQuaternion::identity(),
            };
            Shape::cuboid(v3(*center), q, v3(*half_extents))
        }
        ShapeDoc::Capsule { a, b, radius } => Shape::capsule(v3(*a), v3(*b), S::lit(*radius)),
    })
}

/// Converts a parsed document into a validated scene.
pub fn build_scene<S: Real>(doc: &SceneDocument) -> Result<Scene<S>> {
    if doc.format_version != SCENE_FORMAT_VERSION {
        return Err(Error::scene(
            "format_version",
            format!(
                "unsupported version {} (expected {SCENE_FORMAT_VERSION})",
                doc.format_version
            ),
        ));
    }

    let object = match &doc.object {
        ObjectDoc::PointMass { mass, radius } => {
            let object = ObjectModel::point_mass(S::lit(*mass), S::lit(*radius));
            object.validate()?;
            object
        }
        ObjectDoc::Articulated { links, joints } => {
            let links = links
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    Ok(Link {
                        mass: S::lit(l.mass),
                        shape: shape(&l.shape, &format!("object.links[{i}].shape"))?,
                        offset: v3(l.offset),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let joints = joints
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    let axis = v3::<S>(d.axis);
                    if !(axis.norm() > S::lit(1e-9)) {
                        return Err(Error::scene(
                            format!("object.joints[{j}].axis"),
                            "axis must be nonzero",
                        ));
                    }
                    Ok(Joint {
                        axis: Unit::new_normalize(axis),
                        pivot: v3(d.pivot),
                        lower: S::lit(d.lower),
                        upper: S::lit(d.upper),
                        stiffness: S::lit(d.stiffness),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ObjectModel::articulated(links, joints)?
        }
        ObjectDoc::Band {
            points,
            radius,
            stiffness,
            rest_length,
        } => {
            let stiffness = match stiffness {
                Stiffness::Uniform(k) => vec![S::lit(*k); *points],
                Stiffness::PerSegment(ks) => ks.iter().map(|&k| S::lit(k)).collect(),
            };
            ObjectModel::band(Band {
                points: *points,
                radius: S::lit(*radius),
                stiffness,
                rest_length: S::lit(*rest_length),
            })?
        }
    };

    let kind = match (doc.space.kind.as_str(), &object) {
        ("spatial", ObjectModel::Articulated { .. }) => SpaceKind::Spatial,
        ("planar", ObjectModel::Articulated { .. }) => SpaceKind::Planar {
            rotation: doc.space.rotation,
        },
        ("band", ObjectModel::Band(band)) => SpaceKind::Band {
            points: band.points,
        },
        ("spatial" | "planar" | "band", _) => {
            return Err(Error::scene(
                "space.type",
                "space type does not match the object",
            ));
        }
        (other, _) => {
            return Err(Error::scene(
                "space.type",
                format!("unknown space type '{other}' (expected spatial, planar or band)"),
            ));
        }
    };
    let weights = match &doc.space.weights {
        Some(w) => Weights {
            position: S::lit(w.position),
            rotation: S::lit(w.rotation),
            joint: S::lit(w.joint),
        },
        None => Weights::default(),
    };
    let limits = object.joints().iter().map(|j| (j.lower, j.upper)).collect();
    let space = SpaceDescriptor::new(
        kind,
        v3(doc.space.lower),
        v3(doc.space.upper),
        limits,
        weights,
    )?;

    let obstacles = doc
        .obstacles
        .iter()
        .enumerate()
        .map(|(i, s)| shape(s, &format!("obstacles[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let init = match &doc.init {
        InitDoc::Articulated { r, q, alpha } => {
            let q = match q {
                Some(q) => unit_quaternion(*q, "init.q")?,
                None => UnitQuaternion::identity(),
            };
            Configuration::articulated(v3(*r), q, alpha.iter().map(|&a| S::lit(a)).collect())
        }
        InitDoc::Band { points } => Configuration::band(points.iter().map(|&p| v3(p)).collect()),
    };

    let mut goal = GoalSpec::new(v3(doc.goal.lower), v3(doc.goal.upper));
    goal.joint_tolerance = S::lit(doc.goal.joint_tolerance);
    goal.energy_tolerance = S::lit(doc.goal.energy_tolerance);

    Scene::new(SceneSpec {
        space,
        object,
        obstacles,
        gravity: S::lit(doc.gravity),
        init,
        goal,
        check_resolution: doc.check_resolution.map(S::lit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOWL: &str = r#"{
  "format_version": 1,
  "space": { "type": "planar", "lower": [-1, 0, -1], "upper": [1, 0, 1] },
  "object": { "type": "point_mass", "mass": 1.0, "radius": 0.02 },
  "obstacles": [
    { "type": "capsule", "a": [-0.3, 0, 0], "b": [0.3, 0, 0], "radius": 0.03 }
  ],
  "gravity": 9.81,
  "init": { "r": [0, 0, 0.1] },
  "goal": { "lower": [0.6, 0, -1], "upper": [1, 0, -0.5] }
}"#;

    #[test]
    fn parses_a_point_mass_scene() {
        let loaded = parse_scene::<f64>(BOWL).unwrap();
        assert!(loaded.scene.is_planar());
        assert_eq!(loaded.scene.obstacles().len(), 1);
        assert!((loaded.scene.energy(loaded.scene.init()) - 0.981).abs() < 1e-12);
    }

    #[test]
    fn bad_quaternion_names_the_field() {
        let text = BOWL.replace(
            r#""r": [0, 0, 0.1]"#,
            r#""r": [0, 0, 0.1], "q": [0.5, 0, 0, 0]"#,
        );
        match parse_scene::<f64>(&text) {
            Err(Error::Scene { field, message }) => {
                assert_eq!(field, "init.q");
                assert!(message.contains("line 9"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let text = BOWL.replace("\"gravity\": 9.81,", "\"gravity\": 9.81");
        match parse_scene::<f64>(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn goal_overlapping_an_obstacle_is_rejected() {
        let text = BOWL.replace(
            r#""lower": [0.6, 0, -1], "upper": [1, 0, -0.5]"#,
            r#""lower": [0, 0, -0.1], "upper": [0.2, 0, 0.05]"#,
        );
        assert!(
            matches!(parse_scene::<f64>(&text), Err(Error::Scene { field, .. }) if field == "goal")
        );
    }

    #[test]
    fn colliding_init_is_named() {
        let text = BOWL.replace(r#""r": [0, 0, 0.1]"#, r#""r": [0, 0, 0.0]"#);
        assert!(
            matches!(parse_scene::<f64>(&text), Err(Error::Scene { field, .. }) if field == "init")
        );
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = BOWL.replace("\"gravity\"", "\"gravitation\": 1, \"gravity\"");
        assert!(matches!(
            parse_scene::<f64>(&text),
            Err(Error::Parse { .. })
        ));
    }
}
