//! Scene geometry, object kinematics and the collision predicate that defines
//! free configuration space.

mod object;
mod scene;
mod shape;

pub use object::{Band, Joint, Link, LinkPose, ObjectModel};
pub use scene::{GoalSpec, Scene, SceneSpec, Sublevel};
pub use shape::{
    point_box_distance_squared, point_segment_distance_squared, segment_box_distance_squared,
    segment_segment_distance_squared, Shape,
};
