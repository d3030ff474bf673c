//! Escape-energy estimation for objects held in soft fixtures.
//!
//! The escape energy of an object at `x_init` is the least energy it must gain
//! to reach a goal region while avoiding obstacles. This crate estimates it with
//! sublevel-constrained RRT (conservative and binary search), an energy-biased
//! RRT*, and computes it exactly on grids for point masses.
//!
//! The modules are generic over the scalar type; the aliases below fix it to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod cspace;
pub mod energy;
pub mod error;
pub mod estimators;
pub mod io;
pub mod oracle;
pub mod planners;
pub mod scalar;
pub mod world;

pub use clock::ClockMode;
pub use error::{Error, Result};
pub use estimators::{Algorithm, Termination};
pub use scalar::Real;

pub type Configuration = cspace::Configuration<f64>;
pub type SpaceDescriptor = cspace::SpaceDescriptor<f64>;
pub type Shape = world::Shape<f64>;
pub type ObjectModel = world::ObjectModel<f64>;
pub type Scene = world::Scene<f64>;
pub type SceneSpec = world::SceneSpec<f64>;
pub type GoalSpec = world::GoalSpec<f64>;
pub type EnergyModel = energy::EnergyModel<f64>;
pub type PathCandidate = energy::PathCandidate<f64>;
pub type PlanningProblem = planners::PlanningProblem<f64>;
pub type PlannerParams = planners::PlannerParams<f64>;
pub type SearchTree = planners::SearchTree<f64>;
pub type SearchSchedule = estimators::SearchSchedule<f64>;
pub type EscapeEstimate = estimators::EscapeEstimate<f64>;
pub type GridProblem = oracle::GridProblem<f64>;
pub type LoadedScene = io::LoadedScene<f64>;
