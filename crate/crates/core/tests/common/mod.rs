#![allow(dead_code)]

use std::path::PathBuf;

use escape_energy::world::Sublevel;
use escape_energy::{io, LoadedScene, PathCandidate, PlanningProblem, Scene};

pub fn scene_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenes")
        .join(name)
}

pub fn load(name: &str) -> LoadedScene {
    io::load_scene(scene_path(name)).expect("bundled scene loads")
}

pub fn problem(name: &str) -> (LoadedScene, PlanningProblem) {
    let loaded = load(name);
    let problem = PlanningProblem::new(loaded.scene.clone()).expect("init is free");
    (loaded, problem)
}

/// Replays a witness: starts at the initial configuration, ends in the goal,
/// and every edge stays collision-free inside the sublevel set its cost names.
pub fn assert_witness(scene: &Scene, path: &PathCandidate, e_init: f64) {
    let waypoints = path.waypoints();
    assert_eq!(&waypoints[0], scene.init(), "witness must start at x_init");
    assert!(
        scene.in_goal(waypoints.last().unwrap()),
        "witness must end in the goal"
    );
    let sublevel = Sublevel::above(e_init, path.cost());
    for (i, pair) in waypoints.windows(2).enumerate() {
        assert!(
            scene.motion_valid(&pair[0], &pair[1], &sublevel),
            "edge {i} leaves the certified sublevel set"
        );
    }
    let highest = path.energies().iter().cloned().fold(f64::MIN, f64::max);
    assert_eq!(path.cost(), highest - e_init);
}
