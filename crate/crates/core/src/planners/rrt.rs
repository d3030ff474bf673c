use crate::clock::Clock;
use crate::cspace::{stream, Configuration};
use crate::energy::{path_energy_cost, PathCandidate};
use crate::error::Result;
use crate::planners::{PlannerParams, PlanningProblem};
use crate::scalar::Real;
use crate::world::Sublevel;

#[derive(Clone, Debug)]
pub struct RrtOutcome<S: Real> {
    pub path: Option<PathCandidate<S>>,
    /// Clock seconds consumed.
    pub elapsed: f64,
    pub nodes: usize,
}

/// Index of the vertex nearest to `x`, charging one metric evaluation per vertex.
pub(crate) fn nearest<S: Real>(
    problem: &PlanningProblem<S>,
    vertices: &[Configuration<S>],
    x: &Configuration<S>,
    clock: &mut Clock,
) -> Result<usize> {
    let space = problem.space();
    let mut best = (0, S::INFINITY);
    for (i, v) in vertices.iter().enumerate() {
        let d = space.distance(v, x)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    clock.charge(vertices.len() as u64 * problem.distance_units());
    Ok(best.0)
}

/// Walks parent links from `leaf` back to the root.
pub(crate) fn branch(parents: &[Option<usize>], leaf: usize) -> Vec<usize> {
    let mut out = vec![leaf];
    let mut v = leaf;
    while let Some(p) = parents[v] {
        out.push(p);
        v = p;
    }
    out.reverse();
    out
}

/// Grows an RRT from `x_init` inside the sublevel set `E <= E_init + e_sublevel`
/// until a vertex lands in the goal or the budget runs out.
pub fn rrt_search<S: Real>(
    problem: &PlanningProblem<S>,
    e_sublevel: S,
    params: &PlannerParams<S>,
) -> Result<RrtOutcome<S>> {
    params.validate()?;
    let scene = problem.scene();
    let space = problem.space();
    let sublevel = Sublevel::above(problem.e_init(), e_sublevel);
    let mut clock = params.clock();
    let mut rng = stream(params.seed);

    let mut vertices = vec![problem.x_init().clone()];
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut goal_leaf = scene.in_goal(problem.x_init()).then_some(0);

    while goal_leaf.is_none()
        && vertices.len() < params.max_nodes
        && clock.elapsed() < params.time_budget
    {
        let target = problem.sample(&mut rng, params.goal_bias);
        let near = nearest(problem, &vertices, &target, &mut clock)?;
        let x_new = space.steer(&vertices[near], &target, params.step_size)?;
        let mut evaluated = 0;
        let ok = scene.check_motion(&vertices[near], &x_new, &sublevel, false, &mut evaluated);
        clock.charge(evaluated * problem.state_units() + problem.distance_units());
        if ok.is_none() {
            continue;
        }
        let reached = scene.in_goal(&x_new);
        vertices.push(x_new);
        parents.push(Some(near));
        if reached {
            goal_leaf = Some(vertices.len() - 1);
        }
    }

    let path = match goal_leaf {
        Some(leaf) => {
            let waypoints: Vec<_> = branch(&parents, leaf)
                .into_iter()
                .map(|i| vertices[i].clone())
                .collect();
            let path = path_energy_cost(scene.energy_model(), scene, &waypoints)?;
            clock.charge(path.len() as u64 * problem.state_units());
            Some(path)
        }
        None => None,
    };
    Ok(RrtOutcome {
        path,
        elapsed: clock.elapsed(),
        nodes: vertices.len(),
    })
}
