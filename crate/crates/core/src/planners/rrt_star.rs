use std::ops::ControlFlow;

use crate::clock::Clock;
use crate::cspace::{stream, Configuration, SpaceDescriptor};
use crate::energy::{path_energy_cost, PathCandidate};
use crate::error::Result;
use crate::planners::cost::{combine_energy_cost, hybrid_cost, rewire_radius};
use crate::planners::rrt::branch;
use crate::planners::{PlannerParams, PlanningProblem};
use crate::scalar::Real;
use crate::world::Sublevel;

/// Tree of the hybrid-cost RRT*. Every vertex stores its energy component `c_e`
/// (bottleneck of `E - E_init` along the root path) and length component `c_l`.
#[derive(Clone, Debug)]
pub struct SearchTree<S: Real> {
    vertices: Vec<Configuration<S>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    energy: Vec<S>,
    cost_energy: Vec<S>,
    cost_length: Vec<S>,
    edge_length: Vec<S>,
    e_init: S,
    gamma: S,
}

impl<S: Real> SearchTree<S> {
    fn new(root: Configuration<S>, e_init: S, gamma: S) -> Self {
        SearchTree {
            vertices: vec![root],
            parent: vec![None],
            children: vec![Vec::new()],
            energy: vec![e_init],
            cost_energy: vec![S::ZERO],
            cost_length: vec![S::ZERO],
            edge_length: vec![S::ZERO],
            e_init,
            gamma,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Configuration<S>] {
        &self.vertices
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn energy(&self, v: usize) -> S {
        self.energy[v]
    }

    pub fn cost_energy(&self, v: usize) -> S {
        self.cost_energy[v]
    }

    pub fn cost_length(&self, v: usize) -> S {
        self.cost_length[v]
    }

    /// Hybrid cost-to-come `c_e + gamma * c_l`.
    pub fn cost(&self, v: usize) -> S {
        hybrid_cost(self.cost_energy[v], self.cost_length[v], self.gamma)
    }

    /// Edges as `(parent, child)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|p| (p, child)))
    }

    /// Vertex indices from the root to `v`.
    pub fn branch(&self, v: usize) -> Vec<usize> {
        branch(&self.parent, v)
    }

    /// Recomputes `(c_e, c_l)` of `v` from scratch along its root path.
    pub fn replay_cost(&self, v: usize, space: &SpaceDescriptor<S>) -> Result<(S, S)> {
        let path = self.branch(v);
        let (mut ce, mut cl) = (S::ZERO, S::ZERO);
        for w in path.windows(2) {
            ce = combine_energy_cost(ce, self.energy[w[1]], self.e_init);
            cl += space.distance(&self.vertices[w[0]], &self.vertices[w[1]])?;
        }
        Ok((ce, cl))
    }

    /// Checks tree structure and that stored costs equal their replay exactly.
    pub fn check_invariants(&self, space: &SpaceDescriptor<S>) -> std::result::Result<(), String> {
        let n = self.len();
        if self.parent[0].is_some() {
            return Err("root has a parent".into());
        }
        if self.cost(0) != S::ZERO {
            return Err("root cost is not zero".into());
        }
        for v in 1..n {
            let mut steps = 0;
            let mut u = v;
            while let Some(p) = self.parent[u] {
                u = p;
                steps += 1;
                if steps > n {
                    return Err(format!("vertex {v} lies on a cycle"));
                }
            }
            if u != 0 {
                return Err(format!("vertex {v} is not connected to the root"));
            }
            let (ce, cl) = self.replay_cost(v, space).map_err(|e| e.to_string())?;
            if ce != self.cost_energy[v] || cl != self.cost_length[v] {
                return Err(format!(
                    "vertex {v} stores ({:?}, {:?}) but replays to ({ce:?}, {cl:?})",
                    self.cost_energy[v], self.cost_length[v]
                ));
            }
        }
        for (p, c) in self.edges() {
            if !self.children[p].contains(&c) {
                return Err(format!("edge {p} -> {c} missing from the child list"));
            }
        }
        Ok(())
    }

    fn push(&mut self, x: Configuration<S>, energy: S, parent: usize, edge: S) -> usize {
        let v = self.len();
        self.cost_energy.push(combine_energy_cost(
            self.cost_energy[parent],
            energy,
            self.e_init,
        ));
        self.cost_length.push(self.cost_length[parent] + edge);
        self.vertices.push(x);
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.children[parent].push(v);
        self.energy.push(energy);
        self.edge_length.push(edge);
        v
    }

    /// Moves `v` under `new_parent` and refreshes the costs of its subtree.
    fn reparent(&mut self, v: usize, new_parent: usize, edge: S) {
        if let Some(old) = self.parent[v] {
            self.children[old].retain(|&c| c != v);
        }
        self.parent[v] = Some(new_parent);
        self.children[new_parent].push(v);
        self.edge_length[v] = edge;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            let p = self.parent[u].unwrap_or(0);
            self.cost_energy[u] =
                combine_energy_cost(self.cost_energy[p], self.energy[u], self.e_init);
            self.cost_length[u] = self.cost_length[p] + self.edge_length[u];
            stack.extend(self.children[u].iter().copied());
        }
    }
}

/// One entry of the anytime stream: a goal path with a strictly lower hybrid
/// cost than every earlier entry.
#[derive(Clone, Debug)]
pub struct AnytimeRecord<S: Real> {
    /// Clock seconds since the search started.
    pub time: f64,
    pub hybrid_cost: S,
    pub cost_energy: S,
    pub cost_length: S,
    /// Tree path, densified, with its certified energy cost.
    pub path: PathCandidate<S>,
    pub iteration: usize,
    pub nodes: usize,
}

#[derive(Clone, Debug)]
pub struct OptimalRun<S: Real> {
    pub records: Vec<AnytimeRecord<S>>,
    pub tree: SearchTree<S>,
    pub best_goal: Option<usize>,
    pub elapsed: f64,
    pub iterations: usize,
}

struct Search<'a, S: Real> {
    problem: &'a PlanningProblem<S>,
    clock: Clock,
    free: Sublevel<S>,
}

impl<S: Real> Search<'_, S> {
    fn collision_free(&mut self, a: &Configuration<S>, b: &Configuration<S>) -> bool {
        let mut evaluated = 0;
        let ok = self
            .problem
            .scene()
            .check_motion(a, b, &self.free, false, &mut evaluated)
            .is_some();
        self.clock.charge(evaluated * self.problem.state_units());
        ok
    }

    fn distance(&mut self, a: &Configuration<S>, b: &Configuration<S>) -> Result<S> {
        self.clock.charge(self.problem.distance_units());
        self.problem.space().distance(a, b)
    }
}

/// Energy-biased RRT* over the free space with hybrid cost `c_e + gamma * c_l`.
///
/// `on_record` sees every anytime record as it is produced and may stop the
/// search early by returning `ControlFlow::Break`.
pub fn optimal_search<S, F>(
    problem: &PlanningProblem<S>,
    params: &PlannerParams<S>,
    mut on_record: F,
) -> Result<OptimalRun<S>>
where
    S: Real,
    F: FnMut(&AnytimeRecord<S>) -> ControlFlow<()>,
{
    params.validate()?;
    let scene = problem.scene();
    let space = problem.space();
    let e_init = problem.e_init();
    let mut rng = stream(params.seed);
    let mut search = Search {
        problem,
        clock: params.clock(),
        free: Sublevel::unbounded(),
    };
    let mut tree = SearchTree::new(problem.x_init().clone(), e_init, params.gamma);
    let mut goals: Vec<usize> = Vec::new();
    if scene.in_goal(problem.x_init()) {
        goals.push(0);
    }
    // Vertices taking part in nearest and near queries; pruning drops those
    // whose cost-to-come already reaches the best goal cost.
    let mut active: Vec<usize> = vec![0];
    let mut records: Vec<AnytimeRecord<S>> = Vec::new();
    let mut best_goal = None;
    let mut best_cost = S::INFINITY;
    let mut iterations = 0;

    loop {
        // Report the best goal vertex whenever its cost drops.
        let current = goals
            .iter()
            .copied()
            .fold(None, |acc: Option<usize>, v| match acc {
                Some(b) if tree.cost(b) <= tree.cost(v) => Some(b),
                _ => Some(v),
            });
        if let Some(g) = current {
            if tree.cost(g) < best_cost {
                best_cost = tree.cost(g);
                best_goal = Some(g);
                if params.prune {
                    active.retain(|&v| tree.cost(v) < best_cost);
                }
                let waypoints: Vec<_> = tree
                    .branch(g)
                    .into_iter()
                    .map(|i| tree.vertices[i].clone())
                    .collect();
                let path = path_energy_cost(scene.energy_model(), scene, &waypoints)?;
                search
                    .clock
                    .charge(path.len() as u64 * problem.state_units());
                let record = AnytimeRecord {
                    time: search.clock.elapsed(),
                    hybrid_cost: best_cost,
                    cost_energy: tree.cost_energy(g),
                    cost_length: tree.cost_length(g),
                    path,
                    iteration: iterations,
                    nodes: tree.len(),
                };
                let flow = on_record(&record);
                records.push(record);
                if flow.is_break() {
                    break;
                }
            }
        }
        if tree.len() >= params.max_nodes
            || search.clock.elapsed() >= params.time_budget
            || active.is_empty()
        {
            break;
        }
        iterations += 1;

        let target = problem.sample(&mut rng, params.goal_bias);
        let mut x_nearest = active[0];
        let mut nearest_distance = S::INFINITY;
        for &v in &active {
            let d = search.distance(&tree.vertices[v], &target)?;
            if d < nearest_distance {
                x_nearest = v;
                nearest_distance = d;
            }
        }
        let x_new = space.steer(&tree.vertices[x_nearest], &target, params.step_size)?;
        if !search.collision_free(&tree.vertices[x_nearest].clone(), &x_new) {
            continue;
        }
        let e_new = scene.energy(&x_new);
        search.clock.charge(problem.state_units());
        if params.prune && e_new - e_init >= best_cost {
            continue;
        }

        let radius = rewire_radius(tree.len(), space, params.gamma_rrt, params.radius_cap);
        let mut near = Vec::new();
        for &v in &active {
            let d = search.distance(&tree.vertices[v], &x_new)?;
            if d <= radius {
                near.push((v, d));
            }
        }

        // Choose the parent with the strictly lowest cost-to-come.
        let mut x_min = x_nearest;
        let mut edge_min = search.distance(&tree.vertices[x_nearest], &x_new)?;
        let mut c_min = hybrid_cost(
            combine_energy_cost(tree.cost_energy(x_nearest), e_new, e_init),
            tree.cost_length(x_nearest) + edge_min,
            params.gamma,
        );
        for &(v, edge) in &near {
            if v == x_nearest {
                continue;
            }
            let c_que = hybrid_cost(
                combine_energy_cost(tree.cost_energy(v), e_new, e_init),
                tree.cost_length(v) + edge,
                params.gamma,
            );
            if c_que < c_min && search.collision_free(&tree.vertices[v].clone(), &x_new) {
                x_min = v;
                edge_min = edge;
                c_min = c_que;
            }
        }
        if params.prune && c_min >= best_cost {
            continue;
        }
        let in_goal = scene.in_goal(&x_new);
        let v_new = tree.push(x_new, e_new, x_min, edge_min);
        active.push(v_new);
        if in_goal {
            goals.push(v_new);
        }

        // Rewire neighbors through the new vertex when strictly cheaper.
        for &(v, edge) in &near {
            if v == x_min {
                continue;
            }
            let c_que = hybrid_cost(
                combine_energy_cost(tree.cost_energy(v_new), tree.energy(v), e_init),
                tree.cost_length(v_new) + edge,
                params.gamma,
            );
            if c_que < tree.cost(v) {
                let (a, b) = (tree.vertices[v_new].clone(), tree.vertices[v].clone());
                if search.collision_free(&a, &b) {
                    tree.reparent(v, v_new, edge);
                }
            }
        }
    }

    Ok(OptimalRun {
        records,
        tree,
        best_goal,
        elapsed: search.clock.elapsed(),
        iterations,
    })
}
