//! Exact escape energies on grids over low-dimensional point-mass spaces, and
//! the random planar scenes used to study the hybrid cost.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Vector3;
use rand::Rng;

use crate::cspace::{derive_seed, stream, Configuration, SpaceDescriptor, SpaceKind};
use crate::energy::PathCandidate;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::world::{GoalSpec, ObjectModel, Scene, SceneSpec, Shape};

/// Cell energies on a 1-, 2- or 3-dimensional grid with an initial cell and goal cells.
///
/// Cells are stored row-major with the first axis varying slowest. Neighbors are
/// the two adjacent cells in 1D, the eight surrounding cells in 2D and the six
/// face neighbors in 3D.
#[derive(Clone, Debug)]
pub struct GridProblem<S: Real> {
    dims: Vec<usize>,
    energies: Vec<S>,
    goals: Vec<bool>,
    init: usize,
    /// World coordinates of the grid when built from a scene.
    layout: Option<GridLayout<S>>,
}

#[derive(Clone, Debug)]
struct GridLayout<S: Real> {
    axes: Vec<usize>,
    lower: Vector3<S>,
    cell: Vector3<S>,
}

impl<S: Real> GridProblem<S> {
    pub fn new(dims: Vec<usize>, energies: Vec<S>, goals: Vec<bool>, init: usize) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 || dims.contains(&0) {
            return Err(Error::usage("grid needs 1 to 3 nonempty axes"));
        }
        let n: usize = dims.iter().product();
        if energies.len() != n || goals.len() != n {
            return Err(Error::usage("energy and goal arrays must cover every cell"));
        }
        if init >= n {
            return Err(Error::usage("init cell lies outside the grid"));
        }
        if !energies[init].is_finite_value() {
            return Err(Error::usage("init cell has infinite energy"));
        }
        Ok(GridProblem {
            dims,
            energies,
            goals,
            init,
            layout: None,
        })
    }

    /// Samples the scene's energy at the centers of `resolution` cells per axis.
    /// Only single-sphere point masses are supported.
    pub fn from_scene(scene: &Scene<S>, resolution: usize) -> Result<Self> {
        if !scene.object().is_point_mass() {
            return Err(Error::usage(
                "the grid oracle supports only point-mass objects (one sphere link, no joints)",
            ));
        }
        if resolution == 0 {
            return Err(Error::usage("resolution must be >= 1"));
        }
        let axes = match scene.space().kind() {
            SpaceKind::Planar { .. } => vec![0, 2],
            SpaceKind::Spatial => vec![0, 1, 2],
            SpaceKind::Band { .. } => unreachable!("bands are not point masses"),
        };
        let lower = *scene.space().lower();
        let extent = scene.space().upper() - lower;
        let cell = extent / S::lit(resolution as f64);
        let layout = GridLayout { axes, lower, cell };
        let dims = vec![resolution; layout.axes.len()];
        let n: usize = dims.iter().product();

        let mut energies = Vec::with_capacity(n);
        let mut goals = Vec::with_capacity(n);
        let mut grid = GridProblem {
            dims,
            energies: Vec::new(),
            goals: Vec::new(),
            init: 0,
            layout: Some(layout),
        };
        for i in 0..n {
            let x = Configuration::point(grid.center(i).unwrap_or_else(Vector3::zeros));
            energies.push(scene.energy(&x));
            goals.push(scene.in_goal(&x));
        }
        grid.energies = energies;
        grid.goals = goals;

        let p = scene.init().position();
        let layout = grid.layout.as_ref().expect("layout set above");
        let mut index = vec![0; grid.dims.len()];
        for (k, &a) in layout.axes.iter().enumerate() {
            let t = ((p[a] - layout.lower[a]) / layout.cell[a])
                .floor()
                .to_f64()
                .unwrap_or(0.0);
            index[k] = (t.max(0.0) as usize).min(resolution - 1);
        }
        grid.init = grid.flat(&index);
        if !grid.energies[grid.init].is_finite_value() {
            return Err(Error::scene(
                "init",
                "the grid cell holding the initial configuration collides",
            ));
        }
        Ok(grid)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[S] {
        &self.energies
    }

    pub fn is_goal(&self, cell: usize) -> bool {
        self.goals[cell]
    }

    pub fn init(&self) -> usize {
        self.init
    }

    /// Largest cell edge length, the spatial discretization step.
    pub fn cell_size(&self) -> Option<S> {
        self.layout
            .as_ref()
            .map(|l| l.axes.iter().fold(S::ZERO, |m, &a| m.max(l.cell[a])))
    }

    pub fn flat(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn unflat(&self, mut cell: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            index[k] = cell % self.dims[k];
            cell /= self.dims[k];
        }
        index
    }

    /// World coordinates of a cell center (scene-built grids only).
    pub fn center(&self, cell: usize) -> Option<Vector3<S>> {
        let layout = self.layout.as_ref()?;
        let index = self.unflat(cell);
        let mut p = Vector3::zeros();
        for (k, &a) in layout.axes.iter().enumerate() {
            p[a] = layout.lower[a] + (S::lit(index[k] as f64) + S::HALF) * layout.cell[a];
        }
        Some(p)
    }

    pub fn neighbors(&self, cell: usize) -> Vec<usize> {
        let index = self.unflat(cell);
        let offsets: Vec<Vec<isize>> = match self.dims.len() {
            1 => vec![vec![-1], vec![1]],
            2 => (-1..=1)
                .flat_map(|a| (-1..=1).map(move |b| vec![a, b]))
                .filter(|o| o.iter().any(|&v| v != 0))
                .collect(),
            _ => (0..3)
                .flat_map(|axis| {
                    [-1, 1].into_iter().map(move |s| {
                        let mut o = vec![0; 3];
                        o[axis] = s;
                        o
                    })
                })
                .collect(),
        };
        offsets
            .iter()
            .filter_map(|o| {
                let mut next = Vec::with_capacity(index.len());
                for ((&i, &d), &n) in index.iter().zip(o).zip(&self.dims) {
                    let j = i as isize + d;
                    if j < 0 || j >= n as isize {
                        return None;
                    }
                    next.push(j as usize);
                }
                Some(self.flat(&next))
            })
            .collect()
    }
}

struct Entry<S> {
    bottleneck: S,
    cell: usize,
}

impl<S: Real> PartialEq for Entry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Real> Eq for Entry<S> {}

impl<S: Real> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Real> Ord for Entry<S> {
    // Reversed so the max-heap pops the lowest bottleneck first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bottleneck
            .partial_cmp(&self.bottleneck)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

/// Minimum over grid paths from the init cell to a goal cell of the highest
/// cell energy on the path, minus the init cell's energy. Infinite when no goal
/// is reachable through finite cells.
pub fn grid_escape_energy<S: Real>(grid: &GridProblem<S>) -> S {
    let n = grid.len();
    let base = grid.energies[grid.init];
    let mut best = vec![S::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[grid.init] = base;
    heap.push(Entry {
        bottleneck: base,
        cell: grid.init,
    });
    while let Some(Entry { bottleneck, cell }) = heap.pop() {
        if done[cell] {
            continue;
        }
        done[cell] = true;
        if grid.goals[cell] {
            return bottleneck - base;
        }
        for next in grid.neighbors(cell) {
            let e = grid.energies[next];
            if done[next] || !e.is_finite_value() {
                continue;
            }
            let candidate = bottleneck.max(e);
            if candidate < best[next] {
                best[next] = candidate;
                heap.push(Entry {
                    bottleneck: candidate,
                    cell: next,
                });
            }
        }
    }
    S::INFINITY
}

/// Sum of metric distances between consecutive waypoints.
pub fn path_length_total_variation<S: Real>(
    waypoints: &[Configuration<S>],
    space: &SpaceDescriptor<S>,
) -> Result<S> {
    waypoints
        .windows(2)
        .try_fold(S::ZERO, |acc, w| Ok(acc + space.distance(&w[0], &w[1])?))
}

/// `(C_e + gamma * C_l) / e_star` for a goal path.
pub fn normalized_total_cost<S: Real>(
    path: &PathCandidate<S>,
    e_star: S,
    gamma: S,
    space: &SpaceDescriptor<S>,
) -> Result<S> {
    if !(e_star > S::ZERO) {
        return Err(Error::usage("reference escape energy must be > 0"));
    }
    let length = path_length_total_variation(path.waypoints(), space)?;
    Ok((path.cost() + gamma * length) / e_star)
}

/// A generated planar scene together with its grid-oracle escape energy.
#[derive(Clone, Debug)]
pub struct RandomScene<S: Real> {
    pub scene: Scene<S>,
    pub e_star: S,
    /// Generation attempts consumed, including the accepted one.
    pub attempts: usize,
}

const RANDOM_SCENE_ATTEMPTS: usize = 200;

/// Unit-square planar scene with `n_obstacles` capsules, a point mass with
/// `m g = 1` starting at the origin and a goal box at `(1, 0)`.
///
/// The first obstacle stands on the floor between start and goal so that escape
/// needs a lift; the rest are scattered at random. Scenes are regenerated until
/// the oracle at `resolution` finds a finite escape energy.
pub fn generate_random_scene<S: Real>(
    seed: u64,
    n_obstacles: usize,
    resolution: usize,
) -> Result<RandomScene<S>> {
    for attempt in 0..RANDOM_SCENE_ATTEMPTS {
        let mut rng = stream(derive_seed(seed, attempt as u64));
        let mut obstacles = Vec::with_capacity(n_obstacles);
        for k in 0..n_obstacles {
            let radius = S::lit(rng.random_range(0.03..0.07));
            let shape = if k == 0 {
                let x = rng.random_range(0.3..0.7);
                let height = rng.random_range(0.12..0.45);
                let tilt = rng.random_range(-0.1..0.1);
                Shape::capsule(planar(x, 0.0), planar(x + tilt, height), radius)
            } else {
                let (cx, cz) = (rng.random_range(0.1..0.9), rng.random_range(0.1..0.9));
                let half = rng.random_range(0.03..0.15);
                let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
                let (dx, dz) = (half * angle.cos(), half * angle.sin());
                Shape::capsule(planar(cx - dx, cz - dz), planar(cx + dx, cz + dz), radius)
            };
            obstacles.push(shape);
        }
        let spec = SceneSpec {
            space: SpaceDescriptor::planar_point([S::ZERO, S::ZERO], [S::ONE, S::ONE])?,
            object: ObjectModel::point_mass(S::ONE, S::lit(0.01)),
            obstacles,
            gravity: S::ONE,
            init: Configuration::point(Vector3::zeros()),
            goal: GoalSpec::new(planar(0.95, 0.0), planar(1.0, 0.05)),
            check_resolution: Some(S::lit(0.004)),
        };
        let Ok(scene) = Scene::new(spec) else {
            continue;
        };
        let Ok(grid) = GridProblem::from_scene(&scene, resolution) else {
            continue;
        };
        let e_star = grid_escape_energy(&grid);
        if e_star.is_finite_value() {
            return Ok(RandomScene {
                scene,
                e_star,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::InfeasiblePath(format!(
        "no feasible scene with {n_obstacles} obstacles after {RANDOM_SCENE_ATTEMPTS} attempts"
    )))
}

fn planar<S: Real>(x: f64, z: f64) -> Vector3<S> {
    Vector3::new(S::lit(x), S::ZERO, S::lit(z))
}
