//! Escape-energy estimation drivers built on the planners.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use crate::cspace::derive_seed;
use crate::energy::PathCandidate;
use crate::error::{Error, Result};
use crate::planners::{optimal_search, rrt_search, PlannerParams, PlanningProblem};
use crate::scalar::Real;
use crate::world::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Repeated RRT inside the sublevel set of the best path so far.
    Conservative,
    /// Bisection of the sublevel height.
    Binary,
    /// Energy-biased RRT*.
    Optimal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::Conservative,
        Algorithm::Binary,
        Algorithm::Optimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Conservative => "conservative",
            Algorithm::Binary => "binary",
            Algorithm::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conservative" => Ok(Algorithm::Conservative),
            "binary" => Ok(Algorithm::Binary),
            "optimal" => Ok(Algorithm::Optimal),
            other => Err(Error::usage(format!(
                "unknown algorithm '{other}' (expected conservative, binary or optimal)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The time budget ran out.
    Budget,
    /// The estimate reached the zero tolerance.
    Converged,
    /// The binary-search interval shrank below its tolerance.
    IntervalCollapsed,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Budget => "budget",
            Termination::Converged => "converged",
            Termination::IntervalCollapsed => "interval-collapsed",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "budget" => Ok(Termination::Budget),
            "converged" => Ok(Termination::Converged),
            "interval-collapsed" => Ok(Termination::IntervalCollapsed),
            other => Err(Error::usage(format!(
                "unknown termination reason '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow<S: Real> {
    /// Clock seconds since the estimator started.
    pub seconds: f64,
    pub e_upper: S,
    pub e_lower: Option<S>,
}

#[derive(Clone, Debug)]
pub struct EscapeEstimate<S: Real> {
    /// Certified upper bound on the escape energy; infinite without a witness.
    pub e_upper: S,
    /// Advisory lower end of the binary-search interval.
    pub e_lower: Option<S>,
    pub witness: Option<PathCandidate<S>>,
    pub trace: Vec<TraceRow<S>>,
    pub iterations: usize,
    pub reason: Termination,
    /// Clock seconds consumed.
    pub elapsed: f64,
}

impl<S: Real> EscapeEstimate<S> {
    pub fn escaped(&self) -> bool {
        self.e_upper.is_finite_value()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSchedule<S: Real> {
    /// Total budget in clock seconds.
    pub t_max: f64,
    /// Budget of each inner RRT call.
    pub per_call: f64,
    /// Binary search stops once `e_upper - e_lower` falls below this.
    pub e_epsilon: S,
    /// Estimates at or below this count as zero.
    pub e_zero_tol: S,
    /// Fallback upper end for binary search when the first unconstrained run fails.
    pub initial_upper: Option<S>,
}

impl<S: Real> SearchSchedule<S> {
    pub fn new(t_max: f64) -> Self {
        SearchSchedule {
            t_max,
            per_call: t_max / 20.0,
            e_epsilon: S::lit(1e-3),
            e_zero_tol: S::lit(1e-4),
            initial_upper: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::usage("t_max must be > 0"));
        }
        if !(self.per_call > 0.0 && self.per_call <= self.t_max) {
            return Err(Error::usage("per-call budget must lie in (0, t_max]"));
        }
        if !(self.e_epsilon > S::ZERO) {
            return Err(Error::usage("e_epsilon must be > 0"));
        }
        if !(self.e_zero_tol > S::ZERO) {
            return Err(Error::usage("e_zero_tol must be > 0"));
        }
        if let Some(cap) = self.initial_upper {
            if !(cap > S::ZERO) {
                return Err(Error::usage("initial upper bound must be > 0"));
            }
        }
        Ok(())
    }
}

/// Conservative search: shrink the sublevel set to the cost of each path found.
pub fn conservative_search<S: Real>(
    problem: &PlanningProblem<S>,
    schedule: &SearchSchedule<S>,
    params: &PlannerParams<S>,
) -> Result<EscapeEstimate<S>> {
    schedule.validate()?;
    params.validate()?;
    let mut e_hat = S::INFINITY;
    let mut witness = None;
    let mut trace = Vec::new();
    let mut t = 0.0;
    let mut iterations = 0;
    let mut reason = Termination::Budget;

    while t < schedule.t_max {
        let budget = schedule.per_call.min(schedule.t_max - t);
        let run = params
            .with_seed(derive_seed(params.seed, iterations as u64))
            .with_budget(budget);
        let outcome = rrt_search(problem, e_hat, &run)?;
        t += outcome.elapsed;
        iterations += 1;
        if let Some(path) = outcome.path {
            if path.cost() < e_hat {
                e_hat = path.cost();
                witness = Some(path);
            }
        }
        trace.push(TraceRow {
            seconds: t,
            e_upper: e_hat,
            e_lower: None,
        });
        if e_hat <= schedule.e_zero_tol {
            reason = Termination::Converged;
            break;
        }
    }

    Ok(EscapeEstimate {
        e_upper: e_hat,
        e_lower: None,
        witness,
        trace,
        iterations,
        reason,
        elapsed: t,
    })
}

/// Binary search: bisect between an advisory lower end and a certified upper end.
pub fn binary_search<S: Real>(
    problem: &PlanningProblem<S>,
    schedule: &SearchSchedule<S>,
    params: &PlannerParams<S>,
) -> Result<EscapeEstimate<S>> {
    schedule.validate()?;
    params.validate()?;
    let mut e_lower = S::ZERO;
    let mut e_upper = S::INFINITY;
    let mut witness: Option<PathCandidate<S>> = None;
    let mut trace = Vec::new();
    let mut t = 0.0;
    let mut iterations = 0;
    let mut reason = Termination::Budget;

    let call =
        |e_sublevel: S, t: &mut f64, iterations: &mut usize| -> Result<Option<PathCandidate<S>>> {
            let budget = schedule.per_call.min(schedule.t_max - *t);
            let run = params
                .with_seed(derive_seed(params.seed, *iterations as u64))
                .with_budget(budget);
            let outcome = rrt_search(problem, e_sublevel, &run)?;
            *t += outcome.elapsed;
            *iterations += 1;
            Ok(outcome.path)
        };

    // Calibrate the upper end with an unconstrained run. Without a path, fall
    // back to the user cap, or keep retrying when there is none.
    while t < schedule.t_max {
        let found = call(S::INFINITY, &mut t, &mut iterations)?;
        let done = found.is_some() || schedule.initial_upper.is_some();
        match found {
            Some(path) => {
                e_upper = path.cost();
                witness = Some(path);
            }
            None => e_upper = schedule.initial_upper.unwrap_or(S::INFINITY),
        }
        trace.push(TraceRow {
            seconds: t,
            e_upper: certified(e_upper, &witness),
            e_lower: Some(e_lower),
        });
        if done {
            break;
        }
    }

    while t < schedule.t_max && e_upper.is_finite_value() {
        if witness.is_some() && e_upper <= schedule.e_zero_tol {
            reason = Termination::Converged;
            break;
        }
        if e_upper - e_lower < schedule.e_epsilon {
            reason = Termination::IntervalCollapsed;
            break;
        }
        let mid = (e_upper + e_lower) * S::HALF;
        match call(mid, &mut t, &mut iterations)? {
            Some(path) => {
                let c = path.cost();
                if c < e_lower {
                    e_lower = S::ZERO;
                }
                e_upper = c;
                witness = Some(path);
            }
            None => e_lower = mid,
        }
        trace.push(TraceRow {
            seconds: t,
            e_upper: certified(e_upper, &witness),
            e_lower: Some(e_lower),
        });
    }
    if witness.is_some() && e_upper <= schedule.e_zero_tol {
        reason = Termination::Converged;
    }

    Ok(EscapeEstimate {
        e_upper: certified(e_upper, &witness),
        e_lower: Some(e_lower),
        witness,
        trace,
        iterations,
        reason,
        elapsed: t,
    })
}

/// The upper end counts only once a path backs it.
fn certified<S: Real>(e_upper: S, witness: &Option<PathCandidate<S>>) -> S {
    if witness.is_some() {
        e_upper
    } else {
        S::INFINITY
    }
}

/// Runs the energy-biased RRT* for the whole budget and reports the lowest
/// certified energy cost among its anytime paths.
pub fn optimal_estimate<S: Real>(
    problem: &PlanningProblem<S>,
    schedule: &SearchSchedule<S>,
    params: &PlannerParams<S>,
) -> Result<EscapeEstimate<S>> {
    schedule.validate()?;
    let run = params.with_budget(schedule.t_max);
    let mut e_hat = S::INFINITY;
    let mut witness: Option<PathCandidate<S>> = None;
    let mut trace = Vec::new();
    let result = optimal_search(problem, &run, |record| {
        let c = record.path.cost();
        if c < e_hat {
            e_hat = c;
            witness = Some(record.path.clone());
        }
        trace.push(TraceRow {
            seconds: record.time,
            e_upper: e_hat,
            e_lower: None,
        });
        if e_hat <= schedule.e_zero_tol {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    let reason = if e_hat <= schedule.e_zero_tol {
        Termination::Converged
    } else {
        Termination::Budget
    };
    Ok(EscapeEstimate {
        e_upper: e_hat,
        e_lower: None,
        witness,
        trace,
        iterations: result.iterations,
        reason,
        elapsed: result.elapsed,
    })
}

pub fn estimate<S: Real>(
    algorithm: Algorithm,
    problem: &PlanningProblem<S>,
    schedule: &SearchSchedule<S>,
    params: &PlannerParams<S>,
) -> Result<EscapeEstimate<S>> {
    match algorithm {
        Algorithm::Conservative => conservative_search(problem, schedule, params),
        Algorithm::Binary => binary_search(problem, schedule, params),
        Algorithm::Optimal => optimal_estimate(problem, schedule, params),
    }
}

#[derive(Clone, Debug)]
pub struct FrameSummary<S: Real> {
    /// Mean of the finite estimates; `None` when every run failed to escape.
    pub mean: Option<S>,
    /// Sample standard deviation of the finite estimates (zero for fewer than two).
    pub std: Option<S>,
    pub finite: usize,
    pub infinite: usize,
    /// `(seed, estimate)` per run, ordered by seed.
    pub runs: Vec<(u64, EscapeEstimate<S>)>,
}

/// Estimates every frame of a quasi-static sequence independently. Run `k`
/// of every frame uses seed `params.seed + k`.
pub fn analyze_sequence<S: Real>(
    frames: &[Scene<S>],
    algorithm: Algorithm,
    schedule: &SearchSchedule<S>,
    params: &PlannerParams<S>,
    runs_per_frame: usize,
) -> Result<Vec<FrameSummary<S>>> {
    if frames.is_empty() {
        return Err(Error::usage("sequence has no frames"));
    }
    if runs_per_frame == 0 {
        return Err(Error::usage("runs per frame must be >= 1"));
    }
    let problems = frames
        .iter()
        .enumerate()
        .map(|(i, scene)| {
            PlanningProblem::new(scene.clone()).map_err(|_| {
                Error::scene(
                    format!("frames[{i}].init"),
                    "initial configuration is in collision",
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;

    problems
        .iter()
        .map(|problem| {
            let runs = (0..runs_per_frame as u64)
                .map(|k| {
                    let seed = params.seed.wrapping_add(k);
                    estimate(algorithm, problem, schedule, &params.with_seed(seed))
                        .map(|e| (seed, e))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize(runs))
        })
        .collect()
}

/// Mean and sample standard deviation (zero for a single value); `None` when empty.
pub fn sample_stats<S: Real>(values: &[S]) -> Option<(S, S)> {
    if values.is_empty() {
        return None;
    }
    let n = S::lit(values.len() as f64);
    let mean = values.iter().fold(S::ZERO, |a, &v| a + v) / n;
    if values.len() < 2 {
        return Some((mean, S::ZERO));
    }
    let ss = values
        .iter()
        .fold(S::ZERO, |a, &v| a + (v - mean) * (v - mean));
    Some((mean, (ss / (n - S::ONE)).sqrt()))
}

fn summarize<S: Real>(mut runs: Vec<(u64, EscapeEstimate<S>)>) -> FrameSummary<S> {
    runs.sort_by_key(|(seed, _)| *seed);
    let values: Vec<S> = runs
        .iter()
        .map(|(_, e)| e.e_upper)
        .filter(|e| e.is_finite_value())
        .collect();
    let finite = values.len();
    let (mean, std) = match sample_stats(&values) {
        Some((mean, std)) => (Some(mean), Some(std)),
        None => (None, None),
    };
    FrameSummary {
        mean,
        std,
        finite,
        infinite: runs.len() - finite,
        runs,
    }
}
