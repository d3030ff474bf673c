use std::fs;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use escape_energy::estimators::{analyze_sequence, estimate as run_estimator, sample_stats};
use escape_energy::io::records::finite;
use escape_energy::io::{
    load_scene, write_csv, CellRecord, FrameRecord, GammaRecord, RunRecord, TraceRecord,
};
use escape_energy::oracle::{generate_random_scene, grid_escape_energy, normalized_total_cost};
use escape_energy::planners::optimal_search;
use escape_energy::{
    ClockMode, GridProblem, LoadedScene, PlannerParams, PlanningProblem, Scene, SearchSchedule,
};

use crate::args::{EstimateArgs, GammaArgs, OracleArgs, RunFlags, SequenceArgs};
use crate::failure::Failure;

type Outcome = Result<(), Failure>;

fn load(path: &Path) -> Result<LoadedScene, Failure> {
    load_scene(path).map_err(|err| match err {
        escape_energy::Error::Io(io) => {
            Failure::Scene(format!("cannot read {}: {io}", path.display()))
        }
        other => Failure::Scene(format!("{}: {other}", path.display())),
    })
}

fn clock(wall: bool) -> ClockMode {
    if wall {
        ClockMode::Wall
    } else {
        ClockMode::default()
    }
}

fn schedule(run: &RunFlags) -> Result<SearchSchedule, Failure> {
    let mut schedule = SearchSchedule::new(run.time_budget);
    if let Some(per_call) = run.per_call_budget {
        schedule.per_call = per_call;
    }
    schedule.validate()?;
    Ok(schedule)
}

fn params(loaded: &LoadedScene, run: &RunFlags) -> Result<PlannerParams, Failure> {
    let mut params = loaded.planner_params();
    if let Some(gamma) = run.gamma {
        params.gamma = gamma;
    }
    if let Some(prune) = run.prune {
        params.prune = prune;
    }
    params.clock = clock(run.wall_clock);
    params.validate()?;
    Ok(params)
}

/// Header comments: the timestamp line is the only one that varies between reruns.
fn header(command: &str, settings: Vec<String>) -> Vec<String> {
    let mut lines = vec![format!(
        "generated={}",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    )];
    lines.push(format!("command={command}"));
    lines.extend(settings);
    lines
}

fn run_settings(run: &RunFlags, schedule: &SearchSchedule, params: &PlannerParams) -> Vec<String> {
    vec![
        format!("time_budget={}", schedule.t_max),
        format!("per_call_budget={}", schedule.per_call),
        format!("gamma={}", params.gamma),
        format!("prune={}", params.prune),
        format!("clock={}", if run.wall_clock { "wall" } else { "work" }),
    ]
}

fn emit<T: serde::Serialize>(out: Option<&Path>, comments: &[String], rows: &[T]) -> Outcome {
    let mut buffer = Vec::new();
    write_csv(&mut buffer, comments, rows)?;
    match out {
        Some(path) => fs::write(path, &buffer)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&buffer)
            .map_err(|e| Failure::Runtime(format!("cannot write to standard output: {e}"))),
    }
}

pub fn estimate(args: &EstimateArgs) -> Outcome {
    let loaded = load(&args.scene)?;
    let schedule = schedule(&args.run)?;
    let params = params(&loaded, &args.run)?;
    let problem = PlanningProblem::new(loaded.scene.clone())?;

    let mut runs = Vec::new();
    let mut trace = Vec::new();
    for seed in args.seeds.list() {
        let est = run_estimator(args.algo, &problem, &schedule, &params.with_seed(seed))?;
        trace.extend(est.trace.iter().map(|row| TraceRecord {
            seed,
            seconds: row.seconds,
            e_hat: finite(row.e_upper),
            e_lower: row.e_lower,
        }));
        runs.push(RunRecord {
            seed,
            algorithm: args.algo.name().to_string(),
            seconds: est.elapsed,
            e_hat: finite(est.e_upper),
            escaped: est.escaped(),
            e_lower: est.e_lower,
            iterations: est.iterations,
            reason: est.reason.name().to_string(),
        });
    }

    let mut settings = vec![
        format!("scene={}", loaded.name()),
        format!("algorithm={}", args.algo),
    ];
    settings.extend(run_settings(&args.run, &schedule, &params));
    let comments = header("estimate", settings);
    if let Some(path) = &args.trace {
        emit(Some(path), &comments, &trace)?;
    }
    emit(args.out.as_deref(), &comments, &runs)
}

fn frame_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| {
        Failure::Usage(format!(
            "cannot read frames directory {}: {e}",
            dir.display()
        ))
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "scene"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Usage(format!(
            "no .scene files in {}",
            dir.display()
        )));
    }
    Ok(files)
}

pub fn sequence(args: &SequenceArgs) -> Outcome {
    let files = frame_files(&args.frames)?;
    let frames = files
        .iter()
        .map(|f| load(f))
        .collect::<Result<Vec<_>, _>>()?;
    let first = &frames[0];
    for (i, frame) in frames.iter().enumerate().skip(1) {
        let (a, b) = (&first.document, &frame.document);
        let field = if a.object != b.object {
            Some("object")
        } else if a.obstacles != b.obstacles {
            Some("obstacles")
        } else if a.space != b.space {
            Some("space")
        } else {
            None
        };
        if let Some(field) = field {
            return Err(Failure::Scene(format!(
                "frame {i} ({}) differs from frame 0 in `{field}`; frames may only differ in `init`",
                files[i].display()
            )));
        }
    }

    let schedule = schedule(&args.run)?;
    let params = params(first, &args.run)?.with_seed(args.seed);
    let scenes: Vec<Scene> = frames.iter().map(|f| f.scene.clone()).collect();
    let summaries = analyze_sequence(&scenes, args.algo, &schedule, &params, args.runs)?;
    let rows: Vec<FrameRecord> = summaries
        .iter()
        .zip(&frames)
        .enumerate()
        .map(|(i, (s, frame))| FrameRecord {
            frame: i,
            scene: frame.name().to_string(),
            mean: s.mean,
            std: s.std,
            n_finite: s.finite,
            n_infinite: s.infinite,
        })
        .collect();

    let mut settings = vec![
        format!("frames={}", files.len()),
        format!("algorithm={}", args.algo),
        format!("runs={}", args.runs),
        format!("seed={}", args.seed),
    ];
    settings.extend(run_settings(&args.run, &schedule, &params));
    emit(args.out.as_deref(), &header("sequence", settings), &rows)
}

pub fn gamma_study(args: &GammaArgs) -> Outcome {
    if let Some(g) = args.gamma.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(Failure::Usage(format!("gamma must be >= 0, got {g}")));
    }
    if !(args.time_budget > 0.0 && args.time_budget.is_finite()) {
        return Err(Failure::Usage("time budget must be > 0".into()));
    }
    let scenes = args
        .seeds
        .0
        .iter()
        .map(|&seed| {
            generate_random_scene::<f64>(seed, args.obstacles, args.resolution).map(|s| (seed, s))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for &gamma in &args.gamma {
        let mut costs = Vec::new();
        for (seed, random) in &scenes {
            let problem = PlanningProblem::new(random.scene.clone())?;
            let mut params = PlannerParams::for_space(random.scene.space())
                .with_seed(*seed)
                .with_budget(args.time_budget);
            params.gamma = gamma;
            params.clock = clock(args.wall_clock);
            let run = optimal_search(&problem, &params, |_| ControlFlow::Continue(()))?;
            if let Some(best) = run.records.last() {
                costs.push(normalized_total_cost(
                    &best.path,
                    random.e_star,
                    gamma,
                    random.scene.space(),
                )?);
            }
        }
        let stats = sample_stats(&costs);
        rows.push(GammaRecord {
            gamma,
            mean: stats.map(|s| s.0),
            std: stats.map(|s| s.1),
            n: costs.len(),
        });
    }

    let settings = vec![
        format!("scenes={}", scenes.len()),
        format!("obstacles={}", args.obstacles),
        format!("resolution={}", args.resolution),
        format!("time_budget={}", args.time_budget),
        format!("clock={}", if args.wall_clock { "wall" } else { "work" }),
    ];
    emit(args.out.as_deref(), &header("gamma-study", settings), &rows)
}

pub fn oracle(args: &OracleArgs) -> Outcome {
    let loaded = load(&args.scene)?;
    let grid = GridProblem::from_scene(&loaded.scene, args.resolution)?;
    let e = grid_escape_energy(&grid);
    if e.is_finite() {
        println!("{e}");
    } else {
        println!("inf");
    }
    if let Some(path) = &args.out {
        let rows: Vec<CellRecord> = (0..grid.len())
            .map(|cell| {
                let index = grid.unflat(cell);
                let center = grid.center(cell).unwrap_or_default();
                CellRecord {
                    i: index[0],
                    j: index.get(1).copied().unwrap_or(0),
                    k: index.get(2).copied().unwrap_or(0),
                    x: center.x,
                    y: center.y,
                    z: center.z,
                    energy: finite(grid.energies()[cell]),
                    goal: grid.is_goal(cell),
                }
            })
            .collect();
        let settings = vec![
            format!("scene={}", loaded.name()),
            format!("resolution={}", args.resolution),
            format!(
                "escape_energy={}",
                if e.is_finite() {
                    e.to_string()
                } else {
                    "inf".into()
                }
            ),
        ];
        emit(Some(path), &header("oracle", settings), &rows)?;
    }
    Ok(())
}
