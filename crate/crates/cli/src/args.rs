use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use escape_energy::Algorithm;

#[derive(Debug, Parser)]
#[command(
    name = "escape-energy",
    version,
    about = "Estimate the escape energy of objects in soft fixtures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one estimator on a scene for each seed.
    Estimate(EstimateArgs),
    /// Estimate every frame of a quasi-static sequence.
    Sequence(SequenceArgs),
    /// Normalized total cost of optimal search on random scenes, per gamma.
    GammaStudy(GammaArgs),
    /// Exact grid escape energy of a point-mass scene.
    Oracle(OracleArgs),
}

/// Planner and budget flags shared by the estimating commands.
#[derive(Debug, Args)]
pub struct RunFlags {
    /// Total budget per run, in clock seconds.
    #[arg(long, default_value_t = 30.0)]
    pub time_budget: f64,
    /// Budget of each inner RRT call; defaults to a twentieth of the total.
    #[arg(long)]
    pub per_call_budget: Option<f64>,
    /// Length weight of the hybrid cost used by optimal search.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Override the scene's tree pruning setting for optimal search.
    #[arg(long)]
    pub prune: Option<bool>,
    /// Measure budgets in wall-clock seconds instead of deterministic work units.
    #[arg(long)]
    pub wall_clock: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub run: RunFlags,
    #[command(flatten)]
    pub seeds: SeedFlags,
    /// Companion CSV with the estimate after every iteration.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedFlags {
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated seeds or a half-open range `a..b`.
    #[arg(long, value_parser = parse_seeds)]
    pub seeds: Option<SeedList>,
}

impl SeedFlags {
    pub fn list(&self) -> Vec<u64> {
        match (&self.seeds, self.seed) {
            (Some(list), _) => list.0.clone(),
            (None, Some(seed)) => vec![seed],
            (None, None) => vec![0],
        }
    }
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    /// Directory of `.scene` frames, taken in file-name order.
    #[arg(long, alias = "scene")]
    pub frames: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub run: RunFlags,
    /// Base seed; run `k` of every frame uses `seed + k`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    /// Scene seeds; each seed generates one random scene and drives its run.
    #[arg(long, value_parser = parse_seeds, default_value = "0..8")]
    pub seeds: SeedList,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.001, 0.01, 0.1])]
    pub gamma: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub time_budget: f64,
    /// Obstacles per generated scene.
    #[arg(long, default_value_t = 4)]
    pub obstacles: usize,
    /// Oracle cells per axis for the reference escape energy.
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    #[arg(long)]
    pub wall_clock: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    /// Per-cell energy dump.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_algorithm(text: &str) -> Result<Algorithm, String> {
    text.parse()
        .map_err(|e: escape_energy::Error| e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedList(pub Vec<u64>);

pub fn parse_seeds(text: &str) -> Result<SeedList, String> {
    let bad = |_| format!("invalid seed list '{text}'");
    let seeds: Vec<u64> = match text.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (
                a.trim().parse::<u64>().map_err(bad)?,
                b.trim().parse::<u64>().map_err(bad)?,
            );
            (a..b).collect()
        }
        None => text
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(bad))
            .collect::<Result<_, _>>()?,
    };
    if seeds.is_empty() {
        return Err(format!("seed list '{text}' is empty"));
    }
    Ok(SeedList(seeds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(parse_seeds("3").unwrap().0, vec![3]);
        assert_eq!(parse_seeds("1, 4,2").unwrap().0, vec![1, 4, 2]);
        assert_eq!(parse_seeds("2..5").unwrap().0, vec![2, 3, 4]);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("a,b").is_err());
    }
}
