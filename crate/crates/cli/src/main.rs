use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use react_core::env::{Environment, GridSpec};
use react_core::experiment::{Experiment, RunConfig, SweepGrid};
use react_core::policy::{
    save_policy, train_q_learning, train_until_success, LoadedPolicy, QLearningConfig,
};
use react_core::report::{aggregate_bundles, read_bundle, write_report, RunMode};
use react_core::rollout::{self, Outcome};
use react_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "react",
    version,
    about = "Evolve diverse demonstrations of a fixed policy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tabular Q-learning policy on a grid and write policy files.
    Train(TrainArgs),
    /// Run the evolutionary search for every configured seed.
    Evolve(RunArgs),
    /// Evaluate only the random initial population for every configured seed.
    Baseline(RunArgs),
    /// Aggregate run bundles into a side-by-side report.
    Report(ReportArgs),
    /// Run a config over a Cartesian grid of evolution parameters.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Grid preset name.
    #[arg(long, conflicts_with = "layout", default_value = "flatgrid11")]
    env: String,
    /// Grid layout file instead of a preset.
    #[arg(long)]
    layout: Option<PathBuf>,
    #[arg(long, default_value_t = 50_000)]
    steps: usize,
    /// Extra snapshot after this many steps; repeatable.
    #[arg(long = "checkpoint")]
    checkpoints: Vec<usize>,
    /// Stop as soon as the greedy canonical-start rollout reaches the target.
    #[arg(long, conflicts_with = "checkpoints")]
    until_success: bool,
    #[arg(long, default_value_t = 100)]
    check_every: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value = "policies")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Override the configured seed list.
    #[arg(long = "seed", value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Bundle directories, or directories containing bundles.
    #[arg(required = true)]
    bundles: Vec<PathBuf>,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// TOML file with the parameter lists.
    grid: PathBuf,
    /// Also run the baseline for every cell.
    #[arg(long)]
    baseline: bool,
    #[arg(long = "seed", value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Evolve(a) => run(a, RunMode::Evolve),
        Command::Baseline(a) => run(a, RunMode::Baseline),
        Command::Report(a) => report(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn train(a: TrainArgs) -> Result<()> {
    let spec = match &a.layout {
        Some(path) => GridSpec::load(path)?,
        None => GridSpec::preset(&a.env)?,
    };
    let config = QLearningConfig {
        steps: a.steps,
        seed: a.seed,
        temperature: a.temperature,
        ..Default::default()
    };
    create_dir(&a.out)?;
    let (steps, policy) = if a.until_success {
        train_until_success(&spec, &config, a.check_every)?
    } else {
        let run = train_q_learning(&spec, &config, &a.checkpoints)?;
        for (step, p) in &run.checkpoints {
            let path = a.out.join(format!("policy-{step}.json"));
            save_policy(&LoadedPolicy::Tabular(p.clone()), &path)?;
            println!("wrote {}", path.display());
        }
        (a.steps, run.policy)
    };
    let path = a.out.join("policy.json");
    save_policy(&LoadedPolicy::Tabular(policy.clone()), &path)?;
    println!("wrote {} after {steps} steps", path.display());

    let greedy = rollout::generate(&spec, &policy, spec.canonical_start())?;
    let verdict = match greedy.outcome {
        Outcome::ReachedTarget => "reached the target",
        Outcome::Failed => "fell into a hole",
        Outcome::Truncated => "timed out",
    };
    println!(
        "canonical-start rollout {verdict}: return {}, length {}",
        greedy.episode_return,
        greedy.length()
    );
    Ok(())
}

fn load_config(path: &Path, seeds: Vec<u64>, out: Option<PathBuf>) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if !seeds.is_empty() {
        config.seeds = Some(seeds);
    }
    if let Some(out) = out {
        config.output = std::env::current_dir()
            .map_err(|e| Error::Io {
                path: ".".into(),
                source: e,
            })?
            .join(out);
    }
    config.validate()?;
    Ok(config)
}

fn run_modes(exp: &Experiment, modes: &[RunMode]) -> Result<()> {
    for &mode in modes {
        for dir in exp.run_all(mode)? {
            println!("wrote {}", dir.display());
        }
    }
    Ok(())
}

fn run(a: RunArgs, mode: RunMode) -> Result<()> {
    let exp = Experiment::prepare(load_config(&a.config, a.seeds, a.out)?)?;
    run_modes(&exp, &[mode])
}

/// Expands directories that hold bundles further down into the bundles themselves.
fn find_bundles(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.join("manifest.json").is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let entries = std::fs::read_dir(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for d in dirs {
        find_bundles(&d, out)?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let mut dirs = Vec::new();
    for p in &a.bundles {
        let before = dirs.len();
        find_bundles(p, &mut dirs)?;
        if dirs.len() == before {
            return Err(Error::Config(format!(
                "no run bundles under {}",
                p.display()
            )));
        }
    }
    let bundles = dirs
        .iter()
        .map(|d| read_bundle(d))
        .collect::<Result<Vec<_>>>()?;
    let report = aggregate_bundles(&bundles)?;
    for m in &report.modes {
        println!(
            "{}: {} seeds, {} individuals, return median {} IQR {}, length median {} IQR {}",
            m.mode.as_str(),
            m.seeds.len(),
            m.individuals,
            m.returns.median,
            m.returns.iqr(),
            m.lengths.median,
            m.lengths.iqr()
        );
    }
    for path in write_report(&report, &a.out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let base = load_config(&a.config, a.seeds, a.out)?;
    let grid = SweepGrid::load(&a.grid)?;
    let cells = grid.cells(&base)?;
    if cells.is_empty() {
        println!("empty parameter grid; nothing to run");
        return Ok(());
    }
    let modes: &[RunMode] = if a.baseline {
        &[RunMode::Evolve, RunMode::Baseline]
    } else {
        &[RunMode::Evolve]
    };
    // the policy is shared by every cell
    let base = Experiment::prepare(base)?;
    for (name, config) in cells {
        println!("cell {name}");
        let exp = Experiment {
            config,
            environment: base.environment.clone(),
            policy: base.policy.clone(),
        };
        run_modes(&exp, modes)?;
    }
    Ok(())
}
