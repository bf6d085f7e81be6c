//! Replayable experiment runs driven by a TOML config file.
//!
//! ```toml
//! seeds = [0, 1, 2]
//! output = "runs/flat"
//!
//! [environment]
//! kind = "grid"            # or "reach"
//! preset = "flatgrid11"    # or layout = "my_layout.txt"
//!
//! [policy]
//! path = "policy.json"     # or a [policy.train] / [policy.gaussian] table
//!
//! [evolution]
//! population_size = 10
//! generations = 40
//! ```
//!
//! Relative paths are resolved against the directory holding the config
//! file. Each seed of each mode writes a bundle to
//! `<output>/<mode>/seed-<seed>`; the bundle's `config.toml` replays that
//! run into the same directory.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::env::{GridSpec, ReachSpec};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, Evolver, RunResult};
use crate::policy::{
    load_policy, policy_to_json, train_q_learning, train_until_success, GaussianController,
    LoadedPolicy, QLearningConfig,
};
use crate::report::{export_bundle, BundleMeta, EnvironmentInfo, RunMode};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_reward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentConfig {
    Grid(GridConfig),
    Reach(ReachSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Train for exactly `q_learning.steps` steps.
    #[default]
    Steps,
    /// Stop at the first check where the greedy canonical-start rollout succeeds.
    FirstSuccess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default = "default_check_every")]
    pub check_every: usize,
    #[serde(default)]
    pub q_learning: QLearningConfig,
}

fn default_check_every() -> usize {
    100
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            stop: StopRule::Steps,
            check_every: default_check_every(),
            q_learning: QLearningConfig::default(),
        }
    }
}

/// Exactly one of the three sources must be given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianController>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seeds, one run per seed. Defaults to `[evolution.seed]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub environment: EnvironmentConfig,
    pub policy: PolicyConfig,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.evolution.validate()?;
        if let Some(seeds) = &self.seeds {
            let mut sorted = seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != seeds.len() {
                return Err(Error::Config("seeds must be distinct".into()));
            }
        }
        match &self.environment {
            EnvironmentConfig::Grid(g) => {
                if g.preset.is_some() == g.layout.is_some() {
                    return Err(Error::Config(
                        "grid environment needs exactly one of `preset` or `layout`".into(),
                    ));
                }
            }
            EnvironmentConfig::Reach(r) => r.validate()?,
        }
        let p = &self.policy;
        let sources = [p.path.is_some(), p.train.is_some(), p.gaussian.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::Config(
                "policy needs exactly one of `path`, `train` or `gaussian`".into(),
            ));
        }
        match (&self.environment, p) {
            (
                EnvironmentConfig::Grid(_),
                PolicyConfig {
                    gaussian: Some(_), ..
                },
            ) => Err(Error::Config(
                "a gaussian controller cannot drive a grid environment".into(),
            )),
            (EnvironmentConfig::Reach(_), PolicyConfig { train: Some(_), .. }) => Err(
                Error::Config("training is only available for grid environments".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds
            .clone()
            .unwrap_or_else(|| vec![self.evolution.seed])
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn bundle_dir(&self, mode: RunMode, seed: u64) -> PathBuf {
        self.output_dir()
            .join(mode.as_str())
            .join(format!("seed-{seed}"))
    }
}

#[derive(Debug, Clone)]
pub enum ResolvedEnvironment {
    Grid(GridSpec),
    Reach(ReachSpec),
}

impl ResolvedEnvironment {
    pub fn info(&self) -> EnvironmentInfo {
        match self {
            ResolvedEnvironment::Grid(g) => EnvironmentInfo::Grid {
                name: g.name().to_string(),
                height: g.height(),
                width: g.width(),
            },
            ResolvedEnvironment::Reach(r) => EnvironmentInfo::Reach {
                name: r.name().to_string(),
                dims: r.dims(),
            },
        }
    }
}

pub fn build_environment(config: &RunConfig) -> Result<ResolvedEnvironment> {
    match &config.environment {
        EnvironmentConfig::Grid(g) => {
            let mut spec = match (&g.preset, &g.layout) {
                (Some(p), None) => GridSpec::preset(p)?,
                (None, Some(path)) => GridSpec::load(&config.resolve(path))?,
                _ => unreachable!("validated"),
            };
            if let Some(v) = g.target_reward {
                spec.target_reward = v;
            }
            if let Some(v) = g.hole_penalty {
                spec.hole_penalty = v;
            }
            if let Some(v) = g.step_cost {
                spec.step_cost = v;
            }
            if let Some(v) = g.max_steps {
                if v == 0 {
                    return Err(Error::Config("max_steps must be at least 1".into()));
                }
                spec.max_steps = v;
            }
            Ok(ResolvedEnvironment::Grid(spec))
        }
        EnvironmentConfig::Reach(r) => Ok(ResolvedEnvironment::Reach(r.clone())),
    }
}

/// Trains or loads the configured policy and checks it fits the environment.
pub fn build_policy(config: &RunConfig, env: &ResolvedEnvironment) -> Result<LoadedPolicy> {
    let p = &config.policy;
    let policy = if let Some(path) = &p.path {
        load_policy(&config.resolve(path))?
    } else if let Some(g) = &p.gaussian {
        g.validate()?;
        LoadedPolicy::GaussianController(g.clone())
    } else if let (Some(t), ResolvedEnvironment::Grid(spec)) = (&p.train, env) {
        let table = match t.stop {
            StopRule::Steps => train_q_learning(spec, &t.q_learning, &[])?.policy,
            StopRule::FirstSuccess => train_until_success(spec, &t.q_learning, t.check_every)?.1,
        };
        LoadedPolicy::Tabular(table)
    } else {
        return Err(Error::Config(
            "policy source does not fit the environment".into(),
        ));
    };
    match (&policy, env) {
        (LoadedPolicy::Tabular(t), ResolvedEnvironment::Grid(g)) => t.check_compatible(g)?,
        (LoadedPolicy::GaussianController(_), ResolvedEnvironment::Reach(_)) => {}
        (p, _) => {
            return Err(Error::PolicyMismatch(format!(
                "{} policy cannot drive environment {:?}",
                p.kind(),
                env.info()
            )))
        }
    }
    Ok(policy)
}

/// A config with its environment built and policy resolved, ready to run seeds.
pub struct Experiment {
    pub config: RunConfig,
    pub environment: ResolvedEnvironment,
    pub policy: LoadedPolicy,
}

impl Experiment {
    pub fn prepare(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let environment = build_environment(&config)?;
        let policy = build_policy(&config, &environment)?;
        Ok(Self {
            config,
            environment,
            policy,
        })
    }

    pub fn evolution_config(&self, seed: u64) -> EvolutionConfig {
        EvolutionConfig {
            seed,
            ..self.config.evolution.clone()
        }
    }

    /// The config written into a bundle: a single seed, the policy stored
    /// next to it and the output pointing back at the bundle's own tree.
    pub fn snapshot(&self, seed: u64) -> Result<RunConfig> {
        let mut snap = self.config.clone();
        snap.seeds = Some(vec![seed]);
        snap.evolution.seed = seed;
        snap.output = PathBuf::from("../..");
        snap.policy = PolicyConfig {
            path: Some(PathBuf::from("policy.json")),
            ..Default::default()
        };
        if let EnvironmentConfig::Grid(g) = &mut snap.environment {
            if let Some(layout) = &g.layout {
                let abs = self.config.resolve(layout);
                g.layout = Some(std::fs::canonicalize(&abs).map_err(|e| Error::io(abs, e))?);
            }
        }
        Ok(snap)
    }

    /// Runs one seed and writes its bundle.
    pub fn run_seed(&self, mode: RunMode, seed: u64) -> Result<PathBuf> {
        let dir = self.config.bundle_dir(mode, seed);
        let meta = BundleMeta {
            mode,
            seed,
            environment: self.environment.info(),
            config_toml: self.snapshot(seed)?.to_toml()?,
            policy_json: {
                let mut s = policy_to_json(&self.policy)?;
                s.push('\n');
                s
            },
        };
        let cfg = self.evolution_config(seed);
        match (&self.environment, &self.policy) {
            (ResolvedEnvironment::Grid(env), LoadedPolicy::Tabular(p)) => {
                export_bundle(&execute(env, p, cfg, mode)?, &meta, &dir)?
            }
            (ResolvedEnvironment::Reach(env), LoadedPolicy::GaussianController(p)) => {
                export_bundle(&execute(env, p, cfg, mode)?, &meta, &dir)?
            }
            _ => unreachable!("checked in build_policy"),
        }
        Ok(dir)
    }

    /// Runs every configured seed in parallel; returns bundle directories in seed order.
    pub fn run_all(&self, mode: RunMode) -> Result<Vec<PathBuf>> {
        self.config
            .seeds()
            .par_iter()
            .map(|&s| self.run_seed(mode, s))
            .collect()
    }
}

pub fn execute<E, P>(
    env: &E,
    policy: &P,
    config: EvolutionConfig,
    mode: RunMode,
) -> Result<RunResult<E>>
where
    E: Environment,
    P: crate::policy::Policy<E>,
{
    let evolver = Evolver::new(env, policy, config)?;
    match mode {
        RunMode::Evolve => evolver.run(),
        RunMode::Baseline => evolver.baseline(),
    }
}

/// Parameter grid for sweeps; every non-empty list is one axis of the
/// Cartesian product. `operators` lists `[crossover, mutation]` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub population_size: Vec<usize>,
    pub generations: Vec<usize>,
    pub crossover_probability: Vec<f64>,
    pub mutation_probability: Vec<f64>,
    pub operators: Vec<[f64; 2]>,
    pub bits_per_dim: Vec<u32>,
}

type Setter = Box<dyn Fn(&mut EvolutionConfig)>;

impl SweepGrid {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("sweep grid: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn axes(&self) -> Vec<Vec<(String, Setter)>> {
        let mut axes: Vec<Vec<(String, Setter)>> = Vec::new();
        let mut push = |axis: Vec<(String, Setter)>| {
            if !axis.is_empty() {
                axes.push(axis);
            }
        };
        push(
            self.population_size
                .iter()
                .map(|&v| {
                    (
                        format!("n{v}"),
                        Box::new(move |c: &mut EvolutionConfig| c.population_size = v) as Setter,
                    )
                })
                .collect(),
        );
        push(
            self.generations
                .iter()
                .map(|&v| {
                    (
                        format!("g{v}"),
                        Box::new(move |c: &mut EvolutionConfig| c.generations = v) as Setter,
                    )
                })
                .collect(),
        );
        push(
            self.crossover_probability
                .iter()
                .map(|&v| {
                    (
                        format!("pc{v}"),
                        Box::new(move |c: &mut EvolutionConfig| c.crossover_probability = v)
                            as Setter,
                    )
                })
                .collect(),
        );
        push(
            self.mutation_probability
                .iter()
                .map(|&v| {
                    (
                        format!("pm{v}"),
                        Box::new(move |c: &mut EvolutionConfig| c.mutation_probability = v)
                            as Setter,
                    )
                })
                .collect(),
        );
        push(
            self.operators
                .iter()
                .map(|&[pc, pm]| {
                    (
                        format!("pc{pc}-pm{pm}"),
                        Box::new(move |c: &mut EvolutionConfig| {
                            c.crossover_probability = pc;
                            c.mutation_probability = pm;
                        }) as Setter,
                    )
                })
                .collect(),
        );
        push(
            self.bits_per_dim
                .iter()
                .map(|&v| {
                    (
                        format!("m{v}"),
                        Box::new(move |c: &mut EvolutionConfig| c.bits_per_dim = v) as Setter,
                    )
                })
                .collect(),
        );
        axes
    }

    /// One `(name, config)` per grid cell, outputs under `<output>/<name>`.
    /// An empty grid has no cells.
    pub fn cells(&self, base: &RunConfig) -> Result<Vec<(String, RunConfig)>> {
        let axes = self.axes();
        if axes.is_empty() {
            return Ok(Vec::new());
        }
        let mut cells: Vec<(Vec<String>, EvolutionConfig)> =
            vec![(Vec::new(), base.evolution.clone())];
        for axis in &axes {
            let mut next = Vec::with_capacity(cells.len() * axis.len());
            for (names, cfg) in &cells {
                for (name, set) in axis {
                    let mut c = cfg.clone();
                    set(&mut c);
                    let mut n = names.clone();
                    n.push(name.clone());
                    next.push((n, c));
                }
            }
            cells = next;
        }
        cells
            .into_iter()
            .map(|(names, evolution)| {
                let name = names.join("_");
                let mut cfg = base.clone();
                cfg.output = base.output.join(&name);
                cfg.evolution = evolution;
                cfg.validate()?;
                Ok((name, cfg))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::read_bundle;

    const FLAT: &str = r#"
seeds = [3, 4]
output = "out"

[environment]
kind = "grid"
preset = "flatgrid11"

[policy.train]
q_learning = { steps = 2000 }

[evolution]
generations = 2
"#;

    #[test]
    fn parse_and_validate() {
        let cfg = RunConfig::parse(FLAT, Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.seeds(), vec![3, 4]);
        assert_eq!(cfg.evolution.population_size, 10);
        assert_eq!(
            cfg.bundle_dir(RunMode::Baseline, 3),
            Path::new("/tmp/x/out/baseline/seed-3")
        );

        let bad = FLAT.replace(
            "preset = \"flatgrid11\"",
            "preset = \"flatgrid11\"\nlayout = \"a.txt\"",
        );
        assert!(RunConfig::parse(&bad, Path::new("."))
            .unwrap_err()
            .is_config_error());
        let bad = FLAT.replace("generations = 2", "generations = 0");
        assert!(RunConfig::parse(&bad, Path::new(".")).is_err());
        let bad = FLAT.replace("generations = 2", "generation = 2");
        assert!(RunConfig::parse(&bad, Path::new(".")).is_err());
        let bad = FLAT.replace("kind = \"grid\"", "kind = \"grid\"\nwidth = 3");
        assert!(RunConfig::parse(&bad, Path::new(".")).is_err());
        let bad = FLAT.replace("[policy.train]", "[policy.gaussian]\n[policy.train]");
        assert!(RunConfig::parse(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = RunConfig::parse(FLAT, Path::new("/b")).unwrap();
        let back = RunConfig::parse(&cfg.to_toml().unwrap(), Path::new("/b")).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn snapshot_replays_into_same_bundle() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse(FLAT, tmp.path()).unwrap();
        let exp = Experiment::prepare(cfg).unwrap();
        let dirs = exp.run_all(RunMode::Evolve).unwrap();
        assert_eq!(dirs.len(), 2);
        let before = std::fs::read(dirs[0].join("population.json")).unwrap();

        let snap_path = dirs[0].join("config.toml");
        let replay = Experiment::prepare(RunConfig::load(&snap_path).unwrap()).unwrap();
        assert_eq!(
            replay
                .config
                .bundle_dir(RunMode::Evolve, 3)
                .canonicalize()
                .unwrap(),
            dirs[0].canonicalize().unwrap()
        );
        replay.run_seed(RunMode::Evolve, 3).unwrap();
        assert_eq!(
            before,
            std::fs::read(dirs[0].join("population.json")).unwrap()
        );
        assert_eq!(read_bundle(&dirs[0]).unwrap().manifest.seed, 3);
    }

    #[test]
    fn reach_config() {
        let text = r#"
seeds = [0]
[environment]
kind = "reach"
horizon = 10
[policy.gaussian]
noise_scale = 0.2
[evolution]
population_size = 4
generations = 2
bits_per_dim = 9
"#;
        let tmp = tempfile::tempdir().unwrap();
        let exp = Experiment::prepare(RunConfig::parse(text, tmp.path()).unwrap()).unwrap();
        let dir = exp.run_seed(RunMode::Baseline, 0).unwrap();
        let b = read_bundle(&dir).unwrap();
        assert_eq!(b.individuals.len(), 4);
        assert!(b.histogram().is_none());
        assert!(!dir.join("histogram.csv").exists());

        let wrong = text.replace("[policy.gaussian]\nnoise_scale = 0.2", "[policy.train]");
        assert!(RunConfig::parse(&wrong, tmp.path()).is_err());
    }

    #[test]
    fn sweep_cells() {
        let base = RunConfig::parse(FLAT, Path::new(".")).unwrap();
        assert!(SweepGrid::default().cells(&base).unwrap().is_empty());
        let grid = SweepGrid::parse(
            "population_size = [5, 10, 20, 40]\noperators = [[0.9, 0.25], [0.75, 0.5]]",
        )
        .unwrap();
        let cells = grid.cells(&base).unwrap();
        assert_eq!(cells.len(), 8);
        assert_eq!(cells[0].0, "n5_pc0.9-pm0.25");
        assert_eq!(cells[0].1.evolution.population_size, 5);
        assert_eq!(cells[0].1.output, Path::new("out/n5_pc0.9-pm0.25"));
        assert!(SweepGrid::parse("population_size = [1]")
            .unwrap()
            .cells(&base)
            .is_err());
    }
}
