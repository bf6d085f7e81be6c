//! Run bundles: one directory per run holding everything needed to rebuild
//! its report.
//!
//! | file | content |
//! |------|---------|
//! | `manifest.json` | format version, mode, seed, environment, encoding, file list |
//! | `config.toml` | the effective run config, replayable as-is |
//! | `policy.json` | the policy the run used |
//! | `population.json` | final individuals in rank order |
//! | `trajectories.json` | their trajectories, same order |
//! | `history.json` | per-generation records |
//! | `returns.csv`, `lengths.csv` | `id,return` and `id,length` per individual |
//! | `boxplots.json` | box-plot statistics of returns and lengths |
//! | `histogram.csv` | grid runs only: visit counts per cell |
//! | `generations.csv` | one row per individual per generation |
//! | `population_analysis.csv`, `generation_analysis.csv` | fitness decompositions |

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{boxplot_stats, fitness_decomposition, generations_csv, BoxplotStats, VisitHistogram};
use crate::encoding::{BitGenome, EncodingSpec};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::evolution::{GenerationRecord, Origin, RunResult};
use crate::fitness::FitnessComponents;
use crate::rollout::Outcome;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Evolve,
    Baseline,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Evolve => "evolve",
            RunMode::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentInfo {
    Grid {
        name: String,
        height: usize,
        width: usize,
    },
    Reach {
        name: String,
        dims: usize,
    },
}

impl EnvironmentInfo {
    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        match self {
            EnvironmentInfo::Grid { height, width, .. } => Some((*height, *width)),
            EnvironmentInfo::Reach { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub mode: RunMode,
    pub seed: u64,
    pub environment: EnvironmentInfo,
    pub encoding: EncodingSpec,
    pub population_size: usize,
    pub generations: usize,
    pub files: Vec<String>,
}

/// Run context that the evolution result itself does not carry.
#[derive(Debug, Clone)]
pub struct BundleMeta {
    pub mode: RunMode,
    pub seed: u64,
    pub environment: EnvironmentInfo,
    pub config_toml: String,
    pub policy_json: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualRecord<S> {
    pub id: u64,
    pub rank: usize,
    pub genome: BitGenome,
    pub initial_state: S,
    pub birth_generation: usize,
    pub origin: Origin,
    pub fitness: FitnessComponents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord<A> {
    pub id: u64,
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<A>,
    pub certainties: Vec<f64>,
    pub rewards: Vec<f64>,
    pub raw_length: usize,
    pub episode_return: f64,
    pub outcome: Outcome,
}

impl<A> TrajectoryRecord<A> {
    pub fn length(&self) -> usize {
        self.states.len()
    }
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    format_version: u32,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize, Deserialize)]
struct PopulationBody<S> {
    individuals: Vec<IndividualRecord<S>>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoriesBody<A> {
    trajectories: Vec<TrajectoryRecord<A>>,
}

#[derive(Serialize, Deserialize)]
struct HistoryBody {
    generations: Vec<GenerationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boxplots {
    #[serde(rename = "return")]
    pub episode_return: BoxplotStats,
    pub length: BoxplotStats,
}

fn versioned<T: Serialize>(body: T) -> Result<String> {
    json(&Versioned {
        format_version: BUNDLE_FORMAT_VERSION,
        body,
    })
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Files computed from the serialized records alone.
fn derived_files<S, A>(
    env: &EnvironmentInfo,
    individuals: &[IndividualRecord<S>],
    trajectories: &[TrajectoryRecord<A>],
    history: &[GenerationRecord],
) -> Result<Vec<(&'static str, String)>> {
    let mut returns = String::from("id,return\n");
    let mut lengths = String::from("id,length\n");
    for t in trajectories {
        returns.push_str(&format!("{},{}\n", t.id, t.episode_return));
        lengths.push_str(&format!("{},{}\n", t.id, t.length()));
    }
    let rv: Vec<f64> = trajectories.iter().map(|t| t.episode_return).collect();
    let lv: Vec<f64> = trajectories.iter().map(|t| t.length() as f64).collect();
    let boxplots = Boxplots {
        episode_return: boxplot_stats(&rv)?,
        length: boxplot_stats(&lv)?,
    };
    let mut files = vec![
        ("returns.csv", returns),
        ("lengths.csv", lengths),
        ("boxplots.json", json(&boxplots)?),
    ];
    if let Some((h, w)) = env.grid_dims() {
        let mut hist = VisitHistogram::new(h, w);
        for t in trajectories {
            hist.add_states(&t.states)?;
        }
        files.push(("histogram.csv", hist.to_csv()));
    }
    let decomposition = fitness_decomposition(history)?;
    debug_assert_eq!(decomposition.population.len(), individuals.len());
    files.push(("generations.csv", generations_csv(history)));
    files.push(("population_analysis.csv", decomposition.population_csv()));
    files.push(("generation_analysis.csv", decomposition.generations_csv()));
    Ok(files)
}

fn write(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(path, e))
}

/// Writes the bundle for `run` into `dir`, overwriting existing files.
pub fn export_bundle<E: Environment>(
    run: &RunResult<E>,
    meta: &BundleMeta,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let individuals: Vec<IndividualRecord<&E::State>> = run
        .population
        .individuals
        .iter()
        .enumerate()
        .map(|(rank, i)| IndividualRecord {
            id: i.id,
            rank,
            genome: i.genome.clone(),
            initial_state: &i.initial_state,
            birth_generation: i.birth_generation,
            origin: i.origin,
            fitness: i.fitness,
        })
        .collect();
    let trajectories: Vec<TrajectoryRecord<&E::Action>> = run
        .population
        .individuals
        .iter()
        .map(|i| {
            let t = &i.trajectory;
            TrajectoryRecord {
                id: i.id,
                states: t.states.clone(),
                actions: t.actions.iter().collect(),
                certainties: t.certainties.clone(),
                rewards: t.rewards.clone(),
                raw_length: t.raw_length,
                episode_return: t.episode_return,
                outcome: t.outcome,
            }
        })
        .collect();

    let mut files: Vec<(&str, String)> = vec![
        ("config.toml", meta.config_toml.clone()),
        ("policy.json", meta.policy_json.clone()),
        (
            "population.json",
            versioned(PopulationBody {
                individuals: individuals.clone(),
            })?,
        ),
        (
            "trajectories.json",
            versioned(TrajectoriesBody {
                trajectories: trajectories.clone(),
            })?,
        ),
        (
            "history.json",
            versioned(HistoryBody {
                generations: run.history.clone(),
            })?,
        ),
    ];
    files.extend(derived_files(
        &meta.environment,
        &individuals,
        &trajectories,
        &run.history,
    )?);

    let manifest = Manifest {
        format_version: BUNDLE_FORMAT_VERSION,
        mode: meta.mode,
        seed: meta.seed,
        environment: meta.environment.clone(),
        encoding: run.encoding.clone(),
        population_size: run.config.population_size,
        generations: run.config.generations,
        files: files.iter().map(|(n, _)| n.to_string()).collect(),
    };
    write(dir, "manifest.json", &json(&manifest)?)?;
    for (name, content) in &files {
        write(dir, name, content)?;
    }
    Ok(())
}

/// A bundle read back from disk. States and actions stay as raw JSON so any
/// environment's bundle can be reported on.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub individuals: Vec<IndividualRecord<serde_json::Value>>,
    pub trajectories: Vec<TrajectoryRecord<serde_json::Value>>,
    pub history: Vec<GenerationRecord>,
}

fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let bad = |message: String| Error::Bundle {
        path: path.clone(),
        message,
    };
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    match raw.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == BUNDLE_FORMAT_VERSION as u64 => {}
        other => return Err(bad(format!("unsupported format_version {other:?}"))),
    }
    serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
}

pub fn read_bundle(dir: &Path) -> Result<Bundle> {
    let manifest: Manifest = read_json(dir, "manifest.json")?;
    let population: Versioned<PopulationBody<serde_json::Value>> =
        read_json(dir, "population.json")?;
    let trajectories: Versioned<TrajectoriesBody<serde_json::Value>> =
        read_json(dir, "trajectories.json")?;
    let history: Versioned<HistoryBody> = read_json(dir, "history.json")?;
    let bundle = Bundle {
        dir: dir.to_path_buf(),
        manifest,
        individuals: population.body.individuals,
        trajectories: trajectories.body.trajectories,
        history: history.body.generations,
    };
    let individual_ids: Vec<u64> = bundle.individuals.iter().map(|i| i.id).collect();
    let trajectory_ids: Vec<u64> = bundle.trajectories.iter().map(|t| t.id).collect();
    if individual_ids != trajectory_ids {
        return Err(Error::Bundle {
            path: dir.to_path_buf(),
            message: "population.json and trajectories.json list different individuals".into(),
        });
    }
    Ok(bundle)
}

impl Bundle {
    pub fn returns(&self) -> Vec<f64> {
        self.trajectories.iter().map(|t| t.episode_return).collect()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .map(|t| t.length() as f64)
            .collect()
    }

    pub fn histogram(&self) -> Option<Result<VisitHistogram>> {
        let (h, w) = self.manifest.environment.grid_dims()?;
        let mut hist = VisitHistogram::new(h, w);
        Some(
            self.trajectories
                .iter()
                .try_for_each(|t| hist.add_states(&t.states))
                .map(|_| hist),
        )
    }

    /// Recomputes every derived file from the serialized records.
    pub fn derived_files(&self) -> Result<Vec<(&'static str, String)>> {
        derived_files(
            &self.manifest.environment,
            &self.individuals,
            &self.trajectories,
            &self.history,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::GridSpec;
    use crate::evolution::{EvolutionConfig, Evolver};
    use crate::policy::TabularPolicy;

    fn grid_run(seed: u64) -> (RunResult<GridSpec>, BundleMeta) {
        let spec = GridSpec::flat_grid11();
        let policy = TabularPolicy::for_grid(&spec, 1.0).unwrap();
        let cfg = EvolutionConfig {
            generations: 3,
            seed,
            ..Default::default()
        };
        let run = Evolver::new(&spec, &policy, cfg).unwrap().run().unwrap();
        let meta = BundleMeta {
            mode: RunMode::Evolve,
            seed,
            environment: EnvironmentInfo::Grid {
                name: "flatgrid11".into(),
                height: 11,
                width: 11,
            },
            config_toml: "seeds = [1]\n".into(),
            policy_json: "{}\n".into(),
        };
        (run, meta)
    }

    fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    }

    #[test]
    fn export_is_byte_identical_and_self_consistent() {
        let tmp = tempfile::tempdir().unwrap();
        let (run, meta) = grid_run(1);
        export_bundle(&run, &meta, tmp.path()).unwrap();
        let first = read_all(tmp.path());
        let (run2, meta2) = grid_run(1);
        export_bundle(&run2, &meta2, tmp.path()).unwrap();
        assert_eq!(first, read_all(tmp.path()));

        let bundle = read_bundle(tmp.path()).unwrap();
        assert_eq!(bundle.individuals.len(), 10);
        for (name, content) in bundle.derived_files().unwrap() {
            let on_disk = std::fs::read_to_string(tmp.path().join(name)).unwrap();
            assert_eq!(on_disk, content, "{name}");
        }
        let returns = std::fs::read_to_string(tmp.path().join("returns.csv")).unwrap();
        assert_eq!(returns.lines().count(), 11);
        let hist = std::fs::read_to_string(tmp.path().join("histogram.csv")).unwrap();
        assert_eq!(hist.lines().count(), 12);
        assert_eq!(bundle.manifest.files.len(), 12);
        assert_eq!(bundle.individuals[0].rank, 0);
        assert_eq!(
            bundle.individuals[0].initial_state,
            serde_json::to_value(run.population.individuals[0].initial_state).unwrap()
        );
    }

    #[test]
    fn reading_rejects_bad_versions() {
        let tmp = tempfile::tempdir().unwrap();
        let (run, meta) = grid_run(2);
        export_bundle(&run, &meta, tmp.path()).unwrap();
        let p = tmp.path().join("history.json");
        let text = std::fs::read_to_string(&p).unwrap().replacen(
            "\"format_version\": 1",
            "\"format_version\": 9",
            1,
        );
        std::fs::write(&p, text).unwrap();
        assert!(matches!(read_bundle(tmp.path()), Err(Error::Bundle { .. })));
    }

    #[test]
    fn unwritable_directory_is_io_error() {
        let tmp = tempfile::tempdir().unwrap();
        let blocker = tmp.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let (run, meta) = grid_run(3);
        assert!(matches!(
            export_bundle(&run, &meta, &blocker.join("sub")),
            Err(Error::Io { .. })
        ));
    }
}
