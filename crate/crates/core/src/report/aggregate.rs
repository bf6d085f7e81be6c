//! Reports over several bundles: pooled box plots, summed histograms and
//! seed-averaged fitness decompositions, side by side per run mode.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bundle::{Bundle, EnvironmentInfo, RunMode};
use super::{
    boxplot_stats, component_fields, mean_components, BoxplotStats, GenerationMeans,
    VisitHistogram, COMPONENT_HEADER,
};
use crate::error::{Error, Result};
use crate::fitness::FitnessComponents;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub returns: BoxplotStats,
    pub lengths: BoxplotStats,
    /// Distinct visited cells; grid runs only.
    pub coverage: Option<usize>,
    pub mean_joint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledRow {
    pub rank: usize,
    pub seed: u64,
    pub id: u64,
    pub fitness: FitnessComponents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: RunMode,
    pub individuals: usize,
    /// Pooled over every individual of every seed.
    pub returns: BoxplotStats,
    pub lengths: BoxplotStats,
    /// Histogram counts summed over seeds.
    pub histogram: Option<VisitHistogram>,
    pub seeds: Vec<SeedSummary>,
    pub population: Vec<PooledRow>,
    /// Per-generation component means, averaged over seeds.
    pub generations: Vec<GenerationMeans>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub environment: EnvironmentInfo,
    pub modes: Vec<ModeSummary>,
}

impl Report {
    pub fn mode(&self, mode: RunMode) -> Option<&ModeSummary> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

fn summarize(mode: RunMode, bundles: &[&Bundle]) -> Result<ModeSummary> {
    let mut seeds = Vec::new();
    let mut returns = Vec::new();
    let mut lengths = Vec::new();
    let mut histogram: Option<VisitHistogram> = None;
    let mut rows = Vec::new();
    let mut per_generation: BTreeMap<usize, Vec<FitnessComponents>> = BTreeMap::new();
    for b in bundles {
        let hist = b.histogram().transpose()?;
        if let Some(h) = &hist {
            match &mut histogram {
                Some(acc) => acc.merge(h)?,
                None => histogram = Some(h.clone()),
            }
        }
        let fitness: Vec<_> = b.individuals.iter().map(|i| i.fitness).collect();
        seeds.push(SeedSummary {
            seed: b.manifest.seed,
            returns: boxplot_stats(&b.returns())?,
            lengths: boxplot_stats(&b.lengths())?,
            coverage: hist.as_ref().map(VisitHistogram::coverage),
            mean_joint: mean_components(&fitness)?.joint,
        });
        returns.extend(b.returns());
        lengths.extend(b.lengths());
        rows.extend(
            b.individuals
                .iter()
                .map(|i| (b.manifest.seed, i.id, i.fitness)),
        );
        for r in &b.history {
            let comps: Vec<_> = r.individuals.iter().map(|i| i.fitness).collect();
            per_generation
                .entry(r.generation)
                .or_default()
                .push(mean_components(&comps)?);
        }
    }
    rows.sort_by(|a, b| {
        b.2.joint
            .total_cmp(&a.2.joint)
            .then((a.0, a.1).cmp(&(b.0, b.1)))
    });
    Ok(ModeSummary {
        mode,
        individuals: returns.len(),
        returns: boxplot_stats(&returns)?,
        lengths: boxplot_stats(&lengths)?,
        histogram,
        seeds,
        population: rows
            .into_iter()
            .enumerate()
            .map(|(rank, (seed, id, fitness))| PooledRow {
                rank,
                seed,
                id,
                fitness,
            })
            .collect(),
        generations: per_generation
            .into_iter()
            .map(|(generation, means)| {
                Ok(GenerationMeans {
                    generation,
                    means: mean_components(&means)?,
                })
            })
            .collect::<Result<_>>()?,
    })
}

/// Pools bundles by mode. All bundles must come from the same environment.
pub fn aggregate_bundles(bundles: &[Bundle]) -> Result<Report> {
    let first = bundles.first().ok_or(Error::EmptyInput("bundles"))?;
    let environment = first.manifest.environment.clone();
    if let Some(other) = bundles
        .iter()
        .find(|b| b.manifest.environment != environment)
    {
        return Err(Error::Config(format!(
            "cannot mix environments in one report: {} is {:?}, {} is {:?}",
            first.dir.display(),
            environment,
            other.dir.display(),
            other.manifest.environment
        )));
    }
    let mut by_mode: BTreeMap<RunMode, Vec<&Bundle>> = BTreeMap::new();
    for b in bundles {
        by_mode.entry(b.manifest.mode).or_default().push(b);
    }
    let modes = by_mode
        .into_iter()
        .map(|(mode, bs)| summarize(mode, &bs))
        .collect::<Result<_>>()?;
    Ok(Report { environment, modes })
}

/// Paths written by [`write_report`].
pub type ReportFiles = Vec<PathBuf>;

pub fn write_report(report: &Report, out: &Path) -> Result<ReportFiles> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, content: String| -> Result<()> {
        let path = out.join(name);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    #[derive(Serialize)]
    struct Summary<'a> {
        environment: &'a EnvironmentInfo,
        modes: Vec<SummaryMode<'a>>,
    }
    #[derive(Serialize)]
    struct SummaryMode<'a> {
        mode: RunMode,
        individuals: usize,
        returns: BoxplotStats,
        lengths: BoxplotStats,
        coverage: Option<usize>,
        seeds: &'a [SeedSummary],
    }
    let summary = Summary {
        environment: &report.environment,
        modes: report
            .modes
            .iter()
            .map(|m| SummaryMode {
                mode: m.mode,
                individuals: m.individuals,
                returns: m.returns,
                lengths: m.lengths,
                coverage: m.histogram.as_ref().map(VisitHistogram::coverage),
                seeds: &m.seeds,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    put("summary.json".into(), text)?;

    for m in &report.modes {
        let tag = m.mode.as_str();
        if let Some(h) = &m.histogram {
            put(format!("histogram_{tag}.csv"), h.to_csv())?;
        }
        let mut pop = format!("rank,seed,id,{COMPONENT_HEADER}\n");
        for r in &m.population {
            pop.push_str(&format!(
                "{},{},{},{}\n",
                r.rank,
                r.seed,
                r.id,
                component_fields(&r.fitness)
            ));
        }
        put(format!("population_analysis_{tag}.csv"), pop)?;
        let mut gens = format!("generation,{COMPONENT_HEADER}\n");
        for g in &m.generations {
            gens.push_str(&format!(
                "{},{}\n",
                g.generation,
                component_fields(&g.means)
            ));
        }
        put(format!("generation_analysis_{tag}.csv"), gens)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::GridSpec;
    use crate::evolution::{EvolutionConfig, Evolver};
    use crate::policy::TabularPolicy;
    use crate::report::{export_bundle, read_bundle, BundleMeta};

    fn bundle(dir: &Path, seed: u64, mode: RunMode, env: EnvironmentInfo) -> Bundle {
        let spec = GridSpec::flat_grid11();
        let policy = TabularPolicy::for_grid(&spec, 1.0).unwrap();
        let cfg = EvolutionConfig {
            generations: 2,
            seed,
            ..Default::default()
        };
        let e = Evolver::new(&spec, &policy, cfg).unwrap();
        let run = match mode {
            RunMode::Evolve => e.run().unwrap(),
            RunMode::Baseline => e.baseline().unwrap(),
        };
        let meta = BundleMeta {
            mode,
            seed,
            environment: env,
            config_toml: String::new(),
            policy_json: String::new(),
        };
        let d = dir.join(format!("{}-{seed}", mode.as_str()));
        export_bundle(&run, &meta, &d).unwrap();
        read_bundle(&d).unwrap()
    }

    fn flat() -> EnvironmentInfo {
        EnvironmentInfo::Grid {
            name: "flatgrid11".into(),
            height: 11,
            width: 11,
        }
    }

    #[test]
    fn pools_by_mode() {
        let tmp = tempfile::tempdir().unwrap();
        let mut bs: Vec<Bundle> = (0..3)
            .map(|s| bundle(tmp.path(), s, RunMode::Evolve, flat()))
            .collect();
        bs.push(bundle(tmp.path(), 0, RunMode::Baseline, flat()));
        let report = aggregate_bundles(&bs).unwrap();
        let evolve = report.mode(RunMode::Evolve).unwrap();
        assert_eq!(evolve.individuals, 30);
        assert_eq!(evolve.population.len(), 30);
        assert_eq!(evolve.generations.len(), 3);
        let h = evolve.histogram.as_ref().unwrap();
        let expected: usize = bs[..3]
            .iter()
            .flat_map(|b| &b.trajectories)
            .map(|t| t.length())
            .sum();
        assert_eq!(h.total() as usize, expected);
        assert_eq!(report.mode(RunMode::Baseline).unwrap().generations.len(), 1);

        let out = tmp.path().join("report");
        let files = write_report(&report, &out).unwrap();
        assert_eq!(files.len(), 1 + 2 * 3);
    }

    #[test]
    fn single_bundle_and_mixed_environments() {
        let tmp = tempfile::tempdir().unwrap();
        let one = bundle(tmp.path(), 4, RunMode::Evolve, flat());
        let report = aggregate_bundles(std::slice::from_ref(&one)).unwrap();
        assert_eq!(report.modes.len(), 1);
        assert_eq!(report.modes[0].seeds.len(), 1);

        let other = bundle(
            tmp.path(),
            5,
            RunMode::Baseline,
            EnvironmentInfo::Grid {
                name: "holeygrid11".into(),
                height: 11,
                width: 11,
            },
        );
        let err = aggregate_bundles(&[one, other]).unwrap_err();
        assert!(err.is_config_error());
        assert!(aggregate_bundles(&[]).is_err());
    }
}
