//! Evaluation artifacts: box-plot statistics, visit histograms and fitness
//! decompositions, plus run bundles on disk.
//!
//! Quartiles use linear interpolation between order statistics: the
//! q-quantile of sorted `x[0..n]` is taken at position `(n - 1) * q`
//! (numpy's default `linear` method). Whiskers are the plain min and max.

mod aggregate;
mod bundle;

pub use aggregate::{
    aggregate_bundles, write_report, ModeSummary, PooledRow, Report, ReportFiles, SeedSummary,
};
pub use bundle::{
    export_bundle, read_bundle, Boxplots, Bundle, BundleMeta, EnvironmentInfo, IndividualRecord,
    Manifest, RunMode, TrajectoryRecord, BUNDLE_FORMAT_VERSION,
};

use serde::{Deserialize, Serialize};

use crate::env::GridSpec;
use crate::error::{Error, Result};
use crate::evolution::GenerationRecord;
use crate::fitness::FitnessComponents;
use crate::rollout::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub n: usize,
}

impl BoxplotStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput("box-plot values"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidState("box-plot values contain NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(BoxplotStats {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        n: sorted.len(),
    })
}

/// Per-cell counts of post-dedup state occurrences, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitHistogram {
    pub height: usize,
    pub width: usize,
    pub counts: Vec<u64>,
}

impl VisitHistogram {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            counts: vec![0; height * width],
        }
    }

    /// Counts every `[row, col]` position; positions must be integral cells.
    pub fn add_states(&mut self, states: &[Vec<f64>]) -> Result<()> {
        for p in states {
            let cell = match p.as_slice() {
                [r, c] if r.fract() == 0.0 && c.fract() == 0.0 => (*r, *c),
                _ => return Err(Error::InvalidState(format!("{p:?} is not a grid cell"))),
            };
            if cell.0 < 0.0
                || cell.1 < 0.0
                || cell.0 >= self.height as f64
                || cell.1 >= self.width as f64
            {
                return Err(Error::InvalidState(format!(
                    "{p:?} outside {}x{} grid",
                    self.height, self.width
                )));
            }
            self.counts[cell.0 as usize * self.width + cell.1 as usize] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &VisitHistogram) -> Result<()> {
        if (self.height, self.width) != (other.height, other.width) {
            return Err(Error::InvalidState("histogram dimensions differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.width + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of cells visited at least once.
    pub fn coverage(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// The most visited cell; ties go to the first in row-major order.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        (best / self.width, best % self.width)
    }

    /// Header `row,0,1,...` followed by one line per grid row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in 0..self.width {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for r in 0..self.height {
            out.push_str(&r.to_string());
            for c in 0..self.width {
                out.push_str(&format!(",{}", self.get(r, c)));
            }
            out.push('\n');
        }
        out
    }
}

pub fn visit_histogram<'a, A: 'a>(
    trajectories: impl IntoIterator<Item = &'a Trajectory<A>>,
    grid: &GridSpec,
) -> Result<VisitHistogram> {
    let mut h = VisitHistogram::new(grid.height(), grid.width());
    for t in trajectories {
        h.add_states(&t.states)?;
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationRow {
    pub rank: usize,
    pub id: u64,
    pub fitness: FitnessComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationMeans {
    pub generation: usize,
    pub means: FitnessComponents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub population: Vec<PopulationRow>,
    pub generations: Vec<GenerationMeans>,
}

pub fn mean_components(items: &[FitnessComponents]) -> Result<FitnessComponents> {
    if items.is_empty() {
        return Err(Error::EmptyInput("fitness components"));
    }
    let n = items.len() as f64;
    let sum = |f: fn(&FitnessComponents) -> f64| items.iter().map(f).sum::<f64>() / n;
    Ok(FitnessComponents {
        local_diversity: sum(|c| c.local_diversity),
        global_diversity: sum(|c| c.global_diversity),
        certainty: sum(|c| c.certainty),
        local_distance: sum(|c| c.local_distance),
        joint: sum(|c| c.joint),
    })
}

/// Sorts by descending joint fitness, ties by lower id.
pub fn rank_rows(rows: impl IntoIterator<Item = (u64, FitnessComponents)>) -> Vec<PopulationRow> {
    let mut rows: Vec<_> = rows.into_iter().collect();
    rows.sort_by(|a, b| b.1.joint.total_cmp(&a.1.joint).then(a.0.cmp(&b.0)));
    rows.into_iter()
        .enumerate()
        .map(|(rank, (id, fitness))| PopulationRow { rank, id, fitness })
        .collect()
}

/// Final population sorted by joint fitness, and per-generation component means.
pub fn fitness_decomposition(history: &[GenerationRecord]) -> Result<Decomposition> {
    let last = history.last().ok_or(Error::EmptyInput("run history"))?;
    let population = rank_rows(last.individuals.iter().map(|i| (i.id, i.fitness)));
    let generations = history
        .iter()
        .map(|r| {
            let comps: Vec<_> = r.individuals.iter().map(|i| i.fitness).collect();
            Ok(GenerationMeans {
                generation: r.generation,
                means: mean_components(&comps)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Decomposition {
        population,
        generations,
    })
}

pub(crate) const COMPONENT_HEADER: &str =
    "local_diversity,global_diversity,certainty,local_distance,joint";

pub(crate) fn component_fields(c: &FitnessComponents) -> String {
    format!(
        "{},{},{},{},{}",
        c.local_diversity, c.certainty, c.global_diversity, c.local_distance, c.joint
    )
}

impl Decomposition {
    pub fn population_csv(&self) -> String {
        let mut out = format!("rank,id,{COMPONENT_HEADER}\n");
        for r in &self.population {
            out.push_str(&format!(
                "{},{},{}\n",
                r.rank,
                r.id,
                component_fields(&r.fitness)
            ));
        }
        out
    }

    pub fn generations_csv(&self) -> String {
        let mut out = format!("generation,{COMPONENT_HEADER}\n");
        for g in &self.generations {
            out.push_str(&format!(
                "{},{}\n",
                g.generation,
                component_fields(&g.means)
            ));
        }
        out
    }
}

/// One row per individual per generation; `admitted` is 1 for new entrants.
pub fn generations_csv(history: &[GenerationRecord]) -> String {
    let mut out = format!("id,generation,{COMPONENT_HEADER},admitted\n");
    for r in history {
        for i in &r.individuals {
            let admitted = r.admitted.contains(&i.id) as u8;
            out.push_str(&format!(
                "{},{},{},{}\n",
                i.id,
                r.generation,
                component_fields(&i.fitness),
                admitted
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::GridState;
    use crate::evolution::{EvolutionConfig, Evolver};
    use crate::policy::TabularPolicy;

    #[test]
    fn boxplot_examples() {
        let s = boxplot_stats(&[5.0]).unwrap();
        assert_eq!(
            (s.min, s.q1, s.median, s.q3, s.max, s.n),
            (5.0, 5.0, 5.0, 5.0, 5.0, 1)
        );
        assert_eq!(boxplot_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap().median, 2.5);
        let nine: Vec<f64> = (1..=9).map(f64::from).collect();
        let s = boxplot_stats(&nine).unwrap();
        assert_eq!((s.q1, s.q3), (3.0, 7.0));
        assert!(boxplot_stats(&[]).is_err());
    }

    #[test]
    fn quartiles_match_hand_interpolation() {
        // n = 6: q1 at position 1.25, q3 at 3.75
        let s = boxplot_stats(&[10.0, 0.0, 2.0, 4.0, 6.0, 8.0]).unwrap();
        assert_eq!(s.q1, 2.5);
        assert_eq!(s.q3, 7.5);
        assert_eq!(s.iqr(), 5.0);
        assert_eq!(s.range(), 10.0);
    }

    proptest::proptest! {
        #[test]
        fn boxplot_is_ordered(v in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let s = boxplot_stats(&v).unwrap();
            proptest::prop_assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
        }
    }

    fn path(cells: &[(i32, i32)]) -> Trajectory<()> {
        Trajectory::from_positions(
            cells
                .iter()
                .map(|&(r, c)| vec![r as f64, c as f64])
                .collect(),
            vec![1.0],
        )
    }

    #[test]
    fn histogram_counts() {
        let grid = GridSpec::flat_grid11();
        let t = path(&[(1, 1), (1, 2), (2, 2)]);
        let h = visit_histogram([&t], &grid).unwrap();
        assert_eq!(h.coverage(), 3);
        assert_eq!(h.total(), 3);
        let h2 = visit_histogram([&t, &t], &grid).unwrap();
        assert!(h2.counts.iter().all(|&c| c == 0 || c == 2));
        let csv = h2.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 12);
        assert!(lines.iter().all(|l| l.split(',').count() == 12));
        assert!(visit_histogram([&path(&[(20, 1)])], &grid).is_err());
    }

    #[test]
    fn successful_population_peaks_at_target() {
        let grid = GridSpec::flat_grid11();
        // every path ends in the target (1, 9) from a different side
        let ts = [
            path(&[(3, 9), (2, 9), (1, 9)]),
            path(&[(1, 6), (1, 7), (1, 8), (1, 9)]),
            path(&[(2, 7), (2, 8), (1, 8), (1, 9)]),
        ];
        let h = visit_histogram(ts.iter(), &grid).unwrap();
        assert_eq!(h.argmax(), (1, 9));
        assert_eq!(grid.target(), GridState::new(1, 9));
    }

    #[test]
    fn decomposition_contract() {
        let spec = GridSpec::flat_grid11();
        let policy = TabularPolicy::for_grid(&spec, 1.0).unwrap();
        let cfg = EvolutionConfig {
            generations: 4,
            seed: 2,
            ..Default::default()
        };
        let run = Evolver::new(&spec, &policy, cfg).unwrap().run().unwrap();
        let d = fitness_decomposition(&run.history).unwrap();
        assert_eq!(d.population.len(), 10);
        assert_eq!(d.generations.len(), 5);
        for w in d.population.windows(2) {
            assert!(w[0].fitness.joint >= w[1].fitness.joint);
        }
        for r in &d.population {
            assert_eq!(
                r.fitness.joint,
                r.fitness.global_diversity + r.fitness.local_distance
            );
        }
        assert_eq!(d.population_csv().lines().count(), 11);
        assert_eq!(generations_csv(&run.history).lines().count(), 1 + 5 * 10);
        assert!(fitness_decomposition(&[]).is_err());
    }
}
