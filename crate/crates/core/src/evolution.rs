//! The evolutionary loop over initial-state genomes.
//!
//! Fitness depends on the demonstration set at evaluation time, so every
//! evaluation happens in a fixed order and each trajectory joins the set
//! before the next one is scored. Stored fitness is never recomputed.
//! Rollouts themselves do not depend on the set and may run in parallel.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{self, BitGenome, EncodingSpec};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::fitness::{joint_fitness, DemonstrationSet, FitnessComponents, MetricSpace};
use crate::policy::Policy;
use crate::rollout::{self, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub tournament_size: usize,
    pub bits_per_dim: u32,
    pub seed: u64,
    /// Bound on genome draws while filling the initial population.
    pub max_init_attempts: usize,
    /// Precompute each batch of rollouts in parallel before scoring.
    pub parallel_rollouts: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            generations: 40,
            crossover_probability: 0.75,
            mutation_probability: 0.5,
            tournament_size: 3,
            bits_per_dim: 6,
            seed: 0,
            max_init_attempts: 10_000,
            parallel_rollouts: true,
        }
    }
}

impl EvolutionConfig {
    /// Settings used for the continuous reach task.
    pub fn continuous() -> Self {
        Self {
            population_size: 30,
            generations: 1000,
            bits_per_dim: 9,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("evolution: {m}")));
        if self.population_size < 2 {
            return bad(format!(
                "population_size must be >= 2, got {}",
                self.population_size
            ));
        }
        if self.generations < 1 {
            return bad("generations must be >= 1".into());
        }
        for (name, p) in [
            ("crossover_probability", self.crossover_probability),
            ("mutation_probability", self.mutation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.tournament_size < 1 {
            return bad("tournament_size must be >= 1".into());
        }
        if self.max_init_attempts < self.population_size {
            return bad("max_init_attempts must be at least population_size".into());
        }
        Ok(())
    }

    fn operator_count(&self, rate: f64) -> usize {
        // guard against 10 * 0.7 = 7.000000000000001
        (self.population_size as f64 * rate - 1e-9).ceil().max(0.0) as usize
    }

    pub fn crossover_count(&self) -> usize {
        self.operator_count(self.crossover_probability)
    }

    pub fn mutation_count(&self) -> usize {
        self.operator_count(self.mutation_probability)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum Origin {
    Initial,
    Crossover { parents: [u64; 2] },
    Mutation { parent: u64 },
}

/// A genome decoded to a valid initial state, not yet rolled out.
#[derive(Debug)]
pub struct Candidate<E: Environment> {
    pub id: u64,
    pub genome: BitGenome,
    pub initial_state: E::State,
    pub birth_generation: usize,
    pub origin: Origin,
}

#[derive(Debug)]
pub struct Individual<E: Environment> {
    pub id: u64,
    pub genome: BitGenome,
    pub initial_state: E::State,
    pub trajectory: Arc<Trajectory<E::Action>>,
    /// Fitness against the demonstration set at evaluation time.
    pub fitness: FitnessComponents,
    pub birth_generation: usize,
    pub origin: Origin,
}

impl<E: Environment> Clone for Individual<E> {
    fn clone(&self) -> Self {
        Self {
            id: self.id,
            genome: self.genome.clone(),
            initial_state: self.initial_state.clone(),
            trajectory: Arc::clone(&self.trajectory),
            fitness: self.fitness,
            birth_generation: self.birth_generation,
            origin: self.origin,
        }
    }
}

/// Higher joint fitness first; ties go to the lower (older) id.
pub fn rank_order<E: Environment>(a: &Individual<E>, b: &Individual<E>) -> Ordering {
    b.fitness
        .joint
        .total_cmp(&a.fitness.joint)
        .then(a.id.cmp(&b.id))
}

#[derive(Debug)]
pub struct Population<E: Environment> {
    pub individuals: Vec<Individual<E>>,
    pub demonstrations: DemonstrationSet<E::Action>,
}

impl<E: Environment> Clone for Population<E> {
    fn clone(&self) -> Self {
        Self {
            individuals: self.individuals.clone(),
            demonstrations: self.demonstrations.clone(),
        }
    }
}

impl<E: Environment> Population<E> {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.individuals.iter().map(|i| i.id).collect()
    }

    pub fn max_joint(&self) -> f64 {
        self.individuals
            .iter()
            .map(|i| i.fitness.joint)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether the demonstration set holds exactly the alive individuals' trajectories.
    pub fn demonstrations_match(&self) -> bool {
        let mut owners = self.demonstrations.owners();
        let mut ids = self.ids();
        owners.sort_unstable();
        ids.sort_unstable();
        owners == ids
            && self.individuals.iter().all(|ind| {
                self.demonstrations
                    .iter()
                    .any(|d| d.owner == ind.id && Arc::ptr_eq(&d.trajectory, &ind.trajectory))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndividualFitness {
    pub id: u64,
    pub fitness: FitnessComponents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// 0 is the initial population.
    pub generation: usize,
    pub individuals: Vec<IndividualFitness>,
    pub mean_joint: f64,
    pub min_joint: f64,
    pub max_joint: f64,
    /// Individuals that entered the population in this generation.
    pub admitted: Vec<u64>,
}

impl GenerationRecord {
    fn capture<E: Environment>(generation: usize, pop: &Population<E>, admitted: Vec<u64>) -> Self {
        let joints: Vec<f64> = pop.individuals.iter().map(|i| i.fitness.joint).collect();
        Self {
            generation,
            individuals: pop
                .individuals
                .iter()
                .map(|i| IndividualFitness {
                    id: i.id,
                    fitness: i.fitness,
                })
                .collect(),
            mean_joint: joints.iter().sum::<f64>() / joints.len() as f64,
            min_joint: joints.iter().copied().fold(f64::INFINITY, f64::min),
            max_joint: joints.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            admitted,
        }
    }
}

#[derive(Debug)]
pub struct RunResult<E: Environment> {
    pub config: EvolutionConfig,
    pub encoding: EncodingSpec,
    pub initial: Vec<Individual<E>>,
    pub population: Population<E>,
    pub history: Vec<GenerationRecord>,
}

pub struct Evolver<'a, E: Environment, P: Policy<E> + ?Sized> {
    env: &'a E,
    policy: &'a P,
    config: EvolutionConfig,
    encoding: EncodingSpec,
    space: MetricSpace,
    rng: ChaCha8Rng,
    next_id: u64,
}

impl<'a, E: Environment, P: Policy<E> + ?Sized> Evolver<'a, E, P> {
    pub fn new(env: &'a E, policy: &'a P, config: EvolutionConfig) -> Result<Self> {
        config.validate()?;
        let encoding = env.encoding_spec(config.bits_per_dim)?;
        Ok(Self {
            env,
            policy,
            encoding,
            space: MetricSpace::of(env),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            next_id: 0,
            config,
        })
    }

    pub fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    /// Decodes a genome, returning the state only if an episode can start there.
    pub fn decode_valid(&self, genome: &BitGenome) -> Result<Option<E::State>> {
        let values = self.encoding.decode(genome)?;
        let state = self.env.state_from_values(&values)?;
        Ok(self
            .env
            .validate_initial(&state)
            .is_valid()
            .then_some(state))
    }

    fn candidate(
        &mut self,
        genome: BitGenome,
        state: E::State,
        generation: usize,
        origin: Origin,
    ) -> Candidate<E> {
        let id = self.next_id;
        self.next_id += 1;
        Candidate {
            id,
            genome,
            initial_state: state,
            birth_generation: generation,
            origin,
        }
    }

    /// Rejection-samples `n` valid genomes and evaluates them in creation order
    /// against a demonstration set that starts empty.
    pub fn init_population(&mut self) -> Result<Population<E>> {
        let n = self.config.population_size;
        let mut candidates = Vec::with_capacity(n);
        let mut attempts = 0;
        while candidates.len() < n {
            if attempts == self.config.max_init_attempts {
                return Err(Error::RejectionExhausted { attempts });
            }
            attempts += 1;
            let genome = encoding::random_genome(&mut self.rng, &self.encoding);
            if let Some(state) = self.decode_valid(&genome)? {
                let c = self.candidate(genome, state, 0, Origin::Initial);
                candidates.push(c);
            }
        }
        let mut demonstrations = DemonstrationSet::new();
        let individuals = self.evaluate_offspring(candidates, &mut demonstrations)?;
        Ok(Population {
            individuals,
            demonstrations,
        })
    }

    fn tournament(&mut self, pop: &Population<E>) -> usize {
        let mut best = self.rng.gen_range(0..pop.len());
        for _ in 1..self.config.tournament_size {
            let challenger = self.rng.gen_range(0..pop.len());
            if rank_order(&pop.individuals[challenger], &pop.individuals[best]) == Ordering::Less {
                best = challenger;
            }
        }
        best
    }

    /// Crossover children of tournament-selected parents, then single-bit
    /// mutants of uniformly chosen parents. Invalid offspring are dropped.
    pub fn make_offspring(
        &mut self,
        pop: &Population<E>,
        generation: usize,
    ) -> Result<Vec<Candidate<E>>> {
        if pop.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for _ in 0..self.config.crossover_count() {
            let a = self.tournament(pop);
            let b = self.tournament(pop);
            let (pa, pb) = (&pop.individuals[a], &pop.individuals[b]);
            let genome = encoding::crossover(&pa.genome, &pb.genome, &mut self.rng)?;
            let origin = Origin::Crossover {
                parents: [pa.id, pb.id],
            };
            if let Some(state) = self.decode_valid(&genome)? {
                let c = self.candidate(genome, state, generation, origin);
                out.push(c);
            }
        }
        for _ in 0..self.config.mutation_count() {
            let parent = &pop.individuals[self.rng.gen_range(0..pop.len())];
            let genome = encoding::mutate(&parent.genome, &mut self.rng)?;
            let origin = Origin::Mutation { parent: parent.id };
            if let Some(state) = self.decode_valid(&genome)? {
                let c = self.candidate(genome, state, generation, origin);
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Rolls out and scores candidates in order; each trajectory joins
    /// `demonstrations` before the next candidate is scored.
    pub fn evaluate_offspring(
        &self,
        candidates: Vec<Candidate<E>>,
        demonstrations: &mut DemonstrationSet<E::Action>,
    ) -> Result<Vec<Individual<E>>> {
        let trajectories = if self.config.parallel_rollouts {
            let starts: Vec<E::State> =
                candidates.iter().map(|c| c.initial_state.clone()).collect();
            rollout::generate_all(self.env, self.policy, &starts)?
        } else {
            candidates
                .iter()
                .map(|c| rollout::generate(self.env, self.policy, c.initial_state.clone()))
                .collect::<Result<_>>()?
        };
        let mut out = Vec::with_capacity(candidates.len());
        for (c, traj) in candidates.into_iter().zip(trajectories) {
            let traj = Arc::new(traj);
            let fitness = joint_fitness(&traj, demonstrations, Some(c.id), &self.space)?;
            demonstrations.insert(c.id, Arc::clone(&traj), &self.space)?;
            out.push(Individual {
                id: c.id,
                genome: c.genome,
                initial_state: c.initial_state,
                trajectory: traj,
                fitness,
                birth_generation: c.birth_generation,
                origin: c.origin,
            });
        }
        Ok(out)
    }

    /// Keeps the best `n` by stored fitness and drops extinct demonstrations.
    pub fn migrate(&self, pop: Population<E>, offspring: Vec<Individual<E>>) -> Population<E> {
        let Population {
            mut individuals,
            mut demonstrations,
        } = pop;
        individuals.extend(offspring);
        individuals.sort_by(rank_order);
        individuals.truncate(self.config.population_size);
        let alive: HashSet<u64> = individuals.iter().map(|i| i.id).collect();
        demonstrations.retain_owners(|owner| alive.contains(&owner));
        Population {
            individuals,
            demonstrations,
        }
    }

    /// One generation: offspring, sequential evaluation, migration.
    pub fn step(
        &mut self,
        pop: Population<E>,
        generation: usize,
    ) -> Result<(Population<E>, GenerationRecord)> {
        let candidates = self.make_offspring(&pop, generation)?;
        let mut pop = pop;
        let offspring = self.evaluate_offspring(candidates, &mut pop.demonstrations)?;
        let offspring_ids: HashSet<u64> = offspring.iter().map(|i| i.id).collect();
        let next = self.migrate(pop, offspring);
        let admitted = next
            .individuals
            .iter()
            .map(|i| i.id)
            .filter(|id| offspring_ids.contains(id))
            .collect();
        let record = GenerationRecord::capture(generation, &next, admitted);
        Ok((next, record))
    }

    #[allow(clippy::type_complexity)]
    fn initial_run(
        &mut self,
    ) -> Result<(Population<E>, Vec<Individual<E>>, Vec<GenerationRecord>)> {
        let pop = self.init_population()?;
        let initial = pop.individuals.clone();
        let record = GenerationRecord::capture(0, &pop, pop.ids());
        Ok((pop, initial, vec![record]))
    }

    pub fn run(mut self) -> Result<RunResult<E>> {
        let (mut pop, initial, mut history) = self.initial_run()?;
        for generation in 1..=self.config.generations {
            let (next, record) = self.step(pop, generation)?;
            pop = next;
            history.push(record);
        }
        Ok(RunResult {
            config: self.config,
            encoding: self.encoding,
            initial,
            population: pop,
            history,
        })
    }

    /// The random-search baseline: the initial population with no evolutionary steps.
    pub fn baseline(mut self) -> Result<RunResult<E>> {
        let (pop, initial, history) = self.initial_run()?;
        Ok(RunResult {
            config: EvolutionConfig {
                generations: 0,
                ..self.config
            },
            encoding: self.encoding,
            initial,
            population: pop,
            history,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GridAction, GridSpec, GridState};
    use crate::fitness::{EMPTY_GLOBAL_DIVERSITY, EMPTY_LOCAL_DISTANCE};

    /// Moves right until blocked; certainty depends on the column.
    struct Rightward;

    impl Policy<GridSpec> for Rightward {
        fn act(&self, _: &GridSpec, _: &GridState) -> GridAction {
            GridAction::Right
        }
        fn certainty(&self, _: &GridSpec, s: &GridState, _: &GridAction) -> f64 {
            s.col as f64 / 10.0
        }
    }

    fn config() -> EvolutionConfig {
        EvolutionConfig {
            seed: 5,
            generations: 5,
            ..Default::default()
        }
    }

    #[test]
    fn operator_counts() {
        let c = EvolutionConfig::default();
        assert_eq!((c.crossover_count(), c.mutation_count()), (8, 5));
        let c = EvolutionConfig {
            crossover_probability: 0.7,
            ..c
        };
        assert_eq!(c.crossover_count(), 7);
    }

    #[test]
    fn config_validation() {
        assert!(EvolutionConfig {
            population_size: 1,
            ..config()
        }
        .validate()
        .is_err());
        assert!(EvolutionConfig {
            generations: 0,
            ..config()
        }
        .validate()
        .is_err());
        assert!(EvolutionConfig {
            crossover_probability: 1.5,
            ..config()
        }
        .validate()
        .is_err());
        assert!(config().validate().is_ok());
    }

    #[test]
    fn init_population_is_valid_and_deterministic() {
        let spec = GridSpec::flat_grid11();
        let mut a = Evolver::new(&spec, &Rightward, config()).unwrap();
        let pa = a.init_population().unwrap();
        assert_eq!(pa.len(), 10);
        assert!(pa
            .individuals
            .iter()
            .all(|i| spec.validate_initial(&i.initial_state).is_valid()));
        let first = &pa.individuals[0].fitness;
        assert_eq!(first.global_diversity, EMPTY_GLOBAL_DIVERSITY);
        assert_eq!(first.local_distance, EMPTY_LOCAL_DISTANCE);
        assert!((first.joint - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!(pa.demonstrations_match());

        let mut b = Evolver::new(&spec, &Rightward, config()).unwrap();
        let pb = b.init_population().unwrap();
        assert_eq!(pa.ids(), pb.ids());
        for (x, y) in pa.individuals.iter().zip(&pb.individuals) {
            assert_eq!(x.genome, y.genome);
            assert_eq!(x.fitness, y.fitness);
        }
    }

    #[test]
    fn rejection_bound_is_a_config_error() {
        // the only valid start is (1, 1); a 1-bit-per-axis grid still reaches it,
        // but a tiny attempt budget does not
        let spec = GridSpec::parse("tight", "#####\n#S..#\n#...#\n#..T#\n#####\n").unwrap();
        let cfg = EvolutionConfig {
            population_size: 2,
            max_init_attempts: 2,
            bits_per_dim: 2,
            ..config()
        };
        let mut found_error = false;
        for seed in 0..20 {
            let mut e = Evolver::new(
                &spec,
                &Rightward,
                EvolutionConfig {
                    seed,
                    ..cfg.clone()
                },
            )
            .unwrap();
            if let Err(err) = e.init_population() {
                assert!(matches!(err, Error::RejectionExhausted { attempts: 2 }));
                assert!(err.is_config_error());
                found_error = true;
            }
        }
        assert!(found_error);
    }

    #[test]
    fn offspring_counts_and_mutation_contract() {
        let spec = GridSpec::flat_grid11();
        let mut e = Evolver::new(&spec, &Rightward, config()).unwrap();
        let pop = e.init_population().unwrap();
        let offspring = e.make_offspring(&pop, 1).unwrap();
        let children = offspring
            .iter()
            .filter(|c| matches!(c.origin, Origin::Crossover { .. }))
            .count();
        let mutants: Vec<_> = offspring
            .iter()
            .filter_map(|c| match c.origin {
                Origin::Mutation { parent } => Some((c, parent)),
                _ => None,
            })
            .collect();
        assert!(children <= 8);
        assert!(mutants.len() <= 5);
        for (m, parent) in mutants {
            let p = pop.individuals.iter().find(|i| i.id == parent).unwrap();
            assert_eq!(m.genome.hamming_distance(&p.genome), 1);
        }
    }

    #[test]
    fn degenerate_rates_keep_population_static() {
        let spec = GridSpec::flat_grid11();
        let cfg = EvolutionConfig {
            crossover_probability: 0.0,
            mutation_probability: 0.0,
            ..config()
        };
        let mut e = Evolver::new(&spec, &Rightward, cfg.clone()).unwrap();
        let init = e.init_population().unwrap();
        assert!(e.make_offspring(&init, 1).unwrap().is_empty());
        let run = Evolver::new(&spec, &Rightward, cfg).unwrap().run().unwrap();
        let mut ranked = init.individuals.clone();
        ranked.sort_by(rank_order);
        let expected: Vec<u64> = ranked.iter().map(|i| i.id).collect();
        assert_eq!(run.population.ids(), expected);
        assert!(run.history.iter().skip(1).all(|r| r.admitted.is_empty()));
    }

    #[test]
    fn duplicate_offspring_get_zero_global_diversity() {
        let spec = GridSpec::flat_grid11();
        let mut e = Evolver::new(&spec, &Rightward, config()).unwrap();
        let mut pop = e.init_population().unwrap();
        let g = BitGenome::from_values(&[10, 10], 6);
        let s = e.decode_valid(&g).unwrap().unwrap();
        let cands = vec![
            e.candidate(g.clone(), s, 1, Origin::Initial),
            e.candidate(g, s, 1, Origin::Initial),
        ];
        let out = e
            .evaluate_offspring(cands, &mut pop.demonstrations)
            .unwrap();
        assert_eq!(out[1].fitness.global_diversity, 0.0);
        assert_eq!(out[1].fitness.joint, 0.0);
        assert_eq!(pop.demonstrations.len(), 12);
        let before = pop.demonstrations.len();
        assert!(e
            .evaluate_offspring(Vec::new(), &mut pop.demonstrations)
            .unwrap()
            .is_empty());
        assert_eq!(pop.demonstrations.len(), before);
    }

    #[test]
    fn evaluation_order_changes_fitness() {
        let spec = GridSpec::flat_grid11();
        let e = Evolver::new(&spec, &Rightward, config()).unwrap();
        let ga = BitGenome::from_values(&[10, 5], 6); // (2, 1)
        let gb = BitGenome::from_values(&[50, 5], 6); // (8, 1)
        let mk = |e: &Evolver<GridSpec, Rightward>, g: &BitGenome, id| Candidate::<GridSpec> {
            id,
            genome: g.clone(),
            initial_state: e.decode_valid(g).unwrap().unwrap(),
            birth_generation: 1,
            origin: Origin::Initial,
        };
        let ab = e
            .evaluate_offspring(
                vec![mk(&e, &ga, 0), mk(&e, &gb, 1)],
                &mut DemonstrationSet::new(),
            )
            .unwrap();
        let ba = e
            .evaluate_offspring(
                vec![mk(&e, &gb, 1), mk(&e, &ga, 0)],
                &mut DemonstrationSet::new(),
            )
            .unwrap();
        // whoever goes first gets the empty-set sentinel
        assert_eq!(ab[0].fitness.global_diversity, 1.0);
        assert_eq!(ba[0].fitness.global_diversity, 1.0);
        assert!(ab[1].fitness.global_diversity < 1.0);
        assert_ne!(ab[0].fitness.joint, ba[1].fitness.joint);
    }

    #[test]
    fn migrate_keeps_best_and_prunes() {
        let spec = GridSpec::flat_grid11();
        let mut e = Evolver::new(&spec, &Rightward, config()).unwrap();
        let mut pop = e.init_population().unwrap();
        let same = e.migrate(pop.clone(), Vec::new());
        assert_eq!(same.len(), 10);
        let mut ids = pop.ids();
        ids.sort_unstable();
        let mut kept = same.ids();
        kept.sort_unstable();
        assert_eq!(ids, kept);

        let cands = e.make_offspring(&pop, 1).unwrap();
        let offspring = e
            .evaluate_offspring(cands, &mut pop.demonstrations)
            .unwrap();
        let worst_parent = pop
            .individuals
            .iter()
            .map(|i| i.fitness.joint)
            .fold(f64::INFINITY, f64::min);
        let next = e.migrate(pop, offspring.clone());
        assert_eq!(next.len(), 10);
        assert_eq!(next.demonstrations.len(), 10);
        assert!(next.demonstrations_match());
        for o in offspring.iter().filter(|o| o.fitness.joint < worst_parent) {
            assert!(!next.ids().contains(&o.id));
        }
    }

    #[test]
    fn parallel_and_sequential_rollouts_agree() {
        let spec = GridSpec::holey_grid11();
        let policy = crate::policy::TabularPolicy::for_grid(&spec, 1.0).unwrap();
        let seq = EvolutionConfig {
            parallel_rollouts: false,
            ..config()
        };
        let a = Evolver::new(&spec, &policy, config())
            .unwrap()
            .run()
            .unwrap();
        let b = Evolver::new(&spec, &policy, seq).unwrap().run().unwrap();
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn baseline_shares_initial_population() {
        let spec = GridSpec::flat_grid11();
        let run = Evolver::new(&spec, &Rightward, config())
            .unwrap()
            .run()
            .unwrap();
        let base = Evolver::new(&spec, &Rightward, config())
            .unwrap()
            .baseline()
            .unwrap();
        assert_eq!(base.history.len(), 1);
        assert_eq!(base.history[0], run.history[0]);
        assert_eq!(base.population.len(), 10);
        assert_eq!(base.config.generations, 0);
        assert_eq!(base.initial.len(), run.initial.len());
    }
}
