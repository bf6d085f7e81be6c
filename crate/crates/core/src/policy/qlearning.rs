use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TabularPolicy;
use crate::env::{Environment, GridAction, GridSpec, GridState};
use crate::error::{Error, Result};
use crate::rollout::{self, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Environment steps over which ε decays linearly from start to end.
    pub epsilon_decay_steps: usize,
    /// Softmax temperature of the resulting policy.
    pub temperature: f64,
    pub seed: u64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            steps: 50_000,
            learning_rate: 0.3,
            discount: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 25_000,
            temperature: 1.0,
            seed: 0,
        }
    }
}

impl QLearningConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("q-learning: {m}")));
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            ));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return bad(format!("discount {} outside [0, 1]", self.discount));
        }
        for eps in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&eps) {
                return bad(format!("epsilon {eps} outside [0, 1]"));
            }
        }
        if !(self.temperature > 0.0) {
            return bad("temperature must be positive".into());
        }
        Ok(())
    }

    fn epsilon(&self, step: usize) -> f64 {
        if self.epsilon_decay_steps == 0 || step >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let frac = step as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// ε-greedy tabular Q-learning; every episode starts from the grid's canonical start.
pub struct QLearner<'a> {
    spec: &'a GridSpec,
    config: QLearningConfig,
    table: TabularPolicy,
    rng: ChaCha8Rng,
    steps_done: usize,
    state: GridState,
    episode_steps: usize,
}

impl<'a> QLearner<'a> {
    pub fn new(spec: &'a GridSpec, config: QLearningConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            spec,
            table: TabularPolicy::for_grid(spec, config.temperature)?,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            steps_done: 0,
            state: spec.canonical_start(),
            episode_steps: 0,
            config,
        })
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    pub fn policy(&self) -> &TabularPolicy {
        &self.table
    }

    pub fn step(&mut self) -> Result<()> {
        let eps = self.config.epsilon(self.steps_done);
        let action = if self.rng.gen::<f64>() < eps {
            GridAction::ALL[self.rng.gen_range(0..4)]
        } else {
            self.table.greedy_by_value(self.state)
        };
        let t = self.spec.transition(&self.state, &action)?;
        self.episode_steps += 1;
        let terminal = t.termination.is_some();
        let bootstrap = if terminal {
            0.0
        } else {
            let next = self.table.values(t.next);
            next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        let target = t.reward + self.config.discount * bootstrap;
        let alpha = self.config.learning_rate;
        if let Some(row) = self.table.row_mut(self.state) {
            let q = &mut row[action.index()];
            *q += alpha * (target - *q);
        }
        if terminal || self.episode_steps >= self.spec.max_steps {
            self.state = self.spec.canonical_start();
            self.episode_steps = 0;
        } else {
            self.state = t.next;
        }
        self.steps_done += 1;
        Ok(())
    }

    /// Whether the greedy policy currently reaches the target from the canonical start.
    pub fn greedy_succeeds(&self) -> Result<bool> {
        let traj = rollout::generate(self.spec, &self.table, self.spec.canonical_start())?;
        Ok(traj.outcome == Outcome::ReachedTarget)
    }
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub policy: TabularPolicy,
    /// Snapshots taken after the given number of environment steps.
    pub checkpoints: Vec<(usize, TabularPolicy)>,
}

pub fn train_q_learning(
    spec: &GridSpec,
    config: &QLearningConfig,
    checkpoints: &[usize],
) -> Result<TrainingRun> {
    let mut wanted: Vec<usize> = checkpoints.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    if let Some(&over) = wanted.iter().find(|&&c| c > config.steps || c == 0) {
        return Err(Error::Config(format!(
            "checkpoint {over} outside 1..={} training steps",
            config.steps
        )));
    }
    let mut learner = QLearner::new(spec, config.clone())?;
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();
    while learner.steps_done() < config.steps {
        learner.step()?;
        while next.peek() == Some(&&learner.steps_done()) {
            snapshots.push((learner.steps_done(), learner.policy().clone()));
            next.next();
        }
    }
    Ok(TrainingRun {
        policy: learner.table,
        checkpoints: snapshots,
    })
}

/// Trains until the greedy rollout from the canonical start first reaches the
/// target, checking every `check_every` steps. Returns the step count and policy.
pub fn train_until_success(
    spec: &GridSpec,
    config: &QLearningConfig,
    check_every: usize,
) -> Result<(usize, TabularPolicy)> {
    if check_every == 0 {
        return Err(Error::Config("check_every must be at least 1".into()));
    }
    let mut learner = QLearner::new(spec, config.clone())?;
    while learner.steps_done() < config.steps {
        learner.step()?;
        if learner.steps_done() % check_every == 0 && learner.greedy_succeeds()? {
            return Ok((learner.steps_done(), learner.table));
        }
    }
    Err(Error::Config(format!(
        "greedy policy never reached the target within {} steps",
        config.steps
    )))
}
