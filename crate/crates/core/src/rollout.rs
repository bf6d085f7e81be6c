//! Demonstration trajectories: the phenotype of an individual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Environment, Episode, Termination};
use crate::error::Result;
use crate::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ReachedTarget,
    Failed,
    Truncated,
}

/// A rollout of a fixed policy.
///
/// `states` holds positions after removing consecutive duplicates and always
/// starts with the initial state. `actions`, `certainties` and `rewards` cover
/// every executed step, including steps whose state was removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<A> {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<A>,
    pub certainties: Vec<f64>,
    pub rewards: Vec<f64>,
    pub raw_length: usize,
    pub episode_return: f64,
    pub outcome: Outcome,
}

impl<A> Trajectory<A> {
    /// Final trajectory length: number of states after deduplication.
    pub fn length(&self) -> usize {
        self.states.len()
    }
}

impl Trajectory<()> {
    /// A trajectory built directly from positions and per-step certainties,
    /// with one executed step per certainty. Rewards are zero.
    pub fn from_positions(states: Vec<Vec<f64>>, certainties: Vec<f64>) -> Self {
        let raw_length = certainties.len();
        Self {
            states,
            actions: vec![(); raw_length],
            rewards: vec![0.0; raw_length],
            certainties,
            raw_length,
            episode_return: 0.0,
            outcome: Outcome::Truncated,
        }
    }
}

/// Rolls `policy` from `initial` until termination or truncation.
pub fn generate<E, P>(env: &E, policy: &P, initial: E::State) -> Result<Trajectory<E::Action>>
where
    E: Environment,
    P: Policy<E> + ?Sized,
{
    let mut episode = Episode::reset(env, initial)?;
    let mut last = episode.state().clone();
    let mut traj = Trajectory {
        states: vec![env.position(&last)],
        actions: Vec::new(),
        certainties: Vec::new(),
        rewards: Vec::new(),
        raw_length: 0,
        episode_return: 0.0,
        outcome: Outcome::Truncated,
    };
    loop {
        let state = episode.state();
        let action = policy.act(env, state);
        let certainty = policy.certainty(env, state, &action);
        let step = episode.step(&action)?;
        traj.actions.push(action);
        traj.certainties.push(certainty);
        traj.rewards.push(step.reward);
        if step.next != last {
            traj.states.push(env.position(&step.next));
            last = step.next;
        }
        if step.terminated || step.truncated {
            traj.outcome = match step.termination {
                Some(Termination::Success) => Outcome::ReachedTarget,
                Some(Termination::Failure) => Outcome::Failed,
                None => Outcome::Truncated,
            };
            break;
        }
    }
    traj.raw_length = traj.actions.len();
    traj.episode_return = traj.rewards.iter().sum();
    Ok(traj)
}

/// Independent rollouts evaluated in parallel; output order matches `initials`.
pub fn generate_all<E, P>(
    env: &E,
    policy: &P,
    initials: &[E::State],
) -> Result<Vec<Trajectory<E::Action>>>
where
    E: Environment,
    P: Policy<E> + ?Sized,
{
    initials
        .par_iter()
        .map(|s| generate(env, policy, s.clone()))
        .collect()
}
