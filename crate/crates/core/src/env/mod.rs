//! Deterministic finite-horizon environments.

mod grid;
mod reach;

use std::fmt;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::encoding::EncodingSpec;
use crate::error::{Error, Result};

pub use grid::{grid_max_state_distance, Cell, GridAction, GridSpec, GridState};
pub use reach::{ReachAction, ReachSpec, ReachState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    Wall,
    Hole,
    Target,
    OutOfBounds,
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvalidReason::Wall => "wall cell",
            InvalidReason::Hole => "hole cell",
            InvalidReason::Target => "target cell",
            InvalidReason::OutOfBounds => "outside bounds",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(InvalidReason),
}

impl Validity {
    pub fn is_valid(self) -> bool {
        self == Validity::Valid
    }
}

/// Why an episode ended before its horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub next: S,
    pub reward: f64,
    pub termination: Option<Termination>,
}

pub trait Environment: Sync {
    type State: Clone + PartialEq + fmt::Debug + Serialize + DeserializeOwned + Send + Sync;
    type Action: Clone + PartialEq + fmt::Debug + Serialize + DeserializeOwned + Send + Sync;

    fn name(&self) -> &str;

    fn validate_initial(&self, state: &Self::State) -> Validity;

    /// One deterministic MDP step, without horizon bookkeeping.
    fn transition(
        &self,
        state: &Self::State,
        action: &Self::Action,
    ) -> Result<Transition<Self::State>>;

    /// Maximum number of steps before truncation.
    fn horizon(&self) -> usize;

    /// Position ρ(s) used by every distance computation.
    fn position(&self, state: &Self::State) -> Vec<f64>;

    /// Largest Euclidean distance between any two positions.
    fn max_state_distance(&self) -> f64;

    /// Number of distinct states, or `None` for continuous spaces.
    fn state_count(&self) -> Option<usize>;

    /// Encoding of the disturbable part of the initial state.
    fn encoding_spec(&self, bits_per_dim: u32) -> Result<EncodingSpec>;

    /// Builds a state from decoded per-dimension values (inverse of the encoding layout).
    fn state_from_values(&self, values: &[f64]) -> Result<Self::State>;

    /// The fixed start state used during training.
    fn canonical_start(&self) -> Self::State;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step<S> {
    pub next: S,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub termination: Option<Termination>,
}

/// A running episode: environment state plus step counter.
pub struct Episode<'a, E: Environment> {
    env: &'a E,
    state: E::State,
    steps: usize,
    done: bool,
}

impl<'a, E: Environment> Episode<'a, E> {
    pub fn reset(env: &'a E, initial: E::State) -> Result<Self> {
        if let Validity::Invalid(reason) = env.validate_initial(&initial) {
            return Err(Error::InvalidState(format!("{initial:?}: {reason}")));
        }
        Ok(Self {
            env,
            state: initial,
            steps: 0,
            done: false,
        })
    }

    pub fn state(&self) -> &E::State {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn step(&mut self, action: &E::Action) -> Result<Step<E::State>> {
        if self.done {
            return Err(Error::InvalidState("episode already finished".into()));
        }
        let t = self.env.transition(&self.state, action)?;
        self.steps += 1;
        let terminated = t.termination.is_some();
        let truncated = !terminated && self.steps >= self.env.horizon();
        self.done = terminated || truncated;
        self.state = t.next.clone();
        Ok(Step {
            next: t.next,
            reward: t.reward,
            terminated,
            truncated,
            termination: t.termination,
        })
    }
}
