//! Fixed policies under interpretation: deterministic action choice plus per-step certainty.

mod file;
mod gaussian;
mod qlearning;
mod tabular;

use crate::env::Environment;

pub use file::{load_policy, policy_to_json, save_policy, LoadedPolicy, POLICY_FORMAT_VERSION};
pub use gaussian::GaussianController;
pub use qlearning::{
    train_q_learning, train_until_success, QLearner, QLearningConfig, TrainingRun,
};
pub use tabular::TabularPolicy;

pub trait Policy<E: Environment>: Sync {
    /// Deterministic action choice.
    fn act(&self, env: &E, state: &E::State) -> E::Action;

    /// Probability-like confidence in `action`, always within `[0, 1]`.
    fn certainty(&self, env: &E, state: &E::State, action: &E::Action) -> f64;
}
