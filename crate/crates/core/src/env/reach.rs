use serde::{Deserialize, Serialize};

use super::{Environment, InvalidReason, Transition, Validity};
use crate::encoding::EncodingSpec;
use crate::error::{Error, Result};

/// Kinematic point-reach task: an effector moves toward a target inside a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReachSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub goal_radius: f64,
    pub horizon: usize,
    /// Largest per-axis displacement of one step (action 1.0).
    pub step_size: f64,
    /// Target used for the undisturbed reference rollout; the effector starts at the center.
    pub canonical_target: Vec<f64>,
}

impl Default for ReachSpec {
    fn default() -> Self {
        Self {
            lower: vec![-0.15; 3],
            upper: vec![0.15; 3],
            goal_radius: 0.05,
            horizon: 50,
            step_size: 0.05,
            canonical_target: vec![0.1, -0.08, 0.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachState {
    pub effector: Vec<f64>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReachAction(pub Vec<f64>);

impl ReachSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::InvalidEnvironment(format!("reach: {m}")));
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return err("lower and upper bounds must be non-empty and of equal length");
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(u > l)) {
            return err("bounds must be non-degenerate (upper > lower)");
        }
        if !(self.goal_radius > 0.0) {
            return err("goal_radius must be positive");
        }
        if self.horizon == 0 {
            return err("horizon must be at least 1");
        }
        if !(self.step_size > 0.0) {
            return err("step_size must be positive");
        }
        if !self.in_bounds(&self.canonical_target) {
            return err("canonical_target must lie within bounds");
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    fn in_bounds(&self, p: &[f64]) -> bool {
        p.len() == self.dims()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| x >= l && x <= u)
    }

    pub fn within_goal(&self, effector: &[f64], target: &[f64]) -> bool {
        euclidean(effector, target) <= self.goal_radius
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl Environment for ReachSpec {
    type State = ReachState;
    type Action = ReachAction;

    fn name(&self) -> &str {
        "reach"
    }

    fn validate_initial(&self, state: &ReachState) -> Validity {
        if self.in_bounds(&state.effector) && self.in_bounds(&state.target) {
            Validity::Valid
        } else {
            Validity::Invalid(InvalidReason::OutOfBounds)
        }
    }

    fn transition(
        &self,
        state: &ReachState,
        action: &ReachAction,
    ) -> Result<Transition<ReachState>> {
        if action.0.len() != self.dims() {
            return Err(Error::InvalidAction(format!(
                "expected {} axes, got {}",
                self.dims(),
                action.0.len()
            )));
        }
        if let Some(a) = action.0.iter().find(|a| !(a.abs() <= 1.0)) {
            return Err(Error::InvalidAction(format!(
                "component {a} outside [-1, 1]"
            )));
        }
        let effector: Vec<f64> = state
            .effector
            .iter()
            .zip(&action.0)
            .zip(self.lower.iter().zip(&self.upper))
            .map(|((e, a), (l, u))| (e + self.step_size * a).clamp(*l, *u))
            .collect();
        let reward = if self.within_goal(&effector, &state.target) {
            0.0
        } else {
            -1.0
        };
        Ok(Transition {
            next: ReachState {
                effector,
                target: state.target.clone(),
            },
            reward,
            termination: None,
        })
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn position(&self, state: &ReachState) -> Vec<f64> {
        state.effector.clone()
    }

    fn max_state_distance(&self) -> f64 {
        euclidean(&self.lower, &self.upper)
    }

    fn state_count(&self) -> Option<usize> {
        None
    }

    /// Effector axes followed by target axes, all continuous.
    fn encoding_spec(&self, bits_per_dim: u32) -> Result<EncodingSpec> {
        let axes: Vec<(f64, f64)> = self
            .lower
            .iter()
            .copied()
            .zip(self.upper.iter().copied())
            .collect();
        let bounds: Vec<(f64, f64)> = axes.iter().chain(axes.iter()).copied().collect();
        EncodingSpec::continuous(bits_per_dim, &bounds)
    }

    fn state_from_values(&self, values: &[f64]) -> Result<ReachState> {
        let d = self.dims();
        if values.len() != 2 * d {
            return Err(Error::InvalidState(format!(
                "reach state needs {} values, got {}",
                2 * d,
                values.len()
            )));
        }
        Ok(ReachState {
            effector: values[..d].to_vec(),
            target: values[d..].to_vec(),
        })
    }

    fn canonical_start(&self) -> ReachState {
        ReachState {
            effector: self.center(),
            target: self.canonical_target.clone(),
        }
    }
}
