use serde::{Deserialize, Serialize};

use super::Policy;
use crate::env::{ReachAction, ReachSpec, ReachState};
use crate::error::{Error, Result};

/// Proportional point controller with a Gaussian action distribution.
///
/// The distribution per axis is centered on the unclipped command
/// `gain · (target − effector) / step_size`; the executed action is that
/// command clipped to `[-1, 1]`. Certainty is the Gaussian probability mass
/// within `±certainty_window` of the executed action, multiplied over axes,
/// so saturated commands read as uncertain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianController {
    pub gain: f64,
    pub noise_scale: f64,
    pub certainty_window: f64,
}

impl Default for GaussianController {
    fn default() -> Self {
        Self {
            gain: 1.0,
            noise_scale: 0.1,
            // 0.05 of the [-1, 1] action range
            certainty_window: 0.1,
        }
    }
}

impl GaussianController {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0) || !(self.noise_scale >= 0.0) || !(self.certainty_window > 0.0) {
            return Err(Error::Config(format!(
                "gaussian controller needs gain > 0, noise_scale >= 0, certainty_window > 0 (got {}, {}, {})",
                self.gain, self.noise_scale, self.certainty_window
            )));
        }
        Ok(())
    }

    pub fn command(&self, env: &ReachSpec, state: &ReachState) -> Vec<f64> {
        state
            .target
            .iter()
            .zip(&state.effector)
            .map(|(t, e)| self.gain * (t - e) / env.step_size)
            .collect()
    }

    /// Mass of `N(mean, noise_scale²)` inside `[center − w, center + w]`.
    pub fn window_mass(&self, mean: f64, center: f64) -> f64 {
        let (lo, hi) = (
            center - self.certainty_window,
            center + self.certainty_window,
        );
        if self.noise_scale == 0.0 {
            return if (lo..=hi).contains(&mean) { 1.0 } else { 0.0 };
        }
        let z = |x: f64| (x - mean) / (self.noise_scale * std::f64::consts::SQRT_2);
        (0.5 * (libm::erf(z(hi)) - libm::erf(z(lo)))).clamp(0.0, 1.0)
    }
}

impl Policy<ReachSpec> for GaussianController {
    fn act(&self, env: &ReachSpec, state: &ReachState) -> ReachAction {
        ReachAction(
            self.command(env, state)
                .into_iter()
                .map(|c| c.clamp(-1.0, 1.0))
                .collect(),
        )
    }

    fn certainty(&self, env: &ReachSpec, state: &ReachState, action: &ReachAction) -> f64 {
        self.command(env, state)
            .iter()
            .zip(&action.0)
            .map(|(&mean, &a)| self.window_mass(mean, a))
            .product::<f64>()
            .clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near_state() -> ReachState {
        ReachState {
            effector: vec![0.0, 0.0, 0.0],
            target: vec![0.01, -0.02, 0.0],
        }
    }

    #[test]
    fn point_mass_at_mean_is_certain() {
        let env = ReachSpec::default();
        let p = GaussianController {
            noise_scale: 0.0,
            ..Default::default()
        };
        let s = near_state();
        let a = p.act(&env, &s);
        assert_eq!(p.certainty(&env, &s, &a), 1.0);
        let tiny = GaussianController {
            noise_scale: 1e-9,
            ..Default::default()
        };
        assert!((tiny.certainty(&env, &s, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_action_is_clipped_proportional_command() {
        let env = ReachSpec::default();
        let p = GaussianController::default();
        let s = ReachState {
            effector: vec![0.0; 3],
            target: vec![0.1, -0.01, 0.0],
        };
        let a = p.act(&env, &s);
        assert_eq!(a.0[0], 1.0);
        assert!((a.0[1] - -0.2).abs() < 1e-12);
        assert_eq!(a.0[2], 0.0);
    }

    #[test]
    fn window_mass_matches_erf() {
        let p = GaussianController::default();
        let m = p.window_mass(0.0, 0.0);
        assert!((m - libm::erf(0.1 / (0.1 * std::f64::consts::SQRT_2))).abs() < 1e-15);
        assert!((m - 0.682_689_492).abs() < 1e-8);
    }

    #[test]
    fn saturation_lowers_certainty() {
        let env = ReachSpec::default();
        let p = GaussianController::default();
        let near = near_state();
        let far = ReachState {
            effector: vec![-0.15; 3],
            target: vec![0.15; 3],
        };
        let cn = p.certainty(&env, &near, &p.act(&env, &near));
        let cf = p.certainty(&env, &far, &p.act(&env, &far));
        assert!(cf < cn, "{cf} !< {cn}");
    }

    #[test]
    fn certainty_non_increasing_away_from_mean() {
        let p = GaussianController::default();
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let m = p.window_mass(0.3, 0.3 + i as f64 * 0.01);
            assert!(m <= prev + 1e-15);
            assert!((0.0..=1.0).contains(&m));
            prev = m;
        }
    }
}
