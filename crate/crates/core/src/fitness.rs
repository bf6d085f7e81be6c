//! Trajectory fitness: local diversity, global diversity, certainty and the
//! joint fitness that sums global diversity with the nearest-neighbour
//! distance in (local diversity, certainty) space.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::rollout::Trajectory;

/// Global diversity assigned when there is nothing to compare against.
pub const EMPTY_GLOBAL_DIVERSITY: f64 = 1.0;
/// Local distance assigned when there is nothing to compare against.
pub const EMPTY_LOCAL_DISTANCE: f64 = std::f64::consts::SQRT_2;

/// Environment constants the metrics normalize by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpace {
    /// Number of distinct states; `None` for continuous spaces.
    pub state_count: Option<usize>,
    pub max_state_distance: f64,
}

impl MetricSpace {
    pub fn of<E: Environment>(env: &E) -> Self {
        Self {
            state_count: env.state_count(),
            max_state_distance: env.max_state_distance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessComponents {
    pub local_diversity: f64,
    pub global_diversity: f64,
    pub certainty: f64,
    pub local_distance: f64,
    pub joint: f64,
}

fn position_key(p: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same position
    p.iter().map(|x| (x + 0.0).to_bits()).collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn local_diversity<A>(traj: &Trajectory<A>, space: &MetricSpace) -> Result<f64> {
    if traj.states.is_empty() {
        return Err(Error::EmptyTrajectory("state"));
    }
    Ok(match space.state_count {
        Some(total) => {
            let distinct: HashSet<Vec<u64>> = traj.states.iter().map(|p| position_key(p)).collect();
            distinct.len() as f64 / total as f64
        }
        None => traj.states.len() as f64 / (traj.raw_length + 1) as f64,
    })
}

/// Distance from a position to the nearest state of a trajectory.
pub fn state_to_trajectory_distance(p: &[f64], states: &[Vec<f64>]) -> Result<f64> {
    states
        .iter()
        .map(|t| euclidean(p, t))
        .reduce(f64::min)
        .ok_or(Error::EmptyTrajectory("state"))
}

/// Symmetric average of point-to-trajectory distances.
pub fn one_way_distance(u: &[Vec<f64>], v: &[Vec<f64>]) -> Result<f64> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptyTrajectory("state"));
    }
    let mut total = 0.0;
    for p in u {
        total += state_to_trajectory_distance(p, v)?;
    }
    for q in v {
        total += state_to_trajectory_distance(q, u)?;
    }
    Ok(total / (u.len() + v.len()) as f64)
}

/// Normalized minimum one-way distance to any other trajectory.
pub fn global_diversity<'a, A: 'a>(
    traj: &Trajectory<A>,
    others: impl IntoIterator<Item = &'a Trajectory<A>>,
    space: &MetricSpace,
) -> Result<f64> {
    let mut best: Option<f64> = None;
    for other in others {
        let d = one_way_distance(&traj.states, &other.states)?;
        best = Some(best.map_or(d, |b: f64| b.min(d)));
    }
    Ok(match best {
        None => EMPTY_GLOBAL_DIVERSITY,
        Some(_) if space.max_state_distance == 0.0 => 0.0,
        Some(d) => d / space.max_state_distance,
    })
}

/// Mean action certainty over every executed step.
pub fn trajectory_certainty<A>(traj: &Trajectory<A>) -> Result<f64> {
    if traj.certainties.is_empty() {
        return Err(Error::EmptyTrajectory("executed action"));
    }
    Ok(traj.certainties.iter().sum::<f64>() / traj.certainties.len() as f64)
}

/// One member of the demonstration set, with its per-trajectory metrics cached.
#[derive(Debug, Clone)]
pub struct Demonstration<A> {
    pub owner: u64,
    pub trajectory: Arc<Trajectory<A>>,
    pub local_diversity: f64,
    pub certainty: f64,
}

/// The multi-set of demonstrations fitness is measured against.
#[derive(Debug, Clone)]
pub struct DemonstrationSet<A> {
    members: Vec<Demonstration<A>>,
}

impl<A> Default for DemonstrationSet<A> {
    fn default() -> Self {
        Self {
            members: Vec::new(),
        }
    }
}

impl<A> DemonstrationSet<A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        owner: u64,
        trajectory: Arc<Trajectory<A>>,
        space: &MetricSpace,
    ) -> Result<()> {
        let local_diversity = local_diversity(&trajectory, space)?;
        let certainty = trajectory_certainty(&trajectory)?;
        self.members.push(Demonstration {
            owner,
            trajectory,
            local_diversity,
            certainty,
        });
        Ok(())
    }

    pub fn retain_owners(&mut self, mut keep: impl FnMut(u64) -> bool) {
        self.members.retain(|m| keep(m.owner));
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Demonstration<A>> {
        self.members.iter()
    }

    pub fn owners(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.owner).collect()
    }
}

/// Joint fitness of `traj` against `demos`, skipping the member owned by `exclude`.
pub fn joint_fitness<A>(
    traj: &Trajectory<A>,
    demos: &DemonstrationSet<A>,
    exclude: Option<u64>,
    space: &MetricSpace,
) -> Result<FitnessComponents> {
    let d_l = local_diversity(traj, space)?;
    let c = trajectory_certainty(traj)?;
    let others: Vec<&Demonstration<A>> =
        demos.iter().filter(|m| Some(m.owner) != exclude).collect();
    let d_g = global_diversity(traj, others.iter().map(|m| m.trajectory.as_ref()), space)?;
    let local_distance = others
        .iter()
        .map(|m| {
            let (dx, dy) = (d_l - m.local_diversity, c - m.certainty);
            (dx * dx + dy * dy).sqrt()
        })
        .reduce(f64::min)
        .unwrap_or(EMPTY_LOCAL_DISTANCE);
    Ok(FitnessComponents {
        local_diversity: d_l,
        global_diversity: d_g,
        certainty: c,
        local_distance,
        joint: d_g + local_distance,
    })
}
