use super::Policy;
use crate::env::{GridAction, GridSpec, GridState};
use crate::error::{Error, Result};

/// Q table over grid cells with a softmax read-out.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    height: usize,
    width: usize,
    q: Vec<[f64; 4]>,
    temperature: f64,
}

impl TabularPolicy {
    pub fn new(height: usize, width: usize, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::Config(format!(
                "softmax temperature must be positive, got {temperature}"
            )));
        }
        Ok(Self {
            height,
            width,
            q: vec![[0.0; 4]; height * width],
            temperature,
        })
    }

    pub fn for_grid(spec: &GridSpec, temperature: f64) -> Result<Self> {
        Self::new(spec.height(), spec.width(), temperature)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        let mut p = Self::new(self.height, self.width, temperature)?;
        p.q.clone_from(&self.q);
        Ok(p)
    }

    pub fn check_compatible(&self, spec: &GridSpec) -> Result<()> {
        if (self.height, self.width) != (spec.height(), spec.width()) {
            return Err(Error::PolicyMismatch(format!(
                "Q table is {}x{}, grid is {}x{}",
                self.height,
                self.width,
                spec.height(),
                spec.width()
            )));
        }
        Ok(())
    }

    fn index(&self, state: GridState) -> Option<usize> {
        let in_range = state.row >= 0
            && state.col >= 0
            && (state.row as usize) < self.height
            && (state.col as usize) < self.width;
        in_range.then(|| state.row as usize * self.width + state.col as usize)
    }

    /// Action values of a state; states outside the table read as all zeros.
    pub fn values(&self, state: GridState) -> [f64; 4] {
        self.index(state).map_or([0.0; 4], |i| self.q[i])
    }

    pub fn value(&self, state: GridState, action: GridAction) -> f64 {
        self.values(state)[action.index()]
    }

    pub fn set_value(&mut self, state: GridState, action: GridAction, value: f64) -> Result<()> {
        let i = self.index(state).ok_or_else(|| {
            Error::InvalidState(format!("({}, {}) outside Q table", state.row, state.col))
        })?;
        self.q[i][action.index()] = value;
        Ok(())
    }

    /// Softmax of the action values at temperature β.
    pub fn probabilities(&self, state: GridState) -> [f64; 4] {
        let q = self.values(state);
        let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = q.map(|v| ((v - max) / self.temperature).exp());
        let total: f64 = p.iter().sum();
        for v in &mut p {
            *v /= total;
        }
        p
    }

    /// Greedy action over the softmax; ties go to the earliest action in `GridAction::ALL`.
    pub fn greedy(&self, state: GridState) -> GridAction {
        let p = self.probabilities(state);
        let mut best = 0;
        for a in 1..4 {
            if p[a] > p[best] {
                best = a;
            }
        }
        GridAction::ALL[best]
    }

    /// Greedy action over the raw Q values (used while learning).
    pub(crate) fn greedy_by_value(&self, state: GridState) -> GridAction {
        let q = self.values(state);
        let mut best = 0;
        for a in 1..4 {
            if q[a] > q[best] {
                best = a;
            }
        }
        GridAction::ALL[best]
    }

    pub(crate) fn row_mut(&mut self, state: GridState) -> Option<&mut [f64; 4]> {
        let i = self.index(state)?;
        Some(&mut self.q[i])
    }

    pub(crate) fn entries(&self) -> impl Iterator<Item = (GridState, GridAction, f64)> + '_ {
        self.q.iter().enumerate().flat_map(move |(i, row)| {
            let s = GridState::new((i / self.width) as i32, (i % self.width) as i32);
            GridAction::ALL
                .into_iter()
                .map(move |a| (s, a, row[a.index()]))
        })
    }
}

impl Policy<GridSpec> for TabularPolicy {
    fn act(&self, _env: &GridSpec, state: &GridState) -> GridAction {
        self.greedy(*state)
    }

    fn certainty(&self, _env: &GridSpec, state: &GridState, action: &GridAction) -> f64 {
        self.probabilities(*state)[action.index()]
    }
}
