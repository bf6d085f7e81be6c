use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Environment, InvalidReason, Termination, Transition, Validity};
use crate::encoding::EncodingSpec;
use crate::error::{Error, Result};

const FLATGRID11: &str = include_str!("../../layouts/flatgrid11.txt");
const HOLEYGRID11: &str = include_str!("../../layouts/holeygrid11.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Floor,
    Wall,
    Hole,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridState {
    pub row: i32,
    pub col: i32,
}

impl GridState {
    pub fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }
}

/// Grid moves, listed in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAction {
    Up,
    Right,
    Down,
    Left,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [
        GridAction::Up,
        GridAction::Right,
        GridAction::Down,
        GridAction::Left,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    fn delta(self) -> (i32, i32) {
        match self {
            GridAction::Up => (-1, 0),
            GridAction::Right => (0, 1),
            GridAction::Down => (1, 0),
            GridAction::Left => (0, -1),
        }
    }
}

/// √((n−1)² + (m−1)²): the diagonal of an `height × width` cell grid.
pub fn grid_max_state_distance(height: usize, width: usize) -> f64 {
    let dr = height.saturating_sub(1) as f64;
    let dc = width.saturating_sub(1) as f64;
    (dr * dr + dc * dc).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    name: String,
    height: usize,
    width: usize,
    cells: Vec<Cell>,
    start: GridState,
    target: GridState,
    pub target_reward: f64,
    pub hole_penalty: f64,
    pub step_cost: f64,
    pub max_steps: usize,
}

impl GridSpec {
    pub const PRESETS: [&'static str; 2] = ["flatgrid11", "holeygrid11"];

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name.to_ascii_lowercase().as_str() {
            "flatgrid11" => FLATGRID11,
            "holeygrid11" => HOLEYGRID11,
            _ => {
                return Err(Error::InvalidEnvironment(format!(
                    "unknown grid preset {name:?} (expected one of {:?})",
                    Self::PRESETS
                )))
            }
        };
        Self::parse(&name.to_ascii_lowercase(), text)
    }

    pub fn flat_grid11() -> Self {
        Self::preset("flatgrid11").expect("bundled layout is valid")
    }

    pub fn holey_grid11() -> Self {
        Self::preset("holeygrid11").expect("bundled layout is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "grid".into());
        Self::parse(&name, &text)
    }

    /// Parses the plain-text layout format. Lines starting with `;` are comments;
    /// blank lines are ignored. Every other line is one grid row.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut cells = Vec::new();
        let mut width = None;
        let mut height = 0usize;
        let mut start = None;
        let mut target = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with(';') {
                continue;
            }
            let line_err = |message: String| Error::Layout {
                line: lineno + 1,
                message,
            };
            let row: Vec<char> = line.chars().collect();
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(line_err(format!(
                        "row has {} cells, expected {w}",
                        row.len()
                    )))
                }
                _ => {}
            }
            for (col, ch) in row.into_iter().enumerate() {
                let here = GridState::new(height as i32, col as i32);
                let cell = match ch {
                    '#' => Cell::Wall,
                    '.' => Cell::Floor,
                    'O' => Cell::Hole,
                    'T' => {
                        if target.replace(here).is_some() {
                            return Err(line_err("more than one target cell".into()));
                        }
                        Cell::Target
                    }
                    'S' => {
                        if start.replace(here).is_some() {
                            return Err(line_err("more than one start cell".into()));
                        }
                        Cell::Floor
                    }
                    other => return Err(line_err(format!("unknown cell character {other:?}"))),
                };
                cells.push(cell);
            }
            height += 1;
        }
        let width = width.ok_or(Error::Layout {
            line: 0,
            message: "layout is empty".into(),
        })?;
        let missing = |what: &str| Error::Layout {
            line: 0,
            message: format!("layout has no {what} cell"),
        };
        let spec = Self {
            name: name.to_string(),
            height,
            width,
            cells,
            start: start.ok_or_else(|| missing("start ('S')"))?,
            target: target.ok_or_else(|| missing("target ('T')"))?,
            target_reward: 50.0,
            hole_penalty: -50.0,
            step_cost: -1.0,
            max_steps: 100,
        };
        for r in 0..height {
            for c in 0..width {
                let on_edge = r == 0 || c == 0 || r + 1 == height || c + 1 == width;
                if on_edge && spec.cells[r * width + c] != Cell::Wall {
                    return Err(Error::Layout {
                        line: 0,
                        message: format!("perimeter cell ({r}, {c}) must be a wall"),
                    });
                }
            }
        }
        Ok(spec)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn target(&self) -> GridState {
        self.target
    }

    pub fn cell(&self, state: GridState) -> Option<Cell> {
        if state.row < 0 || state.col < 0 {
            return None;
        }
        let (r, c) = (state.row as usize, state.col as usize);
        (r < self.height && c < self.width).then(|| self.cells[r * self.width + c])
    }

    pub fn index_of(&self, state: GridState) -> usize {
        state.row as usize * self.width + state.col as usize
    }

    /// All cells an episode may start from.
    pub fn valid_starts(&self) -> Vec<GridState> {
        (0..self.height as i32)
            .flat_map(|r| (0..self.width as i32).map(move |c| GridState::new(r, c)))
            .filter(|&s| self.validate_initial(&s).is_valid())
            .collect()
    }
}

impl Environment for GridSpec {
    type State = GridState;
    type Action = GridAction;

    fn name(&self) -> &str {
        &self.name
    }

    fn validate_initial(&self, state: &GridState) -> Validity {
        match self.cell(*state) {
            None => Validity::Invalid(InvalidReason::OutOfBounds),
            Some(Cell::Floor) => Validity::Valid,
            Some(Cell::Wall) => Validity::Invalid(InvalidReason::Wall),
            Some(Cell::Hole) => Validity::Invalid(InvalidReason::Hole),
            Some(Cell::Target) => Validity::Invalid(InvalidReason::Target),
        }
    }

    fn transition(&self, state: &GridState, action: &GridAction) -> Result<Transition<GridState>> {
        let (dr, dc) = action.delta();
        let moved = GridState::new(state.row + dr, state.col + dc);
        let t = match self.cell(moved) {
            None | Some(Cell::Wall) => Transition {
                next: *state,
                reward: self.step_cost,
                termination: None,
            },
            Some(Cell::Floor) => Transition {
                next: moved,
                reward: self.step_cost,
                termination: None,
            },
            Some(Cell::Target) => Transition {
                next: moved,
                reward: self.step_cost + self.target_reward,
                termination: Some(Termination::Success),
            },
            Some(Cell::Hole) => Transition {
                next: moved,
                reward: self.step_cost + self.hole_penalty,
                termination: Some(Termination::Failure),
            },
        };
        Ok(t)
    }

    fn horizon(&self) -> usize {
        self.max_steps
    }

    fn position(&self, state: &GridState) -> Vec<f64> {
        vec![state.row as f64, state.col as f64]
    }

    fn max_state_distance(&self) -> f64 {
        grid_max_state_distance(self.height, self.width)
    }

    fn state_count(&self) -> Option<usize> {
        Some(self.height * self.width)
    }

    /// Only interior coordinates are encoded: `[1, size − 2]` per axis.
    fn encoding_spec(&self, bits_per_dim: u32) -> Result<EncodingSpec> {
        if self.height < 3 || self.width < 3 {
            return Err(Error::InvalidEnvironment(
                "grid has no interior cells".into(),
            ));
        }
        EncodingSpec::discrete(
            bits_per_dim,
            &[(1, self.height as i64 - 2), (1, self.width as i64 - 2)],
        )
    }

    fn state_from_values(&self, values: &[f64]) -> Result<GridState> {
        match values {
            [r, c] => Ok(GridState::new(r.round() as i32, c.round() as i32)),
            _ => Err(Error::InvalidState(format!(
                "grid state needs 2 values, got {}",
                values.len()
            ))),
        }
    }

    fn canonical_start(&self) -> GridState {
        self.start
    }
}
