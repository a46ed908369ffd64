//! The collection game: a star-shaped agent walks a bounded grid, picking up
//! positive and negative objects until every positive is gone or the step
//! budget runs out.

mod key;
mod scenario;

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

pub use key::{full_state_key, StateKey};
pub use scenario::{Layout, Scenario};

/// Cell coordinate; `y` grows upward, so row `height - 1` is the top of a drawing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub const fn new(x: i32, y: i32) -> Self {
        Position { x, y }
    }

    pub fn shifted(self, action: Action) -> Position {
        let (dx, dy) = action.delta();
        Position::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectType {
    Agent,
    Positive,
    Negative,
    Wall,
}

impl ObjectType {
    pub fn glyph(self) -> char {
        match self {
            ObjectType::Agent => 'A',
            ObjectType::Positive => '+',
            ObjectType::Negative => '-',
            ObjectType::Wall => '#',
        }
    }

    pub fn is_collectible(self) -> bool {
        matches!(self, ObjectType::Positive | ObjectType::Negative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Action {
        Action::ALL[index]
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Action::Up => (0, 1),
            Action::Down => (0, -1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "UP",
            Action::Down => "DOWN",
            Action::Left => "LEFT",
            Action::Right => "RIGHT",
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Action {
        Action::ALL[rng.gen_range(0..Action::COUNT)]
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardScheme {
    pub positive_reward: f64,
    pub negative_reward: f64,
    pub step_reward: f64,
}

impl RewardScheme {
    pub const STANDARD: RewardScheme = RewardScheme {
        positive_reward: 1.0,
        negative_reward: -1.0,
        step_reward: 0.0,
    };

    pub fn reward_for(&self, collected: Option<ObjectType>) -> f64 {
        match collected {
            Some(ObjectType::Positive) => self.positive_reward,
            Some(ObjectType::Negative) => self.negative_reward,
            _ => self.step_reward,
        }
    }
}

/// A non-agent occupant of a cell. `id` is stable for the whole episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub kind: ObjectType,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridState {
    width: i32,
    height: i32,
    agent: Position,
    objects: BTreeMap<Position, Cell>,
    steps_taken: u32,
    positives_remaining: u32,
}

impl GridState {
    /// Builds a state from an agent position and a list of non-agent objects.
    /// Object ids are assigned in reading order: top row first, left to right.
    pub fn new(
        width: i32,
        height: i32,
        agent: Position,
        objects: impl IntoIterator<Item = (Position, ObjectType)>,
    ) -> Result<GridState> {
        if width < 1 || height < 1 {
            return Err(Error::Scenario(format!("grid {width}x{height} is empty")));
        }
        let inside = |p: Position| p.x >= 0 && p.x < width && p.y >= 0 && p.y < height;
        if !inside(agent) {
            return Err(Error::Scenario(format!("agent {agent} is off the grid")));
        }
        let mut placed: Vec<(Position, ObjectType)> = objects.into_iter().collect();
        placed.sort_by_key(|(p, _)| (std::cmp::Reverse(p.y), p.x));
        let mut map = BTreeMap::new();
        for (id, (pos, kind)) in placed.into_iter().enumerate() {
            if kind == ObjectType::Agent {
                return Err(Error::Scenario(format!("second agent at {pos}")));
            }
            if !inside(pos) {
                return Err(Error::Scenario(format!("object at {pos} is off the grid")));
            }
            if pos == agent {
                return Err(Error::Scenario(format!("object at {pos} overlaps the agent")));
            }
            if map.insert(pos, Cell { kind, id }).is_some() {
                return Err(Error::Scenario(format!("two objects share {pos}")));
            }
        }
        let positives_remaining = map
            .values()
            .filter(|c| c.kind == ObjectType::Positive)
            .count() as u32;
        Ok(GridState {
            width,
            height,
            agent,
            objects: map,
            steps_taken: 0,
            positives_remaining,
        })
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn agent(&self) -> Position {
        self.agent
    }

    pub fn steps_taken(&self) -> u32 {
        self.steps_taken
    }

    pub fn positives_remaining(&self) -> u32 {
        self.positives_remaining
    }

    pub fn objects(&self) -> impl Iterator<Item = (Position, Cell)> + '_ {
        self.objects.iter().map(|(p, c)| (*p, *c))
    }

    pub fn object_at(&self, pos: Position) -> Option<Cell> {
        self.objects.get(&pos).copied()
    }

    pub fn count(&self, kind: ObjectType) -> usize {
        self.objects.values().filter(|c| c.kind == kind).count()
    }

    pub fn contains(&self, pos: Position) -> bool {
        pos.x >= 0 && pos.x < self.width && pos.y >= 0 && pos.y < self.height
    }

    pub fn is_terminal(&self) -> bool {
        self.positives_remaining == 0
    }

    /// Moves every occupant by `(dx, dy)`; `None` if anything would leave the grid.
    pub fn translated(&self, dx: i32, dy: i32) -> Option<GridState> {
        let shift = |p: Position| Position::new(p.x + dx, p.y + dy);
        let agent = shift(self.agent);
        if !self.contains(agent) {
            return None;
        }
        let mut objects = BTreeMap::new();
        for (pos, cell) in &self.objects {
            let moved = shift(*pos);
            if !self.contains(moved) {
                return None;
            }
            objects.insert(moved, *cell);
        }
        Some(GridState {
            agent,
            objects,
            ..self.clone()
        })
    }

    /// ASCII drawing, top row first.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(((self.width + 1) * self.height) as usize);
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                let p = Position::new(x, y);
                let glyph = if p == self.agent {
                    'A'
                } else {
                    self.objects.get(&p).map_or('.', |c| c.kind.glyph())
                };
                out.push(glyph);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: GridState,
    pub reward: f64,
    pub collected: Option<ObjectType>,
    /// Id of the collected object, if any.
    pub collected_id: Option<usize>,
    pub terminal: bool,
    pub truncated: bool,
}

/// Places the scenario's objects for a fresh episode.
pub fn init_episode<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<GridState> {
    match scenario.layout() {
        Layout::Fixed { agent, objects } => {
            GridState::new(scenario.width(), scenario.height(), *agent, objects.iter().copied())
        }
        Layout::Random {
            positives,
            negatives,
        } => {
            let agent = scenario.center();
            let mut free: Vec<Position> = (0..scenario.height())
                .flat_map(|y| (0..scenario.width()).map(move |x| Position::new(x, y)))
                .filter(|p| *p != agent)
                .collect();
            let needed = (positives + negatives) as usize;
            if needed > free.len() {
                return Err(Error::Scenario(format!(
                    "{} objects do not fit in {} free cells of {}",
                    needed,
                    free.len(),
                    scenario.name()
                )));
            }
            let (chosen, _) = free.partial_shuffle(rng, needed);
            let kinds = std::iter::repeat_n(ObjectType::Positive, *positives as usize)
                .chain(std::iter::repeat_n(ObjectType::Negative, *negatives as usize));
            let objects: Vec<_> = chosen.iter().copied().zip(kinds).collect();
            GridState::new(scenario.width(), scenario.height(), agent, objects)
        }
    }
}

/// Advances the game by one move. Blocked moves (walls, grid edge) keep the
/// agent in place but still consume a step.
pub fn step(state: &GridState, action: Action, scheme: &RewardScheme, budget: u32) -> StepOutcome {
    debug_assert!(!state.is_terminal() && state.steps_taken < budget);
    let mut next = state.clone();
    next.steps_taken += 1;

    let target = state.agent.shifted(action);
    let mut collected = None;
    let mut collected_id = None;
    if state.contains(target) {
        match state.objects.get(&target) {
            Some(cell) if cell.kind == ObjectType::Wall => {}
            Some(cell) => {
                collected = Some(cell.kind);
                collected_id = Some(cell.id);
                next.objects.remove(&target);
                if cell.kind == ObjectType::Positive {
                    next.positives_remaining -= 1;
                }
                next.agent = target;
            }
            None => next.agent = target,
        }
    }

    let terminal = next.positives_remaining == 0;
    let truncated = !terminal && next.steps_taken >= budget;
    StepOutcome {
        reward: scheme.reward_for(collected),
        next,
        collected,
        collected_id,
        terminal,
        truncated,
    }
}
