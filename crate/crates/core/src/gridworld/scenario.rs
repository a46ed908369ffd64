//! Scenario files.
//!
//! ```text
//! W H BUDGET R+ R- RSTEP
//! <H rows of W glyphs, top row first>   or   random: P N
//! ```
//!
//! Glyphs: `.` empty, `A` agent, `+` positive, `-` negative, `#` wall.
//! Random layouts put the agent in the center cell and scatter `P` positives
//! and `N` negatives over the remaining cells.

use std::path::Path;

use super::{ObjectType, Position, RewardScheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Fixed {
        agent: Position,
        objects: Vec<(Position, ObjectType)>,
    },
    Random {
        positives: u32,
        negatives: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    name: String,
    width: i32,
    height: i32,
    layout: Layout,
    reward_scheme: RewardScheme,
    step_budget: u32,
}

const BUILTIN: &[(&str, &str)] = &[
    ("exp1_3x3", include_str!("../../scenarios/exp1_3x3.txt")),
    ("exp1_5x5", include_str!("../../scenarios/exp1_5x5.txt")),
    ("exp1_7x7", include_str!("../../scenarios/exp1_7x7.txt")),
    ("fixed10", include_str!("../../scenarios/fixed10.txt")),
    ("random10", include_str!("../../scenarios/random10.txt")),
    ("corner_train", include_str!("../../scenarios/corner_train.txt")),
    ("corner_test_b", include_str!("../../scenarios/corner_test_b.txt")),
    ("corner_test_c", include_str!("../../scenarios/corner_test_c.txt")),
    ("corner_open_train", include_str!("../../scenarios/corner_open_train.txt")),
    ("corner_open_test_b", include_str!("../../scenarios/corner_open_test_b.txt")),
    ("corner_open_test_c", include_str!("../../scenarios/corner_open_test_c.txt")),
];

impl Scenario {
    pub fn builtin(name: &str) -> Result<Scenario> {
        BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{name}`")))
            .and_then(|(n, text)| Scenario::parse(n, text))
    }

    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_owned());
        Scenario::parse(&name, &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Scenario> {
        let bad = |msg: String| Error::Scenario(format!("{name}: {msg}"));
        let mut lines: Vec<&str> = text.lines().map(str::trim_end).collect();
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        let header = lines.first().ok_or_else(|| bad("empty file".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 6 {
            return Err(bad(format!("header needs 6 fields, found {}", fields.len())));
        }
        let dim = |s: &str, what: &str| -> Result<i32> {
            s.parse::<i32>()
                .ok()
                .filter(|v| *v >= 2)
                .ok_or_else(|| bad(format!("{what} `{s}` must be an integer >= 2")))
        };
        let width = dim(fields[0], "width")?;
        let height = dim(fields[1], "height")?;
        let step_budget: u32 = fields[2]
            .parse()
            .ok()
            .filter(|b| *b > 0)
            .ok_or_else(|| bad(format!("budget `{}` must be a positive integer", fields[2])))?;
        let reward = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|r| r.is_finite())
                .ok_or_else(|| bad(format!("reward `{s}` is not a finite number")))
        };
        let reward_scheme = RewardScheme {
            positive_reward: reward(fields[3])?,
            negative_reward: reward(fields[4])?,
            step_reward: reward(fields[5])?,
        };

        let body = &lines[1..];
        let layout = match body {
            [line] if line.starts_with("random:") => {
                let counts: Vec<&str> = line["random:".len()..].split_whitespace().collect();
                let [p, n] = counts[..] else {
                    return Err(bad(format!("`{line}` should read `random: P N`")));
                };
                let count = |s: &str| s.parse::<u32>().map_err(|_| bad(format!("bad count `{s}`")));
                let (positives, negatives) = (count(p)?, count(n)?);
                if (positives + negatives) as i64 > (width * height - 1) as i64 {
                    return Err(bad(format!(
                        "{} objects do not fit in {} free cells",
                        positives + negatives,
                        width * height - 1
                    )));
                }
                Layout::Random {
                    positives,
                    negatives,
                }
            }
            rows => {
                if rows.len() != height as usize {
                    return Err(bad(format!("expected {height} grid rows, found {}", rows.len())));
                }
                let mut agent = None;
                let mut objects = Vec::new();
                for (r, row) in rows.iter().enumerate() {
                    let y = height - 1 - r as i32;
                    if row.chars().count() != width as usize {
                        return Err(bad(format!("row {} has {} cells, expected {width}", r + 1, row.chars().count())));
                    }
                    for (x, glyph) in row.chars().enumerate() {
                        let pos = Position::new(x as i32, y);
                        let kind = match glyph {
                            '.' => continue,
                            'A' => {
                                if agent.replace(pos).is_some() {
                                    return Err(bad("more than one agent".into()));
                                }
                                continue;
                            }
                            '+' => ObjectType::Positive,
                            '-' => ObjectType::Negative,
                            '#' => ObjectType::Wall,
                            other => return Err(bad(format!("unknown glyph `{other}` in row {}", r + 1))),
                        };
                        objects.push((pos, kind));
                    }
                }
                let agent = agent.ok_or_else(|| bad("no agent `A` in layout".into()))?;
                Layout::Fixed { agent, objects }
            }
        };

        Ok(Scenario {
            name: name.to_owned(),
            width,
            height,
            layout,
            reward_scheme,
            step_budget,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn reward_scheme(&self) -> &RewardScheme {
        &self.reward_scheme
    }

    pub fn step_budget(&self) -> u32 {
        self.step_budget
    }

    /// Center cell, rounding toward lower indices on even sides.
    pub fn center(&self) -> Position {
        Position::new((self.width - 1) / 2, (self.height - 1) / 2)
    }

    /// Upper bound on collectible objects present at episode start.
    pub fn positive_count(&self) -> u32 {
        match &self.layout {
            Layout::Fixed { objects, .. } => {
                objects.iter().filter(|(_, k)| *k == ObjectType::Positive).count() as u32
            }
            Layout::Random { positives, .. } => *positives,
        }
    }

    pub fn negative_count(&self) -> u32 {
        match &self.layout {
            Layout::Fixed { objects, .. } => {
                objects.iter().filter(|(_, k)| *k == ObjectType::Negative).count() as u32
            }
            Layout::Random { negatives, .. } => *negatives,
        }
    }

    pub fn with_budget(mut self, step_budget: u32) -> Scenario {
        self.step_budget = step_budget;
        self
    }
}
