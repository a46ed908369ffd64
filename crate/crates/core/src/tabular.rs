//! Plain Q-learning keyed by the full grid state.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gridworld::{Action, StateKey};
use crate::policy::argmax_random_tie;
use crate::scalar::{fmt_exact, parse_exact, Scalar};
use crate::symbolic::{Hyperparams, QRow};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatQTable<T: Scalar> {
    rows: HashMap<StateKey, QRow<T>>,
}

impl<T: Scalar> FlatQTable<T> {
    pub fn new() -> Self {
        FlatQTable { rows: HashMap::new() }
    }

    pub fn row(&self, key: &StateKey) -> QRow<T> {
        self.rows.get(key).copied().unwrap_or([T::zero(); Action::COUNT])
    }

    pub fn get(&self, key: &StateKey, action: Action) -> T {
        self.row(key)[action.index()]
    }

    pub fn set(&mut self, key: &StateKey, action: Action, value: T) {
        if let Some(row) = self.rows.get_mut(key) {
            row[action.index()] = value;
        } else {
            let mut row = [T::zero(); Action::COUNT];
            row[action.index()] = value;
            self.rows.insert(key.clone(), row);
        }
    }

    pub fn max(&self, key: &StateKey) -> T {
        self.row(key).into_iter().fold(T::neg_infinity(), T::max)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// `FLAT <hex key> ACTION VALUE` per entry, sorted.
    pub fn to_snapshot(&self) -> String {
        let mut lines: Vec<String> = self
            .rows
            .iter()
            .flat_map(|(key, row)| {
                let hex = key.to_hex();
                Action::ALL
                    .into_iter()
                    .map(move |a| format!("FLAT {hex} {} {}", a.name(), fmt_exact(row[a.index()])))
            })
            .collect();
        lines.sort();
        let mut out = String::new();
        for line in lines {
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut table = FlatQTable::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Snapshot(format!("line {}: `{line}`", n + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let ["FLAT", key, action, value] = fields[..] else {
                return Err(bad());
            };
            let key = StateKey::from_hex(key)?;
            let action = Action::from_name(action).ok_or_else(bad)?;
            let value: T = parse_exact(value).ok_or_else(bad)?;
            table.set(&key, action, value);
        }
        Ok(table)
    }
}

pub fn tabular_update<T: Scalar>(
    table: &mut FlatQTable<T>,
    key: &StateKey,
    action: Action,
    reward: f64,
    next_key: &StateKey,
    terminal: bool,
    hp: &Hyperparams,
) {
    let bootstrap = if terminal {
        T::zero()
    } else {
        T::of(hp.gamma) * table.max(next_key)
    };
    let q = table.get(key, action);
    let alpha = T::of(hp.alpha);
    table.set(key, action, (T::one() - alpha) * q + alpha * (T::of(reward) + bootstrap));
}

pub fn tabular_select<T: Scalar, R: Rng + ?Sized>(table: &FlatQTable<T>, key: &StateKey, rng: &mut R) -> Action {
    argmax_random_tie(&table.row(key), rng)
}
