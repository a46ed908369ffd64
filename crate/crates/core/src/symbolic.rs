//! Per-type-pair Q-learning over relative offsets.
//!
//! Two variants share the store:
//! * broadcast (`srl_*`): every sub-state is updated with the shared reward,
//!   and actions maximise the plain sum of Q over sub-states;
//! * common-sense (`srlcs_*`): a nonzero reward only updates the sub-state of
//!   the object that was touched, and each sub-state's Q-row is divided by the
//!   squared distance to its object before summing.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::abstraction::{Offset, SubState, SubStateView, TypePair};
use crate::error::{Error, Result};
use crate::gridworld::Action;
use crate::policy::argmax_random_tie;
use crate::scalar::{fmt_exact, parse_exact, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 1.0,
            gamma: 0.9,
            epsilon: 0.1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Config(format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        Ok(())
    }
}

pub type QRow<T> = [T; Action::COUNT];

/// Q-values keyed by (type pair, offset); absent rows read as zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QStore<T: Scalar> {
    rows: HashMap<(TypePair, Offset), QRow<T>>,
}

impl<T: Scalar> QStore<T> {
    pub fn new() -> Self {
        QStore { rows: HashMap::new() }
    }

    pub fn row(&self, pair: TypePair, offset: Offset) -> QRow<T> {
        self.rows.get(&(pair, offset)).copied().unwrap_or([T::zero(); Action::COUNT])
    }

    pub fn get(&self, pair: TypePair, offset: Offset, action: Action) -> T {
        self.row(pair, offset)[action.index()]
    }

    pub fn set(&mut self, pair: TypePair, offset: Offset, action: Action, value: T) {
        self.rows.entry((pair, offset)).or_insert([T::zero(); Action::COUNT])[action.index()] = value;
    }

    pub fn max(&self, pair: TypePair, offset: Offset) -> T {
        self.row(pair, offset).into_iter().fold(T::neg_infinity(), T::max)
    }

    /// Number of (pair, offset) rows ever written.
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn scale(&mut self, factor: T) {
        for row in self.rows.values_mut() {
            for q in row.iter_mut() {
                *q *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.rows.values().flatten().all(|q| q.is_finite())
    }

    /// One line per entry, `PAIR dx dy ACTION VALUE`, sorted.
    pub fn to_snapshot(&self) -> String {
        let mut lines: Vec<String> = self
            .rows
            .iter()
            .flat_map(|((pair, off), row)| {
                Action::ALL.into_iter().map(move |a| {
                    format!("{} {} {} {} {}", pair.name(), off.dx, off.dy, a.name(), fmt_exact(row[a.index()]))
                })
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
        let mut store = QStore::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Snapshot(format!("line {}: `{line}`", n + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [pair, dx, dy, action, value] = fields[..] else {
                return Err(bad());
            };
            let pair = TypePair::from_name(pair).ok_or_else(bad)?;
            let dx: i32 = dx.parse().map_err(|_| bad())?;
            let dy: i32 = dy.parse().map_err(|_| bad())?;
            let action = Action::from_name(action).ok_or_else(bad)?;
            let value: T = parse_exact(value).ok_or_else(bad)?;
            store.set(pair, Offset::new(dx, dy), action, value);
        }
        Ok(store)
    }
}

/// Symbolic record of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTransition {
    pub before: SubStateView,
    pub action: Action,
    pub reward: f64,
    pub after: SubStateView,
    pub collected_id: Option<usize>,
}

impl SymTransition {
    fn check(&self) -> Result<()> {
        for sub in &self.after {
            if self.before.get(sub.object_id).is_none() {
                return Err(Error::Inconsistent(format!("object {} appeared from nowhere", sub.object_id)));
            }
        }
        for sub in &self.before {
            let gone = self.after.get(sub.object_id).is_none();
            let collected = self.collected_id == Some(sub.object_id);
            if gone != collected {
                return Err(Error::Inconsistent(format!(
                    "object {} vanished={gone} but collected={collected}",
                    sub.object_id
                )));
            }
        }
        if let Some(id) = self.collected_id {
            if self.before.get(id).is_none() {
                return Err(Error::Inconsistent(format!("collected object {id} was not present")));
            }
        }
        Ok(())
    }
}

fn update_one<T: Scalar>(store: &mut QStore<T>, sub: &SubState, tr: &SymTransition, hp: &Hyperparams) {
    let bootstrap = if tr.collected_id == Some(sub.object_id) {
        T::zero()
    } else {
        let next = tr.after.get(sub.object_id).expect("checked transition");
        T::of(hp.gamma) * store.max(sub.pair, next.offset)
    };
    let q = store.get(sub.pair, sub.offset, tr.action);
    // Convex form so that alpha = 1 overwrites exactly.
    let alpha = T::of(hp.alpha);
    let updated = (T::one() - alpha) * q + alpha * (T::of(tr.reward) + bootstrap);
    store.set(sub.pair, sub.offset, tr.action, updated);
}

/// Broadcast update: every sub-state receives the step's reward.
pub fn srl_update<T: Scalar>(store: &mut QStore<T>, tr: &SymTransition, hp: &Hyperparams) -> Result<()> {
    tr.check()?;
    for sub in &tr.before {
        update_one(store, sub, tr, hp);
    }
    Ok(())
}

/// Gated update: zero rewards behave like [`srl_update`]; a nonzero reward is
/// credited only to the object the agent reached.
pub fn srlcs_update<T: Scalar>(store: &mut QStore<T>, tr: &SymTransition, hp: &Hyperparams) -> Result<()> {
    tr.check()?;
    if tr.reward == 0.0 {
        return srl_update(store, tr, hp);
    }
    let id = tr.collected_id.ok_or_else(|| {
        Error::Inconsistent(format!("reward {} without a collected object", tr.reward))
    })?;
    let sub = *tr.before.get(id).expect("checked transition");
    update_one(store, &sub, tr, hp);
    Ok(())
}

fn random_if_empty<R: Rng + ?Sized>(view: &SubStateView, rng: &mut R) -> Option<Action> {
    view.is_empty().then(|| Action::random(rng))
}

/// Greedy action on the plain sum of Q-rows.
pub fn srl_select<T: Scalar, R: Rng + ?Sized>(store: &QStore<T>, view: &SubStateView, rng: &mut R) -> Action {
    if let Some(a) = random_if_empty(view, rng) {
        return a;
    }
    let mut totals = [T::zero(); Action::COUNT];
    for sub in view {
        for (t, q) in totals.iter_mut().zip(store.row(sub.pair, sub.offset)) {
            *t += q;
        }
    }
    argmax_random_tie(&totals, rng)
}

/// Greedy action on the sum of Q-rows weighted by inverse squared distance.
pub fn srlcs_select<T: Scalar, R: Rng + ?Sized>(store: &QStore<T>, view: &SubStateView, rng: &mut R) -> Result<Action> {
    if let Some(a) = random_if_empty(view, rng) {
        return Ok(a);
    }
    let mut totals = [T::zero(); Action::COUNT];
    for sub in view {
        let d2 = sub.offset.squared_norm();
        if d2 == 0 {
            return Err(Error::DegenerateDistance { object_id: sub.object_id });
        }
        let d2 = T::of(d2 as f64);
        for (t, q) in totals.iter_mut().zip(store.row(sub.pair, sub.offset)) {
            *t += q / d2;
        }
    }
    Ok(argmax_random_tie(&totals, rng))
}
