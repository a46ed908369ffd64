//! Uniform driving interface over the four learners.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::abstraction::extract;
use crate::dqn::{encode, DqnConfig, DqnLearner, Experience, Mlp};
use crate::error::{Error, Result};
use crate::gridworld::{full_state_key, Action, GridState, StepOutcome};
use crate::policy::act_epsilon_greedy;
use crate::scalar::Scalar;
use crate::symbolic::{srl_select, srl_update, srlcs_select, srlcs_update, Hyperparams, QStore, SymTransition};
use crate::tabular::{tabular_select, tabular_update, FlatQTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentKind {
    QLearn,
    Srl,
    SrlCs,
    Dqn,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [AgentKind::QLearn, AgentKind::Srl, AgentKind::SrlCs, AgentKind::Dqn];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::QLearn => "qlearn",
            AgentKind::Srl => "srl",
            AgentKind::SrlCs => "srlcs",
            AgentKind::Dqn => "dqn",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown agent `{s}` (expected qlearn, srl, srlcs or dqn)")))
    }
}

pub trait Agent: Send {
    fn kind(&self) -> AgentKind;

    fn act(&mut self, state: &GridState, epsilon: f64, rng: &mut dyn RngCore) -> Result<Action>;

    /// Learns from one step. Never called in test mode.
    fn observe(&mut self, state: &GridState, action: Action, outcome: &StepOutcome, rng: &mut dyn RngCore) -> Result<()>;

    /// Text snapshot of everything the agent has learned.
    fn snapshot(&self) -> String;

    /// Number of distinct value-table keys (0 for function approximators).
    fn table_size(&self) -> usize;
}

#[derive(Debug, Clone)]
pub struct TabularAgent<T: Scalar> {
    pub table: FlatQTable<T>,
    pub hp: Hyperparams,
}

impl<T: Scalar> TabularAgent<T> {
    pub fn new(hp: Hyperparams) -> Self {
        TabularAgent { table: FlatQTable::new(), hp }
    }
}

impl<T: Scalar> Agent for TabularAgent<T> {
    fn kind(&self) -> AgentKind {
        AgentKind::QLearn
    }

    fn act(&mut self, state: &GridState, epsilon: f64, rng: &mut dyn RngCore) -> Result<Action> {
        let key = full_state_key(state);
        act_epsilon_greedy(|r| Ok(tabular_select(&self.table, &key, r)), epsilon, rng)
    }

    fn observe(&mut self, state: &GridState, action: Action, outcome: &StepOutcome, _rng: &mut dyn RngCore) -> Result<()> {
        tabular_update(
            &mut self.table,
            &full_state_key(state),
            action,
            outcome.reward,
            &full_state_key(&outcome.next),
            outcome.terminal,
            &self.hp,
        );
        Ok(())
    }

    fn snapshot(&self) -> String {
        self.table.to_snapshot()
    }

    fn table_size(&self) -> usize {
        self.table.row_count()
    }
}

#[derive(Debug, Clone)]
pub struct SymbolicAgent<T: Scalar> {
    pub store: QStore<T>,
    pub hp: Hyperparams,
    common_sense: bool,
}

impl<T: Scalar> SymbolicAgent<T> {
    /// Broadcast rewards, summed Q-values.
    pub fn srl(hp: Hyperparams) -> Self {
        SymbolicAgent { store: QStore::new(), hp, common_sense: false }
    }

    /// Gated rewards, distance-weighted Q-values.
    pub fn srlcs(hp: Hyperparams) -> Self {
        SymbolicAgent { store: QStore::new(), hp, common_sense: true }
    }

    pub fn with_store(mut self, store: QStore<T>) -> Self {
        self.store = store;
        self
    }
}

impl<T: Scalar> Agent for SymbolicAgent<T> {
    fn kind(&self) -> AgentKind {
        if self.common_sense {
            AgentKind::SrlCs
        } else {
            AgentKind::Srl
        }
    }

    fn act(&mut self, state: &GridState, epsilon: f64, rng: &mut dyn RngCore) -> Result<Action> {
        let view = extract(state);
        if self.common_sense {
            act_epsilon_greedy(|r| srlcs_select(&self.store, &view, r), epsilon, rng)
        } else {
            act_epsilon_greedy(|r| Ok(srl_select(&self.store, &view, r)), epsilon, rng)
        }
    }

    fn observe(&mut self, state: &GridState, action: Action, outcome: &StepOutcome, _rng: &mut dyn RngCore) -> Result<()> {
        let tr = SymTransition {
            before: extract(state),
            action,
            reward: outcome.reward,
            after: extract(&outcome.next),
            collected_id: outcome.collected_id,
        };
        if self.common_sense {
            srlcs_update(&mut self.store, &tr, &self.hp)
        } else {
            srl_update(&mut self.store, &tr, &self.hp)
        }
    }

    fn snapshot(&self) -> String {
        self.store.to_snapshot()
    }

    fn table_size(&self) -> usize {
        self.store.row_count()
    }
}

#[derive(Debug, Clone)]
pub struct DqnAgent<T: Scalar> {
    pub learner: DqnLearner<T>,
    pub gamma: f64,
}

impl<T: Scalar> Agent for DqnAgent<T> {
    fn kind(&self) -> AgentKind {
        AgentKind::Dqn
    }

    fn act(&mut self, state: &GridState, epsilon: f64, rng: &mut dyn RngCore) -> Result<Action> {
        let x = encode::<T>(state);
        act_epsilon_greedy(|r| self.learner.greedy(&x, r), epsilon, rng)
    }

    fn observe(&mut self, state: &GridState, action: Action, outcome: &StepOutcome, rng: &mut dyn RngCore) -> Result<()> {
        let exp = Experience {
            state: encode(state),
            action,
            reward: T::of(outcome.reward),
            next_state: encode(&outcome.next),
            terminal: outcome.terminal,
        };
        self.learner.record(exp, self.gamma, rng)
    }

    fn snapshot(&self) -> String {
        self.learner.online().to_snapshot()
    }

    fn table_size(&self) -> usize {
        0
    }
}

/// Everything needed to construct a fresh agent of any kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentConfig {
    pub hp: Hyperparams,
    pub dqn: DqnConfig,
}

/// Tabular and symbolic agents learn in `f64`; the network runs in `f32`.
pub fn build_agent(
    kind: AgentKind,
    config: &AgentConfig,
    input_len: usize,
    rng: &mut dyn RngCore,
) -> Result<Box<dyn Agent>> {
    config.hp.validate()?;
    Ok(match kind {
        AgentKind::QLearn => Box::new(TabularAgent::<f64>::new(config.hp)),
        AgentKind::Srl => Box::new(SymbolicAgent::<f64>::srl(config.hp)),
        AgentKind::SrlCs => Box::new(SymbolicAgent::<f64>::srlcs(config.hp)),
        AgentKind::Dqn => Box::new(DqnAgent::<f32> {
            learner: DqnLearner::new(config.dqn.clone(), input_len, rng)?,
            gamma: config.hp.gamma,
        }),
    })
}

/// Rebuilds an agent from [`Agent::snapshot`] output.
pub fn restore_agent(kind: AgentKind, config: &AgentConfig, snapshot: &str) -> Result<Box<dyn Agent>> {
    config.hp.validate()?;
    Ok(match kind {
        AgentKind::QLearn => Box::new(TabularAgent {
            table: FlatQTable::<f64>::from_snapshot(snapshot)?,
            hp: config.hp,
        }),
        AgentKind::Srl => Box::new(SymbolicAgent::<f64>::srl(config.hp).with_store(QStore::from_snapshot(snapshot)?)),
        AgentKind::SrlCs => Box::new(SymbolicAgent::<f64>::srlcs(config.hp).with_store(QStore::from_snapshot(snapshot)?)),
        AgentKind::Dqn => Box::new(DqnAgent::<f32> {
            learner: DqnLearner::from_network(config.dqn.clone(), Mlp::from_snapshot(snapshot)?),
            gamma: config.hp.gamma,
        }),
    })
}
