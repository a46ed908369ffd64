//! Gridworld laboratory comparing tabular Q-learning, symbolic per-type-pair
//! Q-learning (broadcast and common-sense variants) and a small deep
//! Q-network on an object-collection game.
//!
//! Value learners are generic over [`Scalar`]; the aliases below fix the
//! precision used by the experiment harness.

pub mod abstraction;
pub mod agent;
pub mod dqn;
pub mod error;
pub mod gridworld;
pub mod harness;
pub mod policy;
pub mod scalar;
pub mod symbolic;
pub mod tabular;

pub use agent::{Agent, AgentConfig, AgentKind};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type QStore64 = symbolic::QStore<f64>;
pub type QStore32 = symbolic::QStore<f32>;
pub type FlatQTable64 = tabular::FlatQTable<f64>;
pub type FlatQTable32 = tabular::FlatQTable<f32>;
pub type Mlp64 = dqn::Mlp<f64>;
pub type Mlp32 = dqn::Mlp<f32>;
