//! Minimal deep Q-network: one-hot grid input, two rectifier hidden layers,
//! uniform experience replay and a periodically synced target network.

mod mlp;
mod replay;
mod tensor;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gridworld::Action;
use crate::policy::argmax_random_tie;
use crate::scalar::Scalar;

pub use mlp::{Activations, Dense, Mlp};
pub use replay::{Experience, ReplayBuffer};
pub use tensor::{encode, tensor_len, CHANNELS};

#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Environment steps between target-network copies.
    pub sync_every: u64,
    /// Environment steps between gradient steps.
    pub train_every: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            hidden: vec![64, 64],
            learning_rate: 0.001,
            batch_size: 32,
            replay_capacity: 10_000,
            sync_every: 500,
            train_every: 1,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.replay_capacity == 0 || self.sync_every == 0 || self.train_every == 0 {
            return Err(Error::Config("dqn sizes and cadences must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("dqn learning rate {}", self.learning_rate)));
        }
        Ok(())
    }

    pub fn layer_sizes(&self, input: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(&self.hidden);
        sizes.push(Action::COUNT);
        sizes
    }
}

fn td_target<T: Scalar>(target: &Mlp<T>, exp: &Experience<T>, gamma: T) -> Result<T> {
    if exp.terminal {
        return Ok(exp.reward);
    }
    let next = target.forward(&exp.next_state)?;
    Ok(exp.reward + gamma * next.into_iter().fold(T::neg_infinity(), T::max))
}

/// Mean squared TD error of `net` on `batch`, targets from `target`.
pub fn td_loss<T: Scalar>(net: &Mlp<T>, target: &Mlp<T>, batch: &[&Experience<T>], gamma: T) -> Result<T> {
    let mut loss = T::zero();
    for exp in batch {
        let y = td_target(target, exp, gamma)?;
        let q = net.forward(&exp.state)?[exp.action.index()];
        loss += (q - y) * (q - y);
    }
    Ok(loss / T::of(batch.len() as f64))
}

/// Loss and its gradient with respect to `net`; the gradient flows only
/// through the predicted value of the taken action.
pub fn td_gradient<T: Scalar>(
    net: &Mlp<T>,
    target: &Mlp<T>,
    batch: &[&Experience<T>],
    gamma: T,
) -> Result<(T, Mlp<T>)> {
    if batch.is_empty() {
        return Err(Error::Config("empty training batch".into()));
    }
    let n = T::of(batch.len() as f64);
    let mut grad = net.zero_like();
    let mut loss = T::zero();
    let mut d_out = vec![T::zero(); net.output_len()];
    for exp in batch {
        let y = td_target(target, exp, gamma)?;
        let acts = net.forward_cached(&exp.state)?;
        let err = acts.output()[exp.action.index()] - y;
        loss += err * err;
        d_out.iter_mut().for_each(|d| *d = T::zero());
        d_out[exp.action.index()] = T::of(2.0) * err / n;
        net.accumulate_gradient(&acts, &d_out, &mut grad);
    }
    Ok((loss / n, grad))
}

/// One plain gradient-descent step on the batch; returns the pre-step loss.
pub fn td_train_step<T: Scalar>(
    net: &mut Mlp<T>,
    target: &Mlp<T>,
    batch: &[&Experience<T>],
    gamma: T,
    learning_rate: T,
) -> Result<T> {
    let (loss, grad) = td_gradient(net, target, batch, gamma)?;
    if !loss.is_finite() {
        return Err(Error::Diverged(format!("non-finite TD loss {loss}")));
    }
    net.descend(&grad, learning_rate);
    if !net.is_finite() {
        return Err(Error::Diverged("non-finite parameters after update".into()));
    }
    Ok(loss)
}

pub fn sync_target<T: Scalar>(net: &Mlp<T>, target: &mut Mlp<T>) {
    target.clone_from(net);
}

/// Online/target pair plus replay memory.
#[derive(Debug, Clone)]
pub struct DqnLearner<T: Scalar> {
    config: DqnConfig,
    online: Mlp<T>,
    target: Mlp<T>,
    replay: ReplayBuffer<T>,
    steps: u64,
    syncs: Vec<u64>,
}

impl<T: Scalar> DqnLearner<T> {
    pub fn new<R: Rng + ?Sized>(config: DqnConfig, input_len: usize, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let online = Mlp::glorot(&config.layer_sizes(input_len), rng)?;
        Ok(Self::from_network(config, online))
    }

    pub fn from_network(config: DqnConfig, online: Mlp<T>) -> Self {
        DqnLearner {
            replay: ReplayBuffer::new(config.replay_capacity),
            target: online.clone(),
            online,
            config,
            steps: 0,
            syncs: Vec::new(),
        }
    }

    pub fn online(&self) -> &Mlp<T> {
        &self.online
    }

    pub fn target(&self) -> &Mlp<T> {
        &self.target
    }

    /// Step counts at which the target network was refreshed.
    pub fn sync_log(&self) -> &[u64] {
        &self.syncs
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn greedy<R: Rng + ?Sized>(&self, input: &[T], rng: &mut R) -> Result<Action> {
        let q = self.online.forward(input)?;
        let row: [T; Action::COUNT] = q
            .try_into()
            .map_err(|_| Error::Dimension { expected: Action::COUNT, actual: self.online.output_len() })?;
        Ok(argmax_random_tie(&row, rng))
    }

    pub fn record<R: Rng + ?Sized>(&mut self, exp: Experience<T>, gamma: f64, rng: &mut R) -> Result<()> {
        self.replay.push(exp);
        self.steps += 1;
        if self.replay.len() >= self.config.batch_size && self.steps.is_multiple_of(self.config.train_every) {
            let batch = self.replay.sample(self.config.batch_size, rng);
            td_train_step(
                &mut self.online,
                &self.target,
                &batch,
                T::of(gamma),
                T::of(self.config.learning_rate),
            )?;
        }
        if self.steps.is_multiple_of(self.config.sync_every) {
            sync_target(&self.online, &mut self.target);
            self.syncs.push(self.steps);
        }
        Ok(())
    }
}
