//! Action selection shared by all agents.

use rand::Rng;

use crate::error::Result;
use crate::gridworld::Action;

/// Index of the largest value; exact ties are broken uniformly at random.
/// The stream is only consulted when there is a tie.
pub fn argmax_random_tie<T: PartialOrd + Copy, R: Rng + ?Sized>(values: &[T; Action::COUNT], rng: &mut R) -> Action {
    let mut best = values[0];
    let mut tied = [0usize; Action::COUNT];
    let mut n = 1;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > best {
            best = *v;
            tied[0] = i;
            n = 1;
        } else if *v == best {
            tied[n] = i;
            n += 1;
        }
    }
    let pick = if n == 1 { tied[0] } else { tied[rng.gen_range(0..n)] };
    Action::from_index(pick)
}

/// With probability `epsilon` a uniform action, otherwise `select`.
pub fn act_epsilon_greedy<R, F>(select: F, epsilon: f64, rng: &mut R) -> Result<Action>
where
    R: Rng + ?Sized,
    F: FnOnce(&mut R) -> Result<Action>,
{
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        Ok(Action::random(rng))
    } else {
        select(rng)
    }
}
