use crate::gridworld::{GridState, ObjectType};
use crate::scalar::Scalar;

pub const CHANNELS: usize = 4;

fn channel(kind: ObjectType) -> usize {
    match kind {
        ObjectType::Agent => 0,
        ObjectType::Positive => 1,
        ObjectType::Negative => 2,
        ObjectType::Wall => 3,
    }
}

pub fn tensor_len(width: i32, height: i32) -> usize {
    (width * height) as usize * CHANNELS
}

/// One-hot cell encoding, `((y * width + x) * CHANNELS + channel)`.
pub fn encode<T: Scalar>(state: &GridState) -> Vec<T> {
    let w = state.width();
    let mut out = vec![T::zero(); tensor_len(w, state.height())];
    let mut mark = |x: i32, y: i32, kind| out[(y * w + x) as usize * CHANNELS + channel(kind)] = T::one();
    mark(state.agent().x, state.agent().y, ObjectType::Agent);
    for (pos, cell) in state.objects() {
        mark(pos.x, pos.y, cell.kind);
    }
    out
}
