use std::fmt;

use super::GridState;
use crate::error::{Error, Result};

/// Canonical byte encoding of the Markov state of the game: dimensions, agent
/// cell and every live object. The step counter is not part of it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey(Vec<u8>);

impl StateKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(text: &str) -> Result<StateKey> {
        hex::decode(text)
            .map(StateKey)
            .map_err(|e| Error::Snapshot(format!("bad state key `{text}`: {e}")))
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn full_state_key(state: &GridState) -> StateKey {
    let mut bytes = Vec::with_capacity(8 + 5 * state.objects.len());
    for v in [state.width, state.height, state.agent.x, state.agent.y] {
        bytes.extend_from_slice(&(v as u16).to_le_bytes());
    }
    // BTreeMap iteration is position-ordered, hence canonical.
    for (pos, cell) in &state.objects {
        bytes.extend_from_slice(&(pos.x as u16).to_le_bytes());
        bytes.extend_from_slice(&(pos.y as u16).to_le_bytes());
        bytes.push(cell.kind as u8);
    }
    StateKey(bytes)
}
