//! Symbolic view of a grid: one sub-state per (agent, object) pair, holding
//! the agent's position relative to that object. Pairs that do not involve
//! the agent, and walls, are dropped.

use std::fmt;

use crate::gridworld::{GridState, ObjectType};
use crate::scalar::Scalar;

/// Type pair indexing a Q-table. The first member is always the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypePair {
    AgentPositive,
    AgentNegative,
}

impl TypePair {
    pub fn with(object: ObjectType) -> Option<TypePair> {
        match object {
            ObjectType::Positive => Some(TypePair::AgentPositive),
            ObjectType::Negative => Some(TypePair::AgentNegative),
            ObjectType::Agent | ObjectType::Wall => None,
        }
    }

    pub fn object(self) -> ObjectType {
        match self {
            TypePair::AgentPositive => ObjectType::Positive,
            TypePair::AgentNegative => ObjectType::Negative,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TypePair::AgentPositive => "AGENT_POSITIVE",
            TypePair::AgentNegative => "AGENT_NEGATIVE",
        }
    }

    pub fn from_name(name: &str) -> Option<TypePair> {
        [TypePair::AgentPositive, TypePair::AgentNegative]
            .into_iter()
            .find(|p| p.name() == name)
    }
}

impl fmt::Display for TypePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Agent position minus object position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Offset {
    pub dx: i32,
    pub dy: i32,
}

impl Offset {
    pub const fn new(dx: i32, dy: i32) -> Self {
        Offset { dx, dy }
    }

    pub fn is_contact(self) -> bool {
        self.dx == 0 && self.dy == 0
    }

    pub fn squared_norm(self) -> i64 {
        let (dx, dy) = (self.dx as i64, self.dy as i64);
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubState {
    pub pair: TypePair,
    pub offset: Offset,
    pub object_id: usize,
}

/// Euclidean distance between agent and object.
pub fn distance<T: Scalar>(sub: &SubState) -> T {
    T::of(sub.offset.squared_norm() as f64).sqrt()
}

/// Sub-states of one grid, ordered by object id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubStateView(Vec<SubState>);

impl SubStateView {
    pub fn new(mut subs: Vec<SubState>) -> Self {
        subs.sort_by_key(|s| s.object_id);
        SubStateView(subs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SubState> {
        self.0.iter()
    }

    pub fn get(&self, object_id: usize) -> Option<&SubState> {
        self.0
            .binary_search_by_key(&object_id, |s| s.object_id)
            .ok()
            .map(|i| &self.0[i])
    }
}

impl<'a> IntoIterator for &'a SubStateView {
    type Item = &'a SubState;
    type IntoIter = std::slice::Iter<'a, SubState>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub fn extract(state: &GridState) -> SubStateView {
    let agent = state.agent();
    let subs = state
        .objects()
        .filter_map(|(pos, cell)| {
            TypePair::with(cell.kind).map(|pair| SubState {
                pair,
                offset: Offset::new(agent.x - pos.x, agent.y - pos.y),
                object_id: cell.id,
            })
        })
        .collect();
    SubStateView::new(subs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{step, Action, Position, RewardScheme};

    fn grid(agent: (i32, i32), objs: &[((i32, i32), ObjectType)]) -> GridState {
        GridState::new(
            6,
            6,
            Position::new(agent.0, agent.1),
            objs.iter().map(|((x, y), k)| (Position::new(*x, *y), *k)),
        )
        .unwrap()
    }

    #[test]
    fn single_positive_offset() {
        let view = extract(&grid((1, 1), &[((3, 2), ObjectType::Positive)]));
        let sub = view.iter().next().unwrap();
        assert_eq!(sub.offset, Offset::new(-2, -1));
        assert_eq!(sub.pair, TypePair::AgentPositive);
        assert_eq!(distance::<f64>(sub), 5f64.sqrt());
    }

    #[test]
    fn mixed_objects_offsets() {
        let view = extract(&grid(
            (2, 2),
            &[((2, 4), ObjectType::Positive), ((0, 0), ObjectType::Negative), ((5, 5), ObjectType::Wall)],
        ));
        assert_eq!(view.len(), 2);
        let offsets: Vec<_> = view.iter().map(|s| (s.pair, s.offset)).collect();
        assert!(offsets.contains(&(TypePair::AgentPositive, Offset::new(0, -2))));
        assert!(offsets.contains(&(TypePair::AgentNegative, Offset::new(2, 2))));
        let d: Vec<f64> = view.iter().map(distance).collect();
        assert!(d.contains(&2.0));
    }

    #[test]
    fn distance_of_contact_is_zero() {
        let sub = SubState {
            pair: TypePair::AgentNegative,
            offset: Offset::new(0, 0),
            object_id: 0,
        };
        assert_eq!(distance::<f32>(&sub), 0.0);
        assert!(sub.offset.is_contact());
    }

    #[test]
    fn moving_up_raises_every_dy() {
        let s = grid((2, 2), &[((4, 5), ObjectType::Positive), ((0, 0), ObjectType::Negative)]);
        let before = extract(&s);
        let after = extract(&step(&s, Action::Up, &RewardScheme::STANDARD, 100).next);
        for (b, a) in before.iter().zip(after.iter()) {
            assert_eq!(a.object_id, b.object_id);
            assert_eq!(a.offset.dy, b.offset.dy + 1);
            assert_eq!(a.offset.dx, b.offset.dx);
        }
    }

    #[test]
    fn view_lookup_by_id() {
        let view = extract(&grid((0, 0), &[((1, 5), ObjectType::Positive), ((3, 1), ObjectType::Negative)]));
        assert_eq!(view.get(1).unwrap().offset, Offset::new(-3, -1));
        assert!(view.get(7).is_none());
    }
}
