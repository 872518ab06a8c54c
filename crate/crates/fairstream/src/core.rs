//! Domain types shared by every other module: items, streams, decisions, and
//! the allocation state they evolve.
//!
//! Conventions fixed here and relied on everywhere else:
//! - agents are indexed `1..=n`;
//! - items are identified by their arrival ordinal `1..=t` and never re-arrive;
//! - an allocation only ever grows (decisions are irrevocable).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{is_nonnegative, Q};

/// Whether the stream carries goods (values) or chores (costs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Goods,
    Chores,
}

impl Direction {
    pub fn is_goods(self) -> bool {
        matches!(self, Direction::Goods)
    }
}

/// Arrival ordinal of an item, starting at 1.
pub type ItemId = u32;

/// Agent index, `1..=n`.
pub type AgentId = usize;

/// Per-agent category label for matroid-backed streams. `None` marks an item
/// the agent's rank function treats as a loop (zero marginal everywhere).
pub type Category = Option<String>;

/// What an arriving item reveals: one entry per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    /// Additive value or cost row, one non-negative rational per agent.
    Additive(#[serde(with = "crate::rational::q_vec_serde")] Vec<Q>),
    /// Category row, one label per agent.
    Categories(Vec<Category>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Additive(v) => v.len(),
            Payload::Categories(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An item together with its arrival position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub payload: Payload,
}

/// Which oracle family evaluates the stream's payload rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Additive,
    Matroid,
}

/// An ordered item sequence plus the session parameters fixed up front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stream {
    pub direction: Direction,
    pub n: usize,
    pub representation: Representation,
    /// 0 = immediate allocation; 1 = each item may be buffered one round.
    pub deadline: u8,
    pub items: Vec<Item>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    #[error("stream must have at least one agent")]
    NoAgents,
    #[error("deadline must be 0 or 1, got {0}")]
    BadDeadline(u8),
    #[error("item {id}: payload length {got} does not match n={n}")]
    BadRowLength { id: ItemId, got: usize, n: usize },
    #[error("item {id}: negative entry in additive row")]
    NegativeValue { id: ItemId },
    #[error("item {id}: payload kind does not match stream representation")]
    MixedRepresentation { id: ItemId },
    #[error("item ids must be the arrival ordinals 1..=t, found {0}")]
    BadItemId(ItemId),
    #[error("round {0} out of range")]
    OutOfRange(u32),
    #[error("illegal decision: {0}")]
    IllegalDecision(String),
}

impl Stream {
    /// Builds a stream and checks every structural invariant.
    pub fn new(
        direction: Direction,
        n: usize,
        representation: Representation,
        deadline: u8,
        items: Vec<Item>,
    ) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::NoAgents);
        }
        if deadline > 1 {
            return Err(CoreError::BadDeadline(deadline));
        }
        for (pos, item) in items.iter().enumerate() {
            if item.id != (pos + 1) as ItemId {
                return Err(CoreError::BadItemId(item.id));
            }
            if item.payload.len() != n {
                return Err(CoreError::BadRowLength {
                    id: item.id,
                    got: item.payload.len(),
                    n,
                });
            }
            match (&item.payload, representation) {
                (Payload::Additive(row), Representation::Additive) => {
                    if !row.iter().all(is_nonnegative) {
                        return Err(CoreError::NegativeValue { id: item.id });
                    }
                }
                (Payload::Categories(_), Representation::Matroid) => {}
                _ => return Err(CoreError::MixedRepresentation { id: item.id }),
            }
        }
        Ok(Stream {
            direction,
            n,
            representation,
            deadline,
            items,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The set of item ids that have arrived by round `k` (`T^k`).
    pub fn prefix_items(&self, k: u32) -> Result<BTreeSet<ItemId>, CoreError> {
        if k as usize > self.items.len() {
            return Err(CoreError::OutOfRange(k));
        }
        Ok((1..=k).collect())
    }
}

/// The irrevocable action taken on an arriving item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "decision")]
pub enum Decision {
    Assign { agent: AgentId },
    Discard,
    Hold,
}

impl Decision {
    pub fn assign(agent: AgentId) -> Self {
        Decision::Assign { agent }
    }
}

/// Bundles, discard pile, and the optional one-round hold buffer after some
/// prefix of the stream has been processed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub direction: Direction,
    pub n: usize,
    /// 0 = immediate; 1 = holds permitted.
    pub deadline: u8,
    /// `bundles[i-1]` is agent `i`'s bundle.
    pub bundles: Vec<BTreeSet<ItemId>>,
    pub discarded: BTreeSet<ItemId>,
    pub held: Option<ItemId>,
    /// Number of items processed so far.
    pub round: u32,
}

impl Allocation {
    pub fn empty(direction: Direction, n: usize, deadline: u8) -> Self {
        Allocation {
            direction,
            n,
            deadline,
            bundles: vec![BTreeSet::new(); n],
            discarded: BTreeSet::new(),
            held: None,
            round: 0,
        }
    }

    pub fn bundle(&self, agent: AgentId) -> &BTreeSet<ItemId> {
        &self.bundles[agent - 1]
    }

    /// Applies one decision to the next arriving item and returns the
    /// successor allocation. The item must carry the next unprocessed id.
    pub fn apply_decision(&self, item_id: ItemId, decision: Decision) -> Result<Self, CoreError> {
        if item_id != self.round + 1 {
            return Err(CoreError::IllegalDecision(format!(
                "item {item_id} is not the next unprocessed id (round {})",
                self.round
            )));
        }
        let mut next = self.clone();
        next.round += 1;
        match decision {
            Decision::Assign { agent } => {
                if agent == 0 || agent > self.n {
                    return Err(CoreError::IllegalDecision(format!(
                        "agent {agent} out of range 1..={}",
                        self.n
                    )));
                }
                next.bundles[agent - 1].insert(item_id);
            }
            Decision::Discard => {
                if !self.direction.is_goods() {
                    return Err(CoreError::IllegalDecision(
                        "chores may not be discarded".into(),
                    ));
                }
                next.discarded.insert(item_id);
            }
            Decision::Hold => {
                if self.deadline != 1 {
                    return Err(CoreError::IllegalDecision(
                        "hold requires a deadline-1 stream".into(),
                    ));
                }
                if self.held.is_some() {
                    return Err(CoreError::IllegalDecision(
                        "hold buffer is already occupied".into(),
                    ));
                }
                next.held = Some(item_id);
            }
        }
        Ok(next)
    }

    /// Releases the held item into an agent's bundle.
    pub fn flush_held(&self, agent: AgentId) -> Result<Self, CoreError> {
        let Some(id) = self.held else {
            return Err(CoreError::IllegalDecision("no held item to flush".into()));
        };
        if agent == 0 || agent > self.n {
            return Err(CoreError::IllegalDecision(format!(
                "agent {agent} out of range 1..={}",
                self.n
            )));
        }
        let mut next = self.clone();
        next.held = None;
        next.bundles[agent - 1].insert(id);
        Ok(next)
    }

    /// Every processed item is in exactly one place.
    pub fn conservation_holds(&self) -> bool {
        let mut seen = BTreeSet::new();
        for b in &self.bundles {
            for &e in b {
                if !seen.insert(e) {
                    return false;
                }
            }
        }
        for &e in &self.discarded {
            if !seen.insert(e) {
                return false;
            }
        }
        if let Some(e) = self.held {
            if !seen.insert(e) {
                return false;
            }
        }
        seen.len() == self.round as usize && seen.iter().all(|&e| e >= 1 && e <= self.round)
    }
}
