//! Valuation and cost oracles.
//!
//! Additive tables cover the binary / bi-valued / tri-valued / general
//! classes. Submodular binary valuations are realized as partition-matroid
//! rank functions (an item's label per agent; `None` is a loop), and
//! supermodular binary costs as `|S| - rank(S)` over the same structure.
//! A small subset-table oracle backs fixed instances whose set function is
//! neither additive nor a rank function.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::core::{Category, Direction, ItemId, Payload, Representation, Stream};
use crate::rational::{q, Q};

#[derive(Debug, Error, PartialEq)]
pub enum ValuationError {
    #[error("unknown item {0}")]
    UnknownItem(ItemId),
    #[error("agent {0} out of range")]
    UnknownAgent(usize),
    #[error("marginal base already contains item {0}")]
    ItemInBase(ItemId),
}

/// The tightest function class an agent's oracle fits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuationClass {
    /// Additive with per-item values in `{0, 1}`.
    Binary,
    /// Additive with per-item values in `{a, b}`, `0 < a <= b`.
    BiValued(Q, Q),
    /// Additive with per-item values in `{a, b, z}`, `0 < a <= b <= z`.
    TriValued(Q, Q, Q),
    GeneralAdditive,
    /// Monotone submodular with 0/1 marginals (a matroid rank function).
    SubmodularBinary,
    /// Monotone supermodular with 0/1 marginals (`|S|` minus a matroid rank).
    SupermodularBinary,
}

/// Set-function oracle: evaluates any agent's value or cost of any item set.
pub trait Valuation: Send + Sync {
    fn n_agents(&self) -> usize;
    fn n_items(&self) -> usize;
    fn direction(&self) -> Direction;

    /// Value (goods) or cost (chores) of `items` for `agent`.
    fn set_value(&self, agent: usize, items: &BTreeSet<ItemId>) -> Result<Q, ValuationError>;

    /// `v(base + e) - v(base)`.
    fn marginal(
        &self,
        agent: usize,
        base: &BTreeSet<ItemId>,
        e: ItemId,
    ) -> Result<Q, ValuationError> {
        if base.contains(&e) {
            return Err(ValuationError::ItemInBase(e));
        }
        let mut with = base.clone();
        with.insert(e);
        Ok(self.set_value(agent, &with)? - self.set_value(agent, base)?)
    }

    fn classify(&self, agent: usize) -> Result<ValuationClass, ValuationError>;
}

/// Additive oracle: the value of a set is the sum of member weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveTable {
    direction: Direction,
    /// `weights[agent-1][item-1]`
    weights: Vec<Vec<Q>>,
}

impl AdditiveTable {
    pub fn new(direction: Direction, weights: Vec<Vec<Q>>) -> Self {
        AdditiveTable { direction, weights }
    }

    pub fn weight(&self, agent: usize, item: ItemId) -> Result<&Q, ValuationError> {
        let row = self
            .weights
            .get(agent - 1)
            .ok_or(ValuationError::UnknownAgent(agent))?;
        row.get(item as usize - 1)
            .ok_or(ValuationError::UnknownItem(item))
    }

    pub fn weights_of(&self, agent: usize) -> &[Q] {
        &self.weights[agent - 1]
    }
}

impl Valuation for AdditiveTable {
    fn n_agents(&self) -> usize {
        self.weights.len()
    }

    fn n_items(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn direction(&self) -> Direction {
        self.direction
    }

    fn set_value(&self, agent: usize, items: &BTreeSet<ItemId>) -> Result<Q, ValuationError> {
        let mut total = Q::zero();
        for &e in items {
            total += self.weight(agent, e)?.clone();
        }
        Ok(total)
    }

    fn marginal(
        &self,
        agent: usize,
        base: &BTreeSet<ItemId>,
        e: ItemId,
    ) -> Result<Q, ValuationError> {
        if base.contains(&e) {
            return Err(ValuationError::ItemInBase(e));
        }
        Ok(self.weight(agent, e)?.clone())
    }

    fn classify(&self, agent: usize) -> Result<ValuationClass, ValuationError> {
        let row = self
            .weights
            .get(agent - 1)
            .ok_or(ValuationError::UnknownAgent(agent))?;
        Ok(classify_additive(row))
    }
}

/// Levels actually present in an additive row decide the class. Zeros are
/// only admitted by the binary class; positive-level classes require every
/// value positive, matching the bi-/tri-valued parameter constraints.
fn classify_additive(row: &[Q]) -> ValuationClass {
    let mut levels: BTreeSet<&Q> = BTreeSet::new();
    for w in row {
        levels.insert(w);
    }
    let zero = Q::zero();
    let one = q(1);
    if levels.iter().all(|w| **w == zero || **w == one) {
        return ValuationClass::Binary;
    }
    let positives: Vec<&Q> = levels.iter().copied().filter(|w| **w > zero).collect();
    if positives.len() == levels.len() {
        match positives.as_slice() {
            [a] => return ValuationClass::BiValued((*a).clone(), (*a).clone()),
            [a, b] => return ValuationClass::BiValued((*a).clone(), (*b).clone()),
            [a, b, z] => {
                return ValuationClass::TriValued((*a).clone(), (*b).clone(), (*z).clone())
            }
            _ => {}
        }
    }
    ValuationClass::GeneralAdditive
}

/// Per-agent partition-matroid rank: the rank of a set is the number of
/// distinct categories it touches under that agent's labeling; loops
/// (`None`) contribute nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatroidRank {
    /// `categories[agent-1][item-1]`
    categories: Vec<Vec<Category>>,
}

impl PartitionMatroidRank {
    pub fn new(categories: Vec<Vec<Category>>) -> Self {
        PartitionMatroidRank { categories }
    }

    pub fn category(&self, agent: usize, item: ItemId) -> Result<&Category, ValuationError> {
        let row = self
            .categories
            .get(agent - 1)
            .ok_or(ValuationError::UnknownAgent(agent))?;
        row.get(item as usize - 1)
            .ok_or(ValuationError::UnknownItem(item))
    }

    pub fn categories_of(&self, agent: usize) -> &[Category] {
        &self.categories[agent - 1]
    }

    pub fn rank(&self, agent: usize, items: &BTreeSet<ItemId>) -> Result<u64, ValuationError> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for &e in items {
            if let Some(cat) = self.category(agent, e)? {
                seen.insert(cat.as_str());
            }
        }
        Ok(seen.len() as u64)
    }
}

impl Valuation for PartitionMatroidRank {
    fn n_agents(&self) -> usize {
        self.categories.len()
    }

    fn n_items(&self) -> usize {
        self.categories.first().map_or(0, Vec::len)
    }

    fn direction(&self) -> Direction {
        Direction::Goods
    }

    fn set_value(&self, agent: usize, items: &BTreeSet<ItemId>) -> Result<Q, ValuationError> {
        Ok(q(self.rank(agent, items)? as i64))
    }

    fn classify(&self, _agent: usize) -> Result<ValuationClass, ValuationError> {
        Ok(ValuationClass::SubmodularBinary)
    }
}

/// Supermodular binary cost `c(S) = |S| - rank(S)` over per-agent partition
/// matroids.
#[derive(Debug, Clone, PartialEq)]
pub struct SupermodularComplementCost {
    inner: PartitionMatroidRank,
}

impl SupermodularComplementCost {
    pub fn new(categories: Vec<Vec<Category>>) -> Self {
        SupermodularComplementCost {
            inner: PartitionMatroidRank::new(categories),
        }
    }

    pub fn rank_part(&self) -> &PartitionMatroidRank {
        &self.inner
    }
}

impl Valuation for SupermodularComplementCost {
    fn n_agents(&self) -> usize {
        self.inner.n_agents()
    }

    fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    fn direction(&self) -> Direction {
        Direction::Chores
    }

    fn set_value(&self, agent: usize, items: &BTreeSet<ItemId>) -> Result<Q, ValuationError> {
        let rank = self.inner.rank(agent, items)?;
        Ok(q(items.len() as i64 - rank as i64))
    }

    fn classify(&self, _agent: usize) -> Result<ValuationClass, ValuationError> {
        Ok(ValuationClass::SupermodularBinary)
    }
}

/// Explicit subset table for small fixed instances. `values[agent-1]` maps an
/// item-id bitmask (bit `id-1`) to the set value; every subset of the ground
/// set must be present.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularSetFunction {
    direction: Direction,
    n_items: usize,
    values: Vec<BTreeMap<u32, Q>>,
}

impl TabularSetFunction {
    pub fn new(direction: Direction, n_items: usize, values: Vec<BTreeMap<u32, Q>>) -> Self {
        TabularSetFunction {
            direction,
            n_items,
            values,
        }
    }

    pub fn mask_of(items: &BTreeSet<ItemId>) -> u32 {
        items.iter().fold(0u32, |m, &e| m | (1 << (e - 1)))
    }

    pub fn value_of_mask(&self, agent: usize, mask: u32) -> Result<&Q, ValuationError> {
        let table = self
            .values
            .get(agent - 1)
            .ok_or(ValuationError::UnknownAgent(agent))?;
        table
            .get(&mask)
            .ok_or(ValuationError::UnknownItem(mask.trailing_zeros() + 1))
    }
}

impl Valuation for TabularSetFunction {
    fn n_agents(&self) -> usize {
        self.values.len()
    }

    fn n_items(&self) -> usize {
        self.n_items
    }

    fn direction(&self) -> Direction {
        self.direction
    }

    fn set_value(&self, agent: usize, items: &BTreeSet<ItemId>) -> Result<Q, ValuationError> {
        for &e in items {
            if e as usize > self.n_items {
                return Err(ValuationError::UnknownItem(e));
            }
        }
        self.value_of_mask(agent, Self::mask_of(items)).cloned()
    }

    fn classify(&self, agent: usize) -> Result<ValuationClass, ValuationError> {
        if agent == 0 || agent > self.values.len() {
            return Err(ValuationError::UnknownAgent(agent));
        }
        Ok(ValuationClass::GeneralAdditive)
    }
}

/// Concrete oracle for a whole stream.
#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Additive(AdditiveTable),
    MatroidRank(PartitionMatroidRank),
    SupermodularCost(SupermodularComplementCost),
    Tabular(TabularSetFunction),
}

impl Oracle {
    /// Builds the oracle a stream's payload rows describe.
    pub fn from_stream(stream: &Stream) -> Self {
        match stream.representation {
            Representation::Additive => {
                let mut weights = vec![Vec::with_capacity(stream.len()); stream.n];
                for item in &stream.items {
                    if let Payload::Additive(row) = &item.payload {
                        for (i, w) in row.iter().enumerate() {
                            weights[i].push(w.clone());
                        }
                    }
                }
                Oracle::Additive(AdditiveTable::new(stream.direction, weights))
            }
            Representation::Matroid => {
                let mut cats = vec![Vec::with_capacity(stream.len()); stream.n];
                for item in &stream.items {
                    if let Payload::Categories(row) = &item.payload {
                        for (i, c) in row.iter().enumerate() {
                            cats[i].push(c.clone());
                        }
                    }
                }
                if stream.direction.is_goods() {
                    Oracle::MatroidRank(PartitionMatroidRank::new(cats))
                } else {
                    Oracle::SupermodularCost(SupermodularComplementCost::new(cats))
                }
            }
        }
    }

    pub fn as_valuation(&self) -> &dyn Valuation {
        match self {
            Oracle::Additive(t) => t,
            Oracle::MatroidRank(m) => m,
            Oracle::SupermodularCost(c) => c,
            Oracle::Tabular(t) => t,
        }
    }

    pub fn direction(&self) -> Direction {
        self.as_valuation().direction()
    }

    pub fn n_agents(&self) -> usize {
        self.as_valuation().n_agents()
    }

    pub fn n_items(&self) -> usize {
        self.as_valuation().n_items()
    }

    pub fn set_value(&self, agent: usize, items: &BTreeSet<ItemId>) -> Result<Q, ValuationError> {
        self.as_valuation().set_value(agent, items)
    }

    pub fn marginal(
        &self,
        agent: usize,
        base: &BTreeSet<ItemId>,
        e: ItemId,
    ) -> Result<Q, ValuationError> {
        self.as_valuation().marginal(agent, base, e)
    }

    pub fn classify(&self, agent: usize) -> Result<ValuationClass, ValuationError> {
        self.as_valuation().classify(agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    fn ids(xs: &[u32]) -> BTreeSet<ItemId> {
        xs.iter().copied().collect()
    }

    /// Values from the worked three-agent example used across the crate.
    pub fn example_table() -> AdditiveTable {
        let rows = [
            [6, 4, 5, 9, 3],
            [5, 8, 10, 2, 5],
            [12, 6, 6, 8, 4],
        ];
        AdditiveTable::new(
            Direction::Goods,
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn additive_set_value_sums_weights() {
        let t = example_table();
        assert_eq!(t.set_value(3, &ids(&[1, 4])).unwrap(), q(20));
        assert_eq!(t.set_value(1, &BTreeSet::new()).unwrap(), q(0));
        assert!(t.set_value(1, &ids(&[9])).is_err());
    }

    #[test]
    fn additive_marginal_is_the_weight() {
        let t = example_table();
        assert_eq!(t.marginal(2, &ids(&[1, 2]), 3).unwrap(), q(10));
        assert!(t.marginal(2, &ids(&[3]), 3).is_err());
    }

    #[test]
    fn partition_rank_counts_distinct_categories() {
        let m = PartitionMatroidRank::new(vec![vec![
            Some("red".into()),
            Some("red".into()),
            Some("blue".into()),
        ]]);
        assert_eq!(m.set_value(1, &ids(&[1, 2, 3])).unwrap(), q(2));
        assert_eq!(m.marginal(1, &ids(&[1]), 2).unwrap(), q(0));
        assert_eq!(m.marginal(1, &ids(&[1]), 3).unwrap(), q(1));
    }

    #[test]
    fn loops_never_contribute() {
        let m = PartitionMatroidRank::new(vec![vec![None, Some("a".into())]]);
        assert_eq!(m.set_value(1, &ids(&[1])).unwrap(), q(0));
        assert_eq!(m.set_value(1, &ids(&[1, 2])).unwrap(), q(1));
    }

    #[test]
    fn complement_cost_duality() {
        let c = SupermodularComplementCost::new(vec![vec![
            Some("a".into()),
            Some("a".into()),
            Some("b".into()),
        ]]);
        // fresh category: |S| and rank grow together
        assert_eq!(c.marginal(1, &ids(&[1]), 3).unwrap(), q(0));
        // duplicate category: cost marginal 1
        assert_eq!(c.marginal(1, &ids(&[1]), 2).unwrap(), q(1));
        assert_eq!(c.set_value(1, &ids(&[1, 2, 3])).unwrap(), q(1));
    }

    #[test]
    fn classify_levels() {
        let t = AdditiveTable::new(Direction::Goods, vec![vec![q(0), q(1), q(1)]]);
        assert_eq!(t.classify(1).unwrap(), ValuationClass::Binary);

        let t = AdditiveTable::new(Direction::Goods, vec![vec![qr(1, 10), q(1)]]);
        assert_eq!(
            t.classify(1).unwrap(),
            ValuationClass::BiValued(qr(1, 10), q(1))
        );

        let t = AdditiveTable::new(Direction::Goods, vec![vec![qr(1, 10), q(1), q(10)]]);
        assert_eq!(
            t.classify(1).unwrap(),
            ValuationClass::TriValued(qr(1, 10), q(1), q(10))
        );

        let t = AdditiveTable::new(Direction::Goods, vec![vec![q(0), q(2)]]);
        assert_eq!(t.classify(1).unwrap(), ValuationClass::GeneralAdditive);

        let t = AdditiveTable::new(Direction::Goods, vec![vec![q(1), q(2), q(3), q(4)]]);
        assert_eq!(t.classify(1).unwrap(), ValuationClass::GeneralAdditive);
    }

    #[test]
    fn matroid_oracles_classify_by_direction() {
        let cats = vec![vec![Some("a".into())]];
        let m = PartitionMatroidRank::new(cats.clone());
        assert_eq!(m.classify(1).unwrap(), ValuationClass::SubmodularBinary);
        let c = SupermodularComplementCost::new(cats);
        assert_eq!(c.classify(1).unwrap(), ValuationClass::SupermodularBinary);
    }
}
