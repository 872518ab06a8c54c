//! Matroid-backed adversaries: two category-table case trees shipped as data
//! files, and a rule-based pursuit for the chores EF1 impossibility.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{Adversary, Constraint};
use crate::core::{Category, Decision, Direction, Payload};

// ---------------------------------------------------------------------------
// Data-file case trees
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct TreeFile {
    root: DataNode,
}

#[derive(Debug, Deserialize)]
struct DataNode {
    item: Vec<Category>,
    #[serde(default)]
    on: BTreeMap<String, DataNode>,
}

impl DataNode {
    fn child(&self, d: &Decision) -> Option<&DataNode> {
        let key = match d {
            Decision::Assign { agent } => agent.to_string(),
            Decision::Discard => "discard".to_string(),
            Decision::Hold => return None,
        };
        self.on.get(&key)
    }
}

fn walk<'a>(root: &'a DataNode, history: &[Decision]) -> Option<&'a DataNode> {
    let mut node = root;
    for d in history {
        node = node.child(d)?;
    }
    Some(node)
}

/// Goods fairness lower bound over a shared rank valuation (category tree
/// shipped in `data/submodbin_fairness.tree.json`).
pub struct SubmodbinFairness {
    root: DataNode,
}

impl SubmodbinFairness {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        let file: TreeFile =
            serde_json::from_str(include_str!("../../data/submodbin_fairness.tree.json"))
                .expect("bundled category tree parses");
        SubmodbinFairness { root: file.root }
    }
}

impl Adversary for SubmodbinFairness {
    fn agent_classes(&self) -> Vec<crate::valuations::ValuationClass> {
        vec![crate::valuations::ValuationClass::SubmodularBinary; 2]
    }
    fn name(&self) -> &'static str {
        "submodbin_fairness"
    }
    fn direction(&self) -> Direction {
        Direction::Goods
    }
    fn n_agents(&self) -> usize {
        2
    }
    fn constraint(&self) -> Constraint {
        Constraint::NonWasteful
    }

    fn next(&self, history: &[Decision]) -> Option<Payload> {
        walk(&self.root, history).map(|n| Payload::Categories(n.item.clone()))
    }
}

/// Chores share/cost lower bound over per-agent supermodular binary costs
/// (category tree shipped in `data/supermod_mms_usc.tree.json`).
pub struct SupermodMmsUsc {
    root: DataNode,
}

impl SupermodMmsUsc {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        let file: TreeFile =
            serde_json::from_str(include_str!("../../data/supermod_mms_usc.tree.json"))
                .expect("bundled category tree parses");
        SupermodMmsUsc { root: file.root }
    }
}

impl Adversary for SupermodMmsUsc {
    fn agent_classes(&self) -> Vec<crate::valuations::ValuationClass> {
        vec![crate::valuations::ValuationClass::SupermodularBinary; 2]
    }
    fn name(&self) -> &'static str {
        "supermod_mms_usc"
    }
    fn direction(&self) -> Direction {
        Direction::Chores
    }
    fn n_agents(&self) -> usize {
        2
    }
    fn constraint(&self) -> Constraint {
        Constraint::Complete
    }

    fn next(&self, history: &[Decision]) -> Option<Payload> {
        walk(&self.root, history).map(|n| Payload::Categories(n.item.clone()))
    }
}

// ---------------------------------------------------------------------------
// Rule-based pursuit: chores EF1 over supermodular binary costs
// ---------------------------------------------------------------------------

/// Per-side pursuit state against one agent: the multiset of her own-view
/// labels in her bundle and in the opponent's bundle.
#[derive(Default, Clone)]
struct SideState {
    /// label -> copies in the targeted agent's own bundle (her view)
    own: BTreeMap<u32, u32>,
    /// label -> copies in the other bundle (still her view)
    leaked: BTreeMap<u32, u32>,
    next_fresh: u32,
}

impl SideState {
    fn cost(counts: &BTreeMap<u32, u32>) -> u32 {
        let total: u32 = counts.values().sum();
        let distinct = counts.values().filter(|&&c| c > 0).count() as u32;
        total - distinct
    }

    /// Minimum own-view cost after removing one item; `None` when empty.
    fn min_removal_cost(&self) -> Option<u32> {
        let total: u32 = self.own.values().sum();
        if total == 0 {
            return None;
        }
        let mut best = u32::MAX;
        for (&label, &c) in &self.own {
            if c == 0 {
                continue;
            }
            let mut after = self.own.clone();
            after.insert(label, c - 1);
            best = best.min(Self::cost(&after));
        }
        Some(best)
    }

    /// Robust: every single removal still leaves positive own cost.
    fn robust(&self) -> bool {
        matches!(self.min_removal_cost(), Some(c) if c >= 1)
    }

    /// The opponent's bundle costs the targeted agent nothing.
    fn leak_rainbow(&self) -> bool {
        Self::cost(&self.leaked) == 0
    }

    fn candidates(&self) -> Vec<u32> {
        // singles first, then triple-threat labels; all unleaked
        let mut out = Vec::new();
        for (&label, &c) in &self.own {
            if c == 1 && self.leaked.get(&label).copied().unwrap_or(0) == 0 {
                out.push(label);
            }
        }
        for (&label, &c) in &self.own {
            if c == 2 && self.leaked.get(&label).copied().unwrap_or(0) == 0 {
                out.push(label);
            }
        }
        out
    }

    /// A label whose uptake makes the target's bundle robust.
    fn lethal(&self) -> Option<u32> {
        self.candidates().into_iter().find(|&label| {
            let mut sim = self.clone();
            *sim.own.entry(label).or_insert(0) += 1;
            sim.robust()
        })
    }

    /// Would a lethal label survive after burning (leaking) this one?
    fn lethal_besides(&self, burned: u32) -> bool {
        self.candidates()
            .into_iter()
            .filter(|&l| l != burned)
            .any(|label| {
                let mut sim = self.clone();
                *sim.own.entry(label).or_insert(0) += 1;
                sim.robust()
            })
    }

    fn has_pair(&self) -> bool {
        self.own.values().any(|&c| c >= 2)
    }

    fn first_single(&self) -> Option<u32> {
        self.own
            .iter()
            .find(|(l, &c)| c == 1 && self.leaked.get(l).copied().unwrap_or(0) == 0)
            .map(|(&l, _)| l)
    }

    fn singles_count(&self) -> usize {
        self.own
            .iter()
            .filter(|(l, &c)| c == 1 && self.leaked.get(l).copied().unwrap_or(0) == 0)
            .count()
    }

    fn fresh(&mut self) -> u32 {
        let l = self.next_fresh;
        self.next_fresh += 1;
        l
    }
}

/// Adaptive chores source over two independent partition matroids whose
/// complement costs corner every complete deterministic algorithm into an
/// end state with an envied zero-cost bundle: one agent's bundle keeps a
/// duplicate through any single removal while the opposite bundle stays
/// rainbow in her view. Labels are never re-used across bundles, which pins
/// the opposing view at zero cost for good.
///
/// The emission rule: pressure both agents with pair-completing labels; once
/// a completion would be lethal on both sides, emit that double-threat item.
/// When only one side is lethal, either keep a spare threat and feed the
/// other side, or bank fresh labels until both sides are armed. Exhaustive
/// search over all algorithm responses confirms every path terminates with
/// an infinite EF1 ratio.
pub struct SupermodEf1;

impl SupermodEf1 {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        SupermodEf1
    }

    /// Replays the emission rule over a decision history. Returns the pair
    /// of side states plus the label streams already emitted.
    fn replay(&self, history: &[Decision]) -> (SideState, SideState, Option<(u32, u32)>) {
        // side1 targets agent 1 via the items' first labels; side2 targets
        // agent 2 via the second labels.
        let mut side1 = SideState::default();
        let mut side2 = SideState::default();
        for d in history {
            let emit = Self::emission(&mut side1, &mut side2);
            let Some((u, w)) = emit else {
                return (side1, side2, None);
            };
            match d {
                Decision::Assign { agent: 1 } => {
                    *side1.own.entry(u).or_insert(0) += 1;
                    *side2.leaked.entry(w).or_insert(0) += 1;
                }
                Decision::Assign { agent: 2 } => {
                    *side1.leaked.entry(u).or_insert(0) += 1;
                    *side2.own.entry(w).or_insert(0) += 1;
                }
                _ => return (side1, side2, None),
            }
        }
        let next = Self::emission(&mut side1, &mut side2);
        (side1, side2, next)
    }

    fn terminal(side1: &SideState, side2: &SideState) -> bool {
        (side1.robust() && side1.leak_rainbow()) || (side2.robust() && side2.leak_rainbow())
    }

    fn emission(side1: &mut SideState, side2: &mut SideState) -> Option<(u32, u32)> {
        if Self::terminal(side1, side2) {
            return None;
        }
        let lethal1 = side1.lethal();
        let lethal2 = side2.lethal();
        match (lethal1, lethal2) {
            (Some(u), Some(w)) => Some((u, w)),
            (Some(u), None) => {
                if side1.lethal_besides(u) {
                    let w = side2.fresh();
                    Some((u, w))
                } else if !side2.has_pair() {
                    if let Some(w) = side2.first_single() {
                        Some((u, w))
                    } else {
                        Some((side1.fresh(), side2.fresh()))
                    }
                } else {
                    Some((side1.fresh(), side2.fresh()))
                }
            }
            (None, Some(w)) => {
                if side2.lethal_besides(w) {
                    let u = side1.fresh();
                    Some((u, w))
                } else if !side1.has_pair() {
                    if let Some(u) = side1.first_single() {
                        Some((u, w))
                    } else {
                        Some((side1.fresh(), side2.fresh()))
                    }
                } else {
                    Some((side1.fresh(), side2.fresh()))
                }
            }
            (None, None) => {
                // Bootstrap toward the first pairs. A lone single paired
                // with a fresh label is dodgeable forever (route it away and
                // absorb the fresh half), so singles are only spent when the
                // taker cannot avoid completing a pair: either both halves
                // are completers, or a spare single survives the dodge.
                let (s1, s2) = (side1.singles_count(), side2.singles_count());
                if s1 >= 1 && s2 >= 1 {
                    Some((
                        side1.first_single().unwrap(),
                        side2.first_single().unwrap(),
                    ))
                } else if s1 >= 2 {
                    let u = side1.first_single().unwrap();
                    let w = side2.fresh();
                    Some((u, w))
                } else if s2 >= 2 {
                    let u = side1.fresh();
                    let w = side2.first_single().unwrap();
                    Some((u, w))
                } else {
                    Some((side1.fresh(), side2.fresh()))
                }
            }
        }
    }
}

impl Adversary for SupermodEf1 {
    fn agent_classes(&self) -> Vec<crate::valuations::ValuationClass> {
        vec![crate::valuations::ValuationClass::SupermodularBinary; 2]
    }
    fn name(&self) -> &'static str {
        "supermod_ef1"
    }
    fn direction(&self) -> Direction {
        Direction::Chores
    }
    fn n_agents(&self) -> usize {
        2
    }
    fn constraint(&self) -> Constraint {
        Constraint::Complete
    }

    fn next(&self, history: &[Decision]) -> Option<Payload> {
        if history.len() >= 24 {
            // safety rail; the pursuit is verified to corner every
            // algorithm well before this depth
            return None;
        }
        let (_, _, emit) = self.replay(history);
        emit.map(|(u, w)| {
            Payload::Categories(vec![Some(format!("u{u}")), Some(format!("x{w}"))])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{solve_game, GameQuery, Metric};
    use crate::rational::Ratio;

    #[test]
    fn fairness_tree_emits_fresh_then_duplicate_categories() {
        let adv = SubmodbinFairness::new();
        let h = [Decision::assign(1), Decision::assign(2), Decision::assign(2)];
        let Some(Payload::Categories(cats)) = adv.next(&h) else {
            panic!("expected the forcing item")
        };
        // starved side held e1 (category c1): the closer duplicates it
        assert_eq!(cats, vec![Some("c1".into()), Some("c1".into())]);
    }

    #[test]
    fn pursuit_paths_all_terminate_infinitely() {
        let adv = SupermodEf1::new();
        let value = solve_game(&adv, &GameQuery::new(Metric::Ef1)).unwrap();
        assert_eq!(value.value, Some(Ratio::Infinite));
        // and well inside the safety rail
        assert!(value.witness.len() < 20);
    }
}
