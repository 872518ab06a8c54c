//! Scripted case trees for the additive impossibility constructions, plus
//! the two fixed non-additive instances that are not figure-backed.
//!
//! Each `next` replays the decision history against its case analysis:
//! on-script branches continue with the construction's next row, punished
//! deviations stop the stream immediately.

use std::collections::BTreeMap;

use num_traits::One;

use super::{Adversary, Constraint};
use crate::core::{Decision, Direction, Payload};
use crate::rational::{q, Q};
use crate::valuations::{Oracle, TabularSetFunction, ValuationClass};

fn taker(d: &Decision) -> Option<usize> {
    match d {
        Decision::Assign { agent } => Some(*agent),
        _ => None,
    }
}

fn row(values: Vec<Q>) -> Option<Payload> {
    Some(Payload::Additive(values))
}

/// Row with `value_p` at position `p` (1-based) and `value_rest` elsewhere.
fn row_at(n: usize, p: usize, value_p: Q, value_rest: Q) -> Option<Payload> {
    let mut r = vec![value_rest; n];
    r[p - 1] = value_p;
    row(r)
}

// ---------------------------------------------------------------------------
// Goods: tri-valued levels {eps, 1, 1/eps}
// ---------------------------------------------------------------------------

/// Two agents, tri-valued goods. A unit item seeds one bundle, a lopsided
/// item forces the other agent, and a pair of huge items leaves every
/// continuation with an epsilon-scale ratio.
pub struct TrivaluedGoodsTwo {
    eps: Q,
}

impl TrivaluedGoodsTwo {
    pub fn new(eps: Q) -> Self {
        TrivaluedGoodsTwo { eps }
    }
}

impl Adversary for TrivaluedGoodsTwo {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        let inv = Q::one() / &self.eps;
        vec![ValuationClass::TriValued(self.eps.clone(), q(1), inv.clone()); 2]
    }
    fn name(&self) -> &'static str {
        "trivalued_goods_2"
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
        let inv = Q::one() / &self.eps;
        match history {
            [] => row(vec![q(1), q(1)]),
            [d1] => {
                let p = taker(d1)?;
                row_at(2, p, inv, self.eps.clone())
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                row(vec![inv.clone(), inv])
            }
            _ => None,
        }
    }
}

/// Three-agent generalization of the tri-valued goods construction.
pub struct TrivaluedGoodsN {
    eps: Q,
}

impl TrivaluedGoodsN {
    pub fn new(eps: Q) -> Self {
        TrivaluedGoodsN { eps }
    }
}

impl Adversary for TrivaluedGoodsN {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        let inv = Q::one() / &self.eps;
        vec![ValuationClass::TriValued(self.eps.clone(), q(1), inv.clone()); 3]
    }
    fn name(&self) -> &'static str {
        "trivalued_goods_n"
    }
    fn direction(&self) -> Direction {
        Direction::Goods
    }
    fn n_agents(&self) -> usize {
        3
    }
    fn constraint(&self) -> Constraint {
        Constraint::NonWasteful
    }

    fn next(&self, history: &[Decision]) -> Option<Payload> {
        let inv = Q::one() / &self.eps;
        match history {
            [] => row(vec![inv.clone(), inv.clone(), inv]),
            [d1] => {
                taker(d1)?;
                row(vec![q(1), q(1), q(1)])
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    // hoarding leaves two bundles empty; one more item makes
                    // every share positive before the stream ends, so the
                    // starved ratios really are zero
                    return row(vec![inv.clone(), inv.clone(), inv]);
                }
                // the unit-taker now plays the next-to-last role: her view of
                // the coming item is huge, everyone else's is tiny
                row_at(3, s, inv, self.eps.clone())
            }
            [d1, d2, d3] => {
                let (p, s, t) = (taker(d1)?, taker(d2)?, taker(d3)?);
                if s == p || t == p || t == s {
                    return None;
                }
                row(vec![inv.clone(), inv.clone(), inv])
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Goods: bi-valued levels {eps, 1}
// ---------------------------------------------------------------------------

/// Two agents, bi-valued goods. The case split at the third item drives the
/// EF1 optimum to exactly one half and the share optimum to one third.
pub struct BivaluedGoods {
    eps: Q,
}

impl BivaluedGoods {
    pub fn new(eps: Q) -> Self {
        BivaluedGoods { eps }
    }
}

impl Adversary for BivaluedGoods {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![ValuationClass::BiValued(self.eps.clone(), q(1)); 2]
    }
    fn name(&self) -> &'static str {
        "bivalued_goods"
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
        let e = self.eps.clone();
        match history {
            [] => row(vec![e.clone(), e]),
            [d1] => {
                let p = taker(d1)?;
                row_at(2, p, q(1), e)
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                row(vec![e.clone(), e])
            }
            [d1, _, d3] => {
                let p = taker(d1)?;
                let t = taker(d3)?;
                if t == p {
                    // third item joined the seeded bundle: finish with a
                    // unit pair item
                    row(vec![q(1), q(1)])
                } else {
                    // it joined the other side: a unit item she values high
                    row_at(2, p, e, q(1))
                }
            }
            [d1, _, d3, d4] => {
                let (p, t, f) = (taker(d1)?, taker(d3)?, taker(d4)?);
                if t == p {
                    return None; // pair item already ended the split
                }
                if f == p {
                    row(vec![q(1), q(1)])
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Fairness/USW incompatibility for two bi-valued agents: agent 1's levels
/// are {1, 1/eps}, agent 2's {eps^2, eps}.
pub struct BivaluedGoodsUsw {
    eps: Q,
}

impl BivaluedGoodsUsw {
    pub fn new(eps: Q) -> Self {
        BivaluedGoodsUsw { eps }
    }
}

impl Adversary for BivaluedGoodsUsw {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![
            ValuationClass::BiValued(q(1), Q::one() / &self.eps),
            ValuationClass::BiValued(&self.eps * &self.eps, self.eps.clone()),
        ]
    }
    fn name(&self) -> &'static str {
        "bivalued_goods_usw"
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
        let e = &self.eps;
        match history {
            [] => row(vec![q(1), e.clone()]),
            [Decision::Assign { agent: 1 }] => row(vec![Q::one() / e, e * e]),
            _ => None,
        }
    }
}

/// Fairness/USW incompatibility for one binary and one bi-valued agent.
pub struct BinbiGoodsUsw {
    eps: Q,
}

impl BinbiGoodsUsw {
    pub fn new(eps: Q) -> Self {
        BinbiGoodsUsw { eps }
    }
}

impl Adversary for BinbiGoodsUsw {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![
            ValuationClass::Binary,
            ValuationClass::BiValued(&self.eps * &self.eps, self.eps.clone()),
        ]
    }
    fn name(&self) -> &'static str {
        "binbi_goods_usw"
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
        let e = &self.eps;
        match history {
            [] => row(vec![q(1), e.clone()]),
            [Decision::Assign { agent: 1 }] => row(vec![q(1), e * e]),
            [Decision::Assign { agent: 1 }, Decision::Assign { agent: 2 }] => {
                row(vec![q(1), e.clone()])
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Chores: tri-valued costs {eps, 1, 1/eps}
// ---------------------------------------------------------------------------

pub struct TrivaluedChoresTwo {
    eps: Q,
}

impl TrivaluedChoresTwo {
    pub fn new(eps: Q) -> Self {
        TrivaluedChoresTwo { eps }
    }
}

impl Adversary for TrivaluedChoresTwo {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        let inv = Q::one() / &self.eps;
        vec![ValuationClass::TriValued(self.eps.clone(), q(1), inv.clone()); 2]
    }
    fn name(&self) -> &'static str {
        "trivalued_chores_2"
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
        let inv = Q::one() / &self.eps;
        match history {
            [] => row(vec![q(1), q(1)]),
            [d1] => {
                let p = taker(d1)?;
                // cheap for the seeded agent, ruinous for the other
                row_at(2, p, self.eps.clone(), inv)
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                row(vec![inv.clone(), inv])
            }
            _ => None,
        }
    }
}

pub struct TrivaluedChoresN {
    eps: Q,
}

impl TrivaluedChoresN {
    pub fn new(eps: Q) -> Self {
        TrivaluedChoresN { eps }
    }
}

impl Adversary for TrivaluedChoresN {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        let inv = Q::one() / &self.eps;
        vec![ValuationClass::TriValued(self.eps.clone(), q(1), inv.clone()); 3]
    }
    fn name(&self) -> &'static str {
        "trivalued_chores_n"
    }
    fn direction(&self) -> Direction {
        Direction::Chores
    }
    fn n_agents(&self) -> usize {
        3
    }
    fn constraint(&self) -> Constraint {
        Constraint::Complete
    }

    fn next(&self, history: &[Decision]) -> Option<Payload> {
        let inv = Q::one() / &self.eps;
        match history {
            [] => row(vec![inv.clone(), inv.clone(), inv]),
            [d1] => {
                taker(d1)?;
                row(vec![q(1), q(1), q(1)])
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                // the still-empty agent faces a ruinous cost; everyone else
                // finds it cheap, so completeness pins it on her anyway
                let last = (1..=3).find(|x| *x != p && *x != s).unwrap();
                row_at(3, last, inv, self.eps.clone())
            }
            [d1, d2, d3] => {
                let (p, s, t) = (taker(d1)?, taker(d2)?, taker(d3)?);
                let last = (1..=3).find(|x| *x != p && *x != s).unwrap();
                if s == p || t != last {
                    return None;
                }
                row(vec![inv.clone(), inv.clone(), inv])
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Chores: bi-valued costs
// ---------------------------------------------------------------------------

/// EF1 lower-bound tree with cost levels {1, 1/eps}.
pub struct BivaluedChores {
    eps: Q,
}

impl BivaluedChores {
    pub fn new(eps: Q) -> Self {
        BivaluedChores { eps }
    }
}

impl Adversary for BivaluedChores {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![ValuationClass::BiValued(q(1), Q::one() / &self.eps); 2]
    }
    fn name(&self) -> &'static str {
        "bivalued_chores"
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
        let inv = Q::one() / &self.eps;
        match history {
            [] => row(vec![q(1), q(1)]),
            [d1] => {
                let p = taker(d1)?;
                row_at(2, p, q(1), inv.clone())
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                row(vec![inv.clone(), inv])
            }
            [d1, _, d3] => {
                let (p, t) = (taker(d1)?, taker(d3)?);
                if t != p {
                    return None; // dumped on the loaded agent: terminal
                }
                row_at(2, p, q(1), inv.clone())
            }
            [d1, _, d3, d4] => {
                let (p, t, f) = (taker(d1)?, taker(d3)?, taker(d4)?);
                if t != p || f == p {
                    return None;
                }
                row(vec![inv.clone(), inv])
            }
            _ => None,
        }
    }
}

/// Share lower-bound instance with cost levels {1, 2}.
pub struct BivaluedChoresMms;

impl BivaluedChoresMms {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        BivaluedChoresMms
    }
}

impl Adversary for BivaluedChoresMms {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![ValuationClass::BiValued(q(1), q(2)); 2]
    }
    fn name(&self) -> &'static str {
        "bivalued_chores_mms"
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
        match history {
            [] => row(vec![q(1), q(1)]),
            [d1] => {
                taker(d1)?;
                row(vec![q(1), q(1)])
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                row(vec![q(2), q(2)])
            }
            _ => None,
        }
    }
}

/// Fairness/USC incompatibility: agent 1 bi-valued {1, 2}, agent 2
/// {1/eps, 1/eps^2}.
pub struct BivaluedChoresUsc {
    eps: Q,
}

impl BivaluedChoresUsc {
    pub fn new(eps: Q) -> Self {
        BivaluedChoresUsc { eps }
    }
}

impl Adversary for BivaluedChoresUsc {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        let inv = Q::one() / &self.eps;
        vec![
            ValuationClass::BiValued(q(1), q(2)),
            ValuationClass::BiValued(inv.clone(), &inv * &inv),
        ]
    }
    fn name(&self) -> &'static str {
        "bivalued_chores_usc"
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
        let inv = Q::one() / &self.eps;
        match history {
            [] => row(vec![q(1), inv]),
            [Decision::Assign { agent: 1 }] => row(vec![q(1), &inv * &inv]),
            _ => None,
        }
    }
}

/// Fairness/USC incompatibility with one binary agent.
pub struct BinbiChoresUsc {
    eps: Q,
}

impl BinbiChoresUsc {
    pub fn new(eps: Q) -> Self {
        BinbiChoresUsc { eps }
    }
}

impl Adversary for BinbiChoresUsc {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        let inv = Q::one() / &self.eps;
        vec![
            ValuationClass::Binary,
            ValuationClass::BiValued(inv.clone(), &inv * &inv),
        ]
    }
    fn name(&self) -> &'static str {
        "binbi_chores_usc"
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
        // same tree as the bi-valued variant; agent 1's costs stay binary
        BivaluedChoresUsc {
            eps: self.eps.clone(),
        }
        .next(history)
    }
}

// ---------------------------------------------------------------------------
// Identical preferences (goods and chores)
// ---------------------------------------------------------------------------

pub struct IdenticalPrefGoods {
    eps: Q,
}

impl IdenticalPrefGoods {
    pub fn new(eps: Q) -> Self {
        IdenticalPrefGoods { eps }
    }
}

impl Adversary for IdenticalPrefGoods {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![ValuationClass::BiValued(self.eps.clone(), q(1)); 2]
    }
    fn name(&self) -> &'static str {
        "identical_pref_goods"
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
        let e = self.eps.clone();
        match history {
            [] => row(vec![q(1), q(1)]),
            [d1] => {
                let p = taker(d1)?;
                row_at(2, p, q(1), e)
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                row(vec![e.clone(), e])
            }
            [d1, _, d3] => {
                let (p, t) = (taker(d1)?, taker(d3)?);
                if t == p {
                    row_at(2, p, q(1), e)
                } else {
                    row(vec![q(1), q(1)])
                }
            }
            [d1, _, d3, d4] => {
                let (p, t, f) = (taker(d1)?, taker(d3)?, taker(d4)?);
                if t != p {
                    return None;
                }
                if f == p {
                    None
                } else {
                    row(vec![q(1), q(1)])
                }
            }
            _ => None,
        }
    }
}

pub struct IdenticalPrefChores {
    eps: Q,
}

impl IdenticalPrefChores {
    pub fn new(eps: Q) -> Self {
        IdenticalPrefChores { eps }
    }
}

impl Adversary for IdenticalPrefChores {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![ValuationClass::BiValued(q(1), Q::one() / &self.eps); 2]
    }
    fn name(&self) -> &'static str {
        "identical_pref_chores"
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
        let inv = Q::one() / &self.eps;
        match history {
            [] => row(vec![q(1), q(1)]),
            [d1] => {
                let p = taker(d1)?;
                row_at(2, p, q(1), inv.clone())
            }
            [d1, d2] => {
                let (p, s) = (taker(d1)?, taker(d2)?);
                if s == p {
                    return None;
                }
                row(vec![inv.clone(), inv])
            }
            [d1, _, d3] => {
                let (p, t) = (taker(d1)?, taker(d3)?);
                if t != p {
                    return None;
                }
                row_at(2, p, q(1), inv.clone())
            }
            [d1, _, d3, d4] => {
                let (p, t, f) = (taker(d1)?, taker(d3)?, taker(d4)?);
                if t != p || f == p {
                    return None;
                }
                row(vec![inv.clone(), inv])
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Non-additive fixed instances
// ---------------------------------------------------------------------------

/// USW lower bound for rank-function valuations: the second item duplicates
/// the taken item's category in its holder's matroid and is a loop for the
/// other agent, so non-wastefulness forces half the welfare away.
pub struct SubmodbinUsw;

impl SubmodbinUsw {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        SubmodbinUsw
    }
}

impl Adversary for SubmodbinUsw {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![ValuationClass::SubmodularBinary; 2]
    }
    fn name(&self) -> &'static str {
        "submodbin_usw"
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
        match history {
            [] => Some(Payload::Categories(vec![
                Some("c1".into()),
                Some("d1".into()),
            ])),
            [d1] => {
                let p = taker(d1)?;
                Some(if p == 1 {
                    Payload::Categories(vec![Some("c1".into()), None])
                } else {
                    Payload::Categories(vec![None, Some("d1".into())])
                })
            }
            _ => None,
        }
    }
}

/// The fixed four-item monotone submodular (non-binary) instance on which no
/// decision path stays non-wasteful. Both agents share the same set function,
/// given by an explicit subset table.
pub struct Claim2Submodular;

impl Claim2Submodular {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        Claim2Submodular
    }

    /// Set values for the four-item ground set, identical for both agents.
    pub fn table() -> BTreeMap<u32, Q> {
        let mut map = BTreeMap::new();
        let value = |mask: u32| -> i64 {
            match mask.count_ones() {
                0 => 0,
                1 => match mask {
                    0b0001 | 0b0010 => 3,
                    0b0100 => 5,
                    _ => 6,
                },
                _ => {
                    if mask & 0b1000 != 0 {
                        6
                    } else {
                        5
                    }
                }
            }
        };
        for mask in 0u32..16 {
            map.insert(mask, q(value(mask)));
        }
        map
    }
}

impl Adversary for Claim2Submodular {
    fn agent_classes(&self) -> Vec<ValuationClass> {
        vec![ValuationClass::GeneralAdditive; 2]
    }
    fn name(&self) -> &'static str {
        "claim2_submodular"
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
        // Revealed rows carry the items' standalone values; the solver
        // evaluates sets through the subset table below. The fourth item
        // appears only on the seed-pair-together, third-item-across branch;
        // stopping anywhere else leaves the end state wasteful.
        match history {
            [] | [_] => row(vec![q(3), q(3)]),
            [_, _] => row(vec![q(5), q(5)]),
            [d1, d2, d3] => {
                let (p, s, t) = (taker(d1)?, taker(d2)?, taker(d3)?);
                if p == s && t != p {
                    row(vec![q(6), q(6)])
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn oracle(&self, emitted: &[Payload]) -> Oracle {
        let k = emitted.len();
        let full = Self::table();
        let mut restricted = BTreeMap::new();
        for mask in 0u32..(1 << k) {
            restricted.insert(mask, full[&mask].clone());
        }
        Oracle::Tabular(TabularSetFunction::new(
            Direction::Goods,
            k,
            vec![restricted.clone(), restricted],
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    #[test]
    fn trivalued_goods_reacts_to_first_taker() {
        let adv = TrivaluedGoodsTwo::new(qr(1, 10));
        let h = [Decision::assign(1)];
        let Some(Payload::Additive(r)) = adv.next(&h) else {
            panic!("expected an item")
        };
        assert_eq!(r, vec![q(10), qr(1, 10)]);
        // mirrored seeding mirrors the row
        let h = [Decision::assign(2)];
        let Some(Payload::Additive(r)) = adv.next(&h) else {
            panic!("expected an item")
        };
        assert_eq!(r, vec![qr(1, 10), q(10)]);
    }

    #[test]
    fn trivalued_goods_stops_on_greedy_deviation() {
        let adv = TrivaluedGoodsTwo::new(qr(1, 10));
        assert_eq!(adv.next(&[Decision::assign(1), Decision::assign(1)]), None);
    }

    #[test]
    fn bivalued_goods_case_one_finishes_with_a_unit_pair() {
        let adv = BivaluedGoods::new(qr(1, 10));
        let h = [Decision::assign(1), Decision::assign(2), Decision::assign(1)];
        let Some(Payload::Additive(r)) = adv.next(&h) else {
            panic!("expected the case-1 closer")
        };
        assert_eq!(r, vec![q(1), q(1)]);
        let h4 = [
            Decision::assign(1),
            Decision::assign(2),
            Decision::assign(1),
            Decision::assign(2),
        ];
        assert_eq!(adv.next(&h4), None);
    }

    #[test]
    fn identical_pref_chores_case_two_runs_five_items() {
        let adv = IdenticalPrefChores::new(qr(1, 10));
        let mut h = vec![Decision::assign(1), Decision::assign(2)];
        assert!(adv.next(&h).is_some()); // e3
        h.push(Decision::assign(1));
        assert!(adv.next(&h).is_some()); // e4
        h.push(Decision::assign(2));
        assert!(adv.next(&h).is_some()); // e5
        h.push(Decision::assign(1));
        assert_eq!(adv.next(&h), None);
    }

    #[test]
    fn claim2_table_is_monotone_and_submodular() {
        let t = Claim2Submodular::table();
        for x in 0u32..16 {
            for y in 0u32..16 {
                if x & y == x {
                    assert!(t[&x] <= t[&y], "monotonicity fails at {x:#b} <= {y:#b}");
                }
                let lhs = &t[&x] + &t[&y];
                let rhs = &t[&(x | y)] + &t[&(x & y)];
                assert!(lhs >= rhs, "submodularity fails at {x:#b}, {y:#b}");
            }
        }
    }

    #[test]
    fn claim2_emits_four_items_only_when_seed_pair_shares_a_bundle() {
        let adv = Claim2Submodular::new();
        let same = [Decision::assign(2), Decision::assign(2), Decision::assign(1)];
        assert!(adv.next(&same).is_some());
        let split = [Decision::assign(1), Decision::assign(2), Decision::assign(2)];
        assert_eq!(adv.next(&split), None);
    }
}
