//! Exact per-round fairness and efficiency metrics.
//!
//! Everything here is exact. Ratios are rationals (or infinite), and the
//! share/optimum computations are genuine optima: closed forms where a class
//! admits one (binary counts; two positive levels via part-count enumeration
//! plus water-filling), full enumeration over `n^k` assignments otherwise,
//! guarded by a configurable budget.
//!
//! Conventions for zero denominators are fixed once here: a goods pair with
//! an empty post-removal bundle is satisfied; a chores pair with zero
//! opponent cost is satisfied at 0/0 and infinitely violated otherwise.
//! Goods ratios are capped at 1, chores ratios floored at 1; the raw values
//! are kept alongside for diagnostics.

use std::cell::Cell;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Allocation, Direction, ItemId};
use crate::rational::{Q, Ratio};
use crate::valuations::{Oracle, Valuation, ValuationError};

/// Cap on the number of assignments a single exact-share or exact-optimum
/// call may enumerate. Default is 3^13; `FAIRSTREAM_BUDGET` overrides it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

pub const DEFAULT_BUDGET: u64 = 1_594_323; // 3^13

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    pub fn from_env() -> Self {
        match std::env::var("FAIRSTREAM_BUDGET") {
            Ok(s) => s.parse().map(Budget).unwrap_or_default(),
            Err(_) => Budget::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AuditError {
    #[error("enumeration of {need} assignments exceeds budget {budget}")]
    BudgetExceeded { need: u128, budget: u64 },
    #[error("audit fast path supports at most 31 items, stream has {0}")]
    TooManyItems(usize),
    #[error("agent has more than 64 categories")]
    TooManyCategories,
    #[error("value does not fit in 128-bit scaled integers")]
    Overflow,
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("allocation round {0} exceeds oracle's {1} items")]
    RoundOutOfRange(u32, usize),
}

// ---------------------------------------------------------------------------
// Scaled integer evaluation
// ---------------------------------------------------------------------------

/// Per-agent evaluator over item bitmasks. All rational inputs are brought to
/// one common denominator so set values become 128-bit integers.
enum AgentEval {
    Additive(Vec<i128>),
    /// One bit per category; rank of a set = popcount of the OR.
    Rank(Vec<u64>),
    /// Supermodular complement: `|S| - rank(S)`.
    CoCost(Vec<u64>),
    Table(std::collections::BTreeMap<u32, i128>),
}

struct Scaled {
    scale: BigInt,
    agents: Vec<AgentEval>,
    n_items: usize,
}

fn catbits(cats: &[crate::core::Category]) -> Result<Vec<u64>, AuditError> {
    let mut index: std::collections::BTreeMap<&str, u32> = Default::default();
    let mut bits = Vec::with_capacity(cats.len());
    for c in cats {
        match c {
            None => bits.push(0u64),
            Some(name) => {
                let next = index.len() as u32;
                let slot = *index.entry(name.as_str()).or_insert(next);
                if slot >= 64 {
                    return Err(AuditError::TooManyCategories);
                }
                bits.push(1u64 << slot);
            }
        }
    }
    Ok(bits)
}

fn common_scale<'a>(values: impl Iterator<Item = &'a Q>) -> BigInt {
    let mut lcm = BigInt::one();
    for v in values {
        lcm = lcm.lcm(v.denom());
    }
    lcm
}

fn scaled_int(v: &Q, scale: &BigInt) -> Result<i128, AuditError> {
    let big = v.numer() * (scale / v.denom());
    big.to_i128().ok_or(AuditError::Overflow)
}

impl Scaled {
    fn build(oracle: &Oracle) -> Result<Scaled, AuditError> {
        let n_items = oracle.n_items();
        if n_items > 31 {
            return Err(AuditError::TooManyItems(n_items));
        }
        match oracle {
            Oracle::Additive(t) => {
                let n = t.n_agents();
                let scale = common_scale((1..=n).flat_map(|i| t.weights_of(i).iter()));
                let mut agents = Vec::with_capacity(n);
                for i in 1..=n {
                    let row = t
                        .weights_of(i)
                        .iter()
                        .map(|w| scaled_int(w, &scale))
                        .collect::<Result<Vec<_>, _>>()?;
                    agents.push(AgentEval::Additive(row));
                }
                Ok(Scaled {
                    scale,
                    agents,
                    n_items,
                })
            }
            Oracle::MatroidRank(m) => {
                let n = m.n_agents();
                let mut agents = Vec::with_capacity(n);
                for i in 1..=n {
                    agents.push(AgentEval::Rank(catbits(m.categories_of(i))?));
                }
                Ok(Scaled {
                    scale: BigInt::one(),
                    agents,
                    n_items,
                })
            }
            Oracle::SupermodularCost(c) => {
                let m = c.rank_part();
                let n = m.n_agents();
                let mut agents = Vec::with_capacity(n);
                for i in 1..=n {
                    agents.push(AgentEval::CoCost(catbits(m.categories_of(i))?));
                }
                Ok(Scaled {
                    scale: BigInt::one(),
                    agents,
                    n_items,
                })
            }
            Oracle::Tabular(t) => {
                let n = t.n_agents();
                let all: Vec<Vec<(u32, Q)>> = (1..=n)
                    .map(|i| {
                        (0u32..(1 << n_items))
                            .map(|mask| (mask, t.value_of_mask(i, mask).cloned()))
                            .map(|(mask, r)| r.map(|v| (mask, v)))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let scale = common_scale(all.iter().flatten().map(|(_, v)| v));
                let mut agents = Vec::with_capacity(n);
                for rows in &all {
                    let mut map = std::collections::BTreeMap::new();
                    for (mask, v) in rows {
                        map.insert(*mask, scaled_int(v, &scale)?);
                    }
                    agents.push(AgentEval::Table(map));
                }
                Ok(Scaled {
                    scale,
                    agents,
                    n_items,
                })
            }
        }
    }

    fn n_agents(&self) -> usize {
        self.agents.len()
    }

    fn value_mask(&self, agent: usize, mask: u32) -> i128 {
        match &self.agents[agent - 1] {
            AgentEval::Additive(w) => {
                let mut total = 0i128;
                let mut m = mask;
                while m != 0 {
                    let idx = m.trailing_zeros() as usize;
                    total += w[idx];
                    m &= m - 1;
                }
                total
            }
            AgentEval::Rank(bits) => {
                let mut or = 0u64;
                let mut m = mask;
                while m != 0 {
                    or |= bits[m.trailing_zeros() as usize];
                    m &= m - 1;
                }
                or.count_ones() as i128
            }
            AgentEval::CoCost(bits) => {
                let mut or = 0u64;
                let mut m = mask;
                while m != 0 {
                    or |= bits[m.trailing_zeros() as usize];
                    m &= m - 1;
                }
                mask.count_ones() as i128 - or.count_ones() as i128
            }
            AgentEval::Table(map) => map[&mask],
        }
    }

    /// Rational value of a scaled integer (used when agents' values mix,
    /// e.g. welfare sums).
    fn unscale(&self, x: i128) -> Q {
        Q::new(BigInt::from(x), self.scale.clone())
    }
}

fn mask_of(items: &BTreeSet<ItemId>) -> u32 {
    items.iter().fold(0u32, |m, &e| m | (1 << (e - 1)))
}

fn prefix_mask(k: u32) -> u32 {
    if k == 0 {
        0
    } else {
        (1u32 << k) - 1
    }
}

// ---------------------------------------------------------------------------
// Audit context
// ---------------------------------------------------------------------------

/// Prebuilt evaluation state for one oracle, reused across rounds.
pub struct AuditContext<'a> {
    oracle: &'a Oracle,
    scaled: Scaled,
    budget: Budget,
    enumerated: Cell<u64>,
}

impl<'a> AuditContext<'a> {
    pub fn new(oracle: &'a Oracle, budget: Budget) -> Result<Self, AuditError> {
        Ok(AuditContext {
            oracle,
            scaled: Scaled::build(oracle)?,
            budget,
            enumerated: Cell::new(0),
        })
    }

    pub fn direction(&self) -> Direction {
        self.oracle.direction()
    }

    pub fn n_agents(&self) -> usize {
        self.scaled.n_agents()
    }

    /// Total assignments enumerated so far (shares and optima).
    pub fn enumerated(&self) -> u64 {
        self.enumerated.get()
    }

    fn charge(&self, need: u128) -> Result<(), AuditError> {
        if need > self.budget.0 as u128 {
            return Err(AuditError::BudgetExceeded {
                need,
                budget: self.budget.0,
            });
        }
        self.enumerated.set(self.enumerated.get() + need as u64);
        Ok(())
    }

    // -- EF1 -----------------------------------------------------------------

    /// Raw EF1 ratio of an allocation. Goods: the minimum over ordered pairs
    /// `(i, j)` with `A_j` non-empty of `v_i(A_i) / min_e v_i(A_j - e)`;
    /// pairs whose best removal empties the comparison are satisfied and
    /// dropped. Chores: the maximum over pairs `(i, j)` with `A_i` non-empty
    /// of `min_e c_i(A_i - e) / c_i(A_j)`.
    pub fn ef1_ratio_raw(&self, alloc: &Allocation) -> Result<Ratio, AuditError> {
        let n = self.n_agents();
        let masks: Vec<u32> = alloc.bundles.iter().map(mask_of).collect();
        let own: Vec<Vec<i128>> = (1..=n)
            .map(|i| masks.iter().map(|&m| self.scaled.value_mask(i, m)).collect())
            .collect();

        let goods = self.direction().is_goods();
        let mut best: Option<Ratio> = None;
        for i in 1..=n {
            for j in 1..=n {
                if i == j {
                    continue;
                }
                let contribution = if goods {
                    if masks[j - 1] == 0 {
                        continue;
                    }
                    let num = own[i - 1][i - 1];
                    let den = self.best_removal(i, masks[j - 1]);
                    if den == 0 {
                        continue; // removal empties the comparison: satisfied
                    }
                    Ratio::Finite(Q::new(BigInt::from(num), BigInt::from(den)))
                } else {
                    if masks[i - 1] == 0 {
                        continue;
                    }
                    let num = self.best_removal(i, masks[i - 1]);
                    let den = own[i - 1][j - 1];
                    if den == 0 {
                        if num == 0 {
                            Ratio::one()
                        } else {
                            Ratio::Infinite
                        }
                    } else {
                        Ratio::Finite(Q::new(BigInt::from(num), BigInt::from(den)))
                    }
                };
                best = Some(match best {
                    None => contribution,
                    Some(b) => {
                        if goods {
                            Ratio::min_of(b, contribution)
                        } else {
                            Ratio::max_of(b, contribution)
                        }
                    }
                });
            }
        }
        Ok(best.unwrap_or(if goods { Ratio::Infinite } else { Ratio::one() }))
    }

    /// Capped (goods) or floored (chores) EF1 ratio.
    pub fn ef1_ratio(&self, alloc: &Allocation) -> Result<Ratio, AuditError> {
        let raw = self.ef1_ratio_raw(alloc)?;
        Ok(if self.direction().is_goods() {
            raw.cap_at_one()
        } else {
            raw.floor_at_one()
        })
    }

    /// Minimum over single removals of agent `i`'s value of `mask`.
    fn best_removal(&self, agent: usize, mask: u32) -> i128 {
        let mut best = i128::MAX;
        let mut m = mask;
        while m != 0 {
            let bit = m & m.wrapping_neg();
            best = best.min(self.scaled.value_mask(agent, mask & !bit));
            m &= m - 1;
        }
        best
    }

    // -- MMS -----------------------------------------------------------------

    /// Exact maximin (goods) or minimax (chores) share of agent `agent` over
    /// the first `k` items, partitioning into `n_agents` bundles.
    pub fn mms_share(&self, agent: usize, k: u32) -> Result<Q, AuditError> {
        let scaled = self.mms_share_scaled(agent, k)?;
        Ok(self.scaled.unscale(scaled))
    }

    fn mms_share_scaled(&self, agent: usize, k: u32) -> Result<i128, AuditError> {
        if k as usize > self.scaled.n_items {
            return Err(AuditError::RoundOutOfRange(k, self.scaled.n_items));
        }
        let n = self.n_agents();
        let goods = self.direction().is_goods();
        if k == 0 {
            return Ok(0);
        }
        if let AgentEval::Additive(w) = &self.scaled.agents[agent - 1] {
            let mut levels: BTreeSet<i128> = BTreeSet::new();
            for &x in w.iter().take(k as usize) {
                if x > 0 {
                    levels.insert(x);
                }
            }
            let count = |lvl: i128| w.iter().take(k as usize).filter(|&&x| x == lvl).count() as u64;
            match levels.len() {
                0 => return Ok(0),
                1 => {
                    let lvl = *levels.iter().next().unwrap();
                    let c = count(lvl);
                    let per = if goods {
                        c / n as u64
                    } else {
                        c.div_ceil(n as u64)
                    };
                    return Ok(per as i128 * lvl);
                }
                2 => {
                    let mut it = levels.iter();
                    let a = *it.next().unwrap();
                    let b = *it.next().unwrap();
                    return Ok(two_level_share(count(a), a, count(b), b, n, goods));
                }
                _ => {}
            }
        }
        self.mms_enumerate(agent, k)
    }

    /// Full enumeration of `n^k` bundle assignments (first item pinned to
    /// bundle one; shares are bundle-anonymous).
    fn mms_enumerate(&self, agent: usize, k: u32) -> Result<i128, AuditError> {
        let n = self.n_agents();
        let need = (n as u128).pow(k.saturating_sub(1));
        self.charge(need)?;
        let goods = self.direction().is_goods();
        let mut bundles = vec![0u32; n];
        bundles[0] = 1; // item 1 -> bundle 1
        let mut best: Option<i128> = None;
        self.mms_rec(agent, 2, k, &mut bundles, goods, &mut best);
        Ok(best.expect("k >= 1 always yields at least one partition"))
    }

    fn mms_rec(
        &self,
        agent: usize,
        next: u32,
        k: u32,
        bundles: &mut Vec<u32>,
        goods: bool,
        best: &mut Option<i128>,
    ) {
        if next > k {
            let mut extreme: Option<i128> = None;
            for &m in bundles.iter() {
                let v = self.scaled.value_mask(agent, m);
                extreme = Some(match extreme {
                    None => v,
                    Some(x) => {
                        if goods {
                            x.min(v)
                        } else {
                            x.max(v)
                        }
                    }
                });
            }
            let v = extreme.unwrap();
            *best = Some(match *best {
                None => v,
                Some(b) => {
                    if goods {
                        b.max(v)
                    } else {
                        b.min(v)
                    }
                }
            });
            return;
        }
        let bit = 1u32 << (next - 1);
        for j in 0..bundles.len() {
            bundles[j] |= bit;
            self.mms_rec(agent, next + 1, k, bundles, goods, best);
            bundles[j] &= !bit;
        }
    }

    /// Minimum per-agent share ratio (goods, capped) or maximum (chores,
    /// floored) of an allocation against each agent's exact share.
    pub fn mms_ratio(&self, alloc: &Allocation) -> Result<Ratio, AuditError> {
        let raw = self.mms_ratio_raw(alloc)?;
        Ok(if self.direction().is_goods() {
            raw.cap_at_one()
        } else {
            raw.floor_at_one()
        })
    }

    pub fn mms_ratio_raw(&self, alloc: &Allocation) -> Result<Ratio, AuditError> {
        let n = self.n_agents();
        let goods = self.direction().is_goods();
        let mut best: Option<Ratio> = None;
        for i in 1..=n {
            let own = self.scaled.value_mask(i, mask_of(alloc.bundle(i)));
            let share = self.mms_share_scaled(i, alloc.round)?;
            let contribution = if share == 0 {
                if goods {
                    continue; // zero share is satisfied by anything
                } else if own == 0 {
                    Ratio::one()
                } else {
                    Ratio::Infinite
                }
            } else {
                Ratio::Finite(Q::new(BigInt::from(own), BigInt::from(share)))
            };
            best = Some(match best {
                None => contribution,
                Some(b) => {
                    if goods {
                        Ratio::min_of(b, contribution)
                    } else {
                        Ratio::max_of(b, contribution)
                    }
                }
            });
        }
        Ok(best.unwrap_or(if goods { Ratio::Infinite } else { Ratio::one() }))
    }

    // -- Welfare ---------------------------------------------------------------

    /// Best utilitarian welfare (goods: maximum USW; chores: minimum USC)
    /// over all complete assignments of the first `k` items.
    pub fn optimal_welfare(&self, k: u32) -> Result<Q, AuditError> {
        Ok(self.scaled.unscale(self.optimal_welfare_scaled(k)?))
    }

    fn optimal_welfare_scaled(&self, k: u32) -> Result<i128, AuditError> {
        if k as usize > self.scaled.n_items {
            return Err(AuditError::RoundOutOfRange(k, self.scaled.n_items));
        }
        let n = self.n_agents();
        let goods = self.direction().is_goods();
        if k == 0 {
            return Ok(0);
        }
        // Additive welfare decomposes per item.
        if matches!(self.scaled.agents[0], AgentEval::Additive(_)) {
            let mut total = 0i128;
            for e in 0..k as usize {
                let mut best: Option<i128> = None;
                for agent in &self.scaled.agents {
                    let AgentEval::Additive(w) = agent else {
                        unreachable!()
                    };
                    best = Some(match best {
                        None => w[e],
                        Some(b) => {
                            if goods {
                                b.max(w[e])
                            } else {
                                b.min(w[e])
                            }
                        }
                    });
                }
                total += best.unwrap();
            }
            return Ok(total);
        }
        let need = (n as u128).pow(k);
        self.charge(need)?;
        let mut bundles = vec![0u32; n];
        let mut best: Option<i128> = None;
        self.welfare_rec(1, k, &mut bundles, goods, &mut best);
        Ok(best.unwrap())
    }

    fn welfare_rec(
        &self,
        next: u32,
        k: u32,
        bundles: &mut Vec<u32>,
        goods: bool,
        best: &mut Option<i128>,
    ) {
        if next > k {
            let mut total = 0i128;
            for (j, &m) in bundles.iter().enumerate() {
                total += self.scaled.value_mask(j + 1, m);
            }
            *best = Some(match *best {
                None => total,
                Some(b) => {
                    if goods {
                        b.max(total)
                    } else {
                        b.min(total)
                    }
                }
            });
            return;
        }
        let bit = 1u32 << (next - 1);
        for j in 0..bundles.len() {
            bundles[j] |= bit;
            self.welfare_rec(next + 1, k, bundles, goods, best);
            bundles[j] &= !bit;
        }
    }

    /// Realized welfare of the allocation's bundles.
    pub fn welfare(&self, alloc: &Allocation) -> Q {
        let mut total = 0i128;
        for i in 1..=self.n_agents() {
            total += self.scaled.value_mask(i, mask_of(alloc.bundle(i)));
        }
        self.scaled.unscale(total)
    }

    /// `USW(A)/max-USW` (goods) or `USC(A)/min-USC` (chores).
    pub fn welfare_ratio(&self, alloc: &Allocation) -> Result<Ratio, AuditError> {
        let mut achieved = 0i128;
        for i in 1..=self.n_agents() {
            achieved += self.scaled.value_mask(i, mask_of(alloc.bundle(i)));
        }
        let opt = self.optimal_welfare_scaled(alloc.round)?;
        Ok(if opt == 0 {
            if achieved == 0 {
                Ratio::one()
            } else {
                Ratio::Infinite
            }
        } else {
            Ratio::Finite(Q::new(BigInt::from(achieved), BigInt::from(opt)))
        })
    }

    // -- Constraints -------------------------------------------------------------

    /// Non-wastefulness: every assigned good has a positive marginal within
    /// its own bundle, and every discarded good has zero marginal to every
    /// agent's current bundle. Goods only.
    pub fn check_nw(&self, alloc: &Allocation) -> Result<bool, AuditError> {
        debug_assert!(self.direction().is_goods());
        let n = self.n_agents();
        for i in 1..=n {
            let mask = mask_of(alloc.bundle(i));
            let full = self.scaled.value_mask(i, mask);
            let mut m = mask;
            while m != 0 {
                let bit = m & m.wrapping_neg();
                if full - self.scaled.value_mask(i, mask & !bit) <= 0 {
                    return Ok(false);
                }
                m &= m - 1;
            }
        }
        for &e in &alloc.discarded {
            let bit = 1u32 << (e - 1);
            for i in 1..=n {
                let mask = mask_of(alloc.bundle(i));
                if self.scaled.value_mask(i, mask | bit) != self.scaled.value_mask(i, mask) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Completeness: nothing thrown away or buffered. Chores only.
    pub fn check_complete(&self, alloc: &Allocation) -> bool {
        alloc.discarded.is_empty() && alloc.held.is_none()
    }

    /// All metrics for one round's allocation. Share and optimum columns are
    /// left empty when the enumeration budget is exceeded.
    pub fn round_metrics(&self, alloc: &Allocation) -> Result<RoundMetrics, AuditError> {
        let goods = self.direction().is_goods();
        let ef1_raw = self.ef1_ratio_raw(alloc)?;
        let ef1 = if goods {
            ef1_raw.cap_at_one()
        } else {
            ef1_raw.floor_at_one()
        };
        let (mms_raw, mms) = match self.mms_ratio_raw(alloc) {
            Ok(raw) => {
                let adj = if goods {
                    raw.cap_at_one()
                } else {
                    raw.floor_at_one()
                };
                (Some(raw), Some(adj))
            }
            Err(AuditError::BudgetExceeded { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        let welfare = match self.welfare_ratio(alloc) {
            Ok(r) => Some(r),
            Err(AuditError::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        let (nw_ok, complete_ok) = if goods {
            (Some(self.check_nw(alloc)?), None)
        } else {
            (None, Some(self.check_complete(alloc)))
        };
        Ok(RoundMetrics {
            round: alloc.round,
            ef1,
            ef1_raw,
            mms,
            mms_raw,
            welfare,
            nw_ok,
            complete_ok,
        })
    }
}

/// Exact two-positive-level share: enumerate how many high-value items each
/// bundle gets (bundle-anonymous, so partitions of the count suffice), then
/// water-fill the low-value items one at a time onto the currently extreme
/// bundle. With identical item values the water-fill is exactly optimal.
fn two_level_share(ca: u64, a: i128, cb: u64, b: i128, n: usize, goods: bool) -> i128 {
    let mut parts = Vec::new();
    partitions_into(cb, n, u64::MAX, &mut Vec::new(), &mut parts);
    let mut best: Option<i128> = None;
    for p in &parts {
        let mut loads: Vec<i128> = p.iter().map(|&y| y as i128 * b).collect();
        loads.resize(n, 0);
        for _ in 0..ca {
            // Goods: raise the minimum; chores: the cheapest bundle must
            // still take it to keep the maximum low.
            let idx = loads
                .iter()
                .enumerate()
                .min_by_key(|(_, &v)| v)
                .map(|(i, _)| i)
                .unwrap();
            loads[idx] += a;
        }
        let v = if goods {
            *loads.iter().min().unwrap()
        } else {
            *loads.iter().max().unwrap()
        };
        best = Some(match best {
            None => v,
            Some(x) => {
                if goods {
                    x.max(v)
                } else {
                    x.min(v)
                }
            }
        });
    }
    best.unwrap()
}

/// Unordered partitions of `count` into at most `parts` parts (descending).
fn partitions_into(count: u64, parts: usize, max: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if count == 0 {
        out.push(prefix.clone());
        return;
    }
    if parts == 0 {
        return;
    }
    let hi = count.min(max);
    for x in (1..=hi).rev() {
        prefix.push(x);
        partitions_into(count - x, parts - 1, x, prefix, out);
        prefix.pop();
    }
}

// ---------------------------------------------------------------------------
// Convenience wrappers over one-shot contexts
// ---------------------------------------------------------------------------

pub fn ef1_ratio(alloc: &Allocation, oracle: &Oracle) -> Result<Ratio, AuditError> {
    AuditContext::new(oracle, Budget::from_env())?.ef1_ratio(alloc)
}

pub fn mms_share(agent: usize, k: u32, oracle: &Oracle, budget: Budget) -> Result<Q, AuditError> {
    AuditContext::new(oracle, budget)?.mms_share(agent, k)
}

pub fn mms_ratio(alloc: &Allocation, oracle: &Oracle, budget: Budget) -> Result<Ratio, AuditError> {
    AuditContext::new(oracle, budget)?.mms_ratio(alloc)
}

pub fn optimal_welfare(k: u32, oracle: &Oracle, budget: Budget) -> Result<Q, AuditError> {
    AuditContext::new(oracle, budget)?.optimal_welfare(k)
}

pub fn check_nw(alloc: &Allocation, oracle: &Oracle) -> Result<bool, AuditError> {
    AuditContext::new(oracle, Budget::from_env())?.check_nw(alloc)
}

pub fn check_complete(alloc: &Allocation) -> bool {
    alloc.discarded.is_empty() && alloc.held.is_none()
}

/// One round's audited metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u32,
    pub ef1: Ratio,
    pub ef1_raw: Ratio,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mms: Option<Ratio>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mms_raw: Option<Ratio>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub welfare: Option<Ratio>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nw_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete_ok: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{Decision, Direction};
    use crate::rational::{q, qr};
    use crate::valuations::AdditiveTable;

    fn example_oracle() -> Oracle {
        let rows = [
            [6, 4, 5, 9, 3],
            [5, 8, 10, 2, 5],
            [12, 6, 6, 8, 4],
        ];
        Oracle::Additive(AdditiveTable::new(
            Direction::Goods,
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x)).collect())
                .collect(),
        ))
    }

    fn example_alloc(k: u32) -> Allocation {
        // e1->1, e2->2, e3->3, e4->1, e5->1
        let plan = [1usize, 2, 3, 1, 1];
        let mut a = Allocation::empty(Direction::Goods, 3, 0);
        for (idx, &agent) in plan.iter().enumerate().take(k as usize) {
            a = a
                .apply_decision((idx + 1) as u32, Decision::assign(agent))
                .unwrap();
        }
        a
    }

    #[test]
    fn worked_example_round_five() {
        let oracle = example_oracle();
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        let a5 = example_alloc(5);
        assert_eq!(ctx.ef1_ratio(&a5).unwrap(), Ratio::Finite(qr(1, 2)));
        assert_eq!(ctx.mms_share(3, 5).unwrap(), q(12));
        assert_eq!(ctx.mms_ratio(&a5).unwrap(), Ratio::Finite(qr(1, 2)));
        assert_eq!(ctx.optimal_welfare(5).unwrap(), q(44));
        assert_eq!(ctx.welfare_ratio(&a5).unwrap(), Ratio::Finite(qr(8, 11)));
    }

    #[test]
    fn worked_example_round_four() {
        let oracle = example_oracle();
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        let a4 = example_alloc(4);
        assert_eq!(ctx.ef1_ratio(&a4).unwrap(), Ratio::Finite(qr(3, 4)));
        assert_eq!(ctx.mms_ratio(&a4).unwrap(), Ratio::Finite(qr(3, 4)));
        assert_eq!(ctx.welfare_ratio(&a4).unwrap(), Ratio::Finite(qr(29, 39)));
    }

    #[test]
    fn singleton_bundles_are_ef1() {
        let oracle = example_oracle();
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        let mut a = Allocation::empty(Direction::Goods, 3, 0);
        a = a.apply_decision(1, Decision::assign(2)).unwrap();
        assert_eq!(ctx.ef1_ratio(&a).unwrap(), Ratio::one());
    }

    #[test]
    fn empty_allocation_metrics() {
        let oracle = example_oracle();
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        let a = Allocation::empty(Direction::Goods, 3, 0);
        assert_eq!(ctx.ef1_ratio(&a).unwrap(), Ratio::one());
        assert_eq!(ctx.mms_ratio(&a).unwrap(), Ratio::one());
        assert_eq!(ctx.welfare_ratio(&a).unwrap(), Ratio::one());
    }

    #[test]
    fn single_item_share_is_zero_for_goods() {
        let oracle = example_oracle();
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        assert_eq!(ctx.mms_share(1, 1).unwrap(), q(0));
    }

    #[test]
    fn chores_share_small_instance() {
        // costs {1, 1, 2} for two agents: minimax share is 2
        let oracle = Oracle::Additive(AdditiveTable::new(
            Direction::Chores,
            vec![
                vec![q(1), q(1), q(2)],
                vec![q(1), q(1), q(2)],
            ],
        ));
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        assert_eq!(ctx.mms_share(1, 3).unwrap(), q(2));
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let oracle = example_oracle();
        let ctx = AuditContext::new(&oracle, Budget(2)).unwrap();
        assert!(matches!(
            ctx.mms_share(1, 5),
            Err(AuditError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn nw_detects_wasted_discards() {
        let oracle = example_oracle();
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        let mut a = Allocation::empty(Direction::Goods, 3, 0);
        a = a.apply_decision(1, Decision::assign(1)).unwrap();
        a = a.apply_decision(2, Decision::Discard).unwrap();
        assert!(!ctx.check_nw(&a).unwrap()); // item 2 has positive value everywhere
    }

    #[test]
    fn two_level_share_matches_enumeration() {
        // goods: items {1,1,1,5,5} for 2 agents: best min is 5 vs {5,3}? enumerate
        assert_eq!(two_level_share(3, 1, 2, 5, 2, true), 6);
        // chores: same items, minimize the max
        assert_eq!(two_level_share(3, 1, 2, 5, 2, false), 7);
        // degenerate: no high items
        assert_eq!(two_level_share(4, 1, 0, 5, 3, true), 1);
    }
}
