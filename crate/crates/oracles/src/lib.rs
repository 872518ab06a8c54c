//! Literal-definition fairness evaluators.
//!
//! Every function here is a direct transcription of a definition into nested
//! loops over pairs, removals, partitions, or assignments, sharing nothing
//! with fairstream's production audit paths. They exist solely so tests can
//! check that the optimized audit agrees exactly with the definitions on
//! every instance small enough to enumerate.

use std::collections::BTreeSet;

use num_traits::Zero;

use fairstream::core::{Allocation, Direction, ItemId};
use fairstream::rational::{Q, Ratio};
use fairstream::valuations::Oracle;

fn value(oracle: &Oracle, agent: usize, items: &BTreeSet<ItemId>) -> Q {
    oracle
        .set_value(agent, items)
        .expect("literal evaluators run on consistent instances")
}

/// EF1 by definition: for each ordered pair, try every single removal.
pub fn literal_ef1(alloc: &Allocation, oracle: &Oracle) -> Ratio {
    let n = alloc.n;
    let goods = alloc.direction.is_goods();
    let mut best: Option<Ratio> = None;
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let contribution = if goods {
                let envied = alloc.bundle(j);
                if envied.is_empty() {
                    continue;
                }
                let own = value(oracle, i, alloc.bundle(i));
                let mut den: Option<Q> = None;
                for &e in envied {
                    let mut removed = envied.clone();
                    removed.remove(&e);
                    let v = value(oracle, i, &removed);
                    den = Some(match den {
                        None => v,
                        Some(d) => d.min(v),
                    });
                }
                let den = den.unwrap();
                if den.is_zero() {
                    continue;
                }
                Ratio::Finite(own / den)
            } else {
                let own_bundle = alloc.bundle(i);
                if own_bundle.is_empty() {
                    continue;
                }
                let mut num: Option<Q> = None;
                for &e in own_bundle {
                    let mut removed = own_bundle.clone();
                    removed.remove(&e);
                    let c = value(oracle, i, &removed);
                    num = Some(match num {
                        None => c,
                        Some(x) => x.min(c),
                    });
                }
                let num = num.unwrap();
                let den = value(oracle, i, alloc.bundle(j));
                if den.is_zero() {
                    if num.is_zero() {
                        Ratio::one()
                    } else {
                        Ratio::Infinite
                    }
                } else {
                    Ratio::Finite(num / den)
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
    let raw = best.unwrap_or(if goods { Ratio::Infinite } else { Ratio::one() });
    if goods {
        raw.cap_at_one()
    } else {
        raw.floor_at_one()
    }
}

/// Every assignment of items `1..=k` to `n` bundles, by counting in base `n`.
fn assignments(k: u32, n: usize) -> impl Iterator<Item = Vec<BTreeSet<ItemId>>> {
    let total = (n as u64).checked_pow(k).expect("literal budget");
    (0..total).map(move |code| {
        let mut bundles = vec![BTreeSet::new(); n];
        let mut c = code;
        for e in 1..=k {
            bundles[(c % n as u64) as usize].insert(e);
            c /= n as u64;
        }
        bundles
    })
}

/// Maximin (goods) or minimax (chores) share straight from the definition.
pub fn literal_mms_share(
    agent: usize,
    k: u32,
    n: usize,
    oracle: &Oracle,
    direction: Direction,
) -> Q {
    let mut best: Option<Q> = None;
    for bundles in assignments(k, n) {
        let mut extreme: Option<Q> = None;
        for b in &bundles {
            let v = value(oracle, agent, b);
            extreme = Some(match extreme {
                None => v,
                Some(x) => {
                    if direction.is_goods() {
                        x.min(v)
                    } else {
                        x.max(v)
                    }
                }
            });
        }
        let v = extreme.unwrap_or_else(Q::zero);
        best = Some(match best {
            None => v,
            Some(b) => {
                if direction.is_goods() {
                    b.max(v)
                } else {
                    b.min(v)
                }
            }
        });
    }
    best.unwrap_or_else(Q::zero)
}

/// Share ratio from the definition, with the production edge conventions.
pub fn literal_mms_ratio(alloc: &Allocation, oracle: &Oracle) -> Ratio {
    let n = alloc.n;
    let goods = alloc.direction.is_goods();
    let mut best: Option<Ratio> = None;
    for i in 1..=n {
        let own = value(oracle, i, alloc.bundle(i));
        let share = literal_mms_share(i, alloc.round, n, oracle, alloc.direction);
        let contribution = if share.is_zero() {
            if goods {
                continue;
            } else if own.is_zero() {
                Ratio::one()
            } else {
                Ratio::Infinite
            }
        } else {
            Ratio::Finite(own / share)
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
    let raw = best.unwrap_or(if goods { Ratio::Infinite } else { Ratio::one() });
    if goods {
        raw.cap_at_one()
    } else {
        raw.floor_at_one()
    }
}

/// Best complete-assignment welfare by full enumeration.
pub fn literal_optimal_welfare(k: u32, n: usize, oracle: &Oracle, direction: Direction) -> Q {
    let mut best: Option<Q> = None;
    for bundles in assignments(k, n) {
        let mut total = Q::zero();
        for (idx, b) in bundles.iter().enumerate() {
            total += value(oracle, idx + 1, b);
        }
        best = Some(match best {
            None => total,
            Some(b) => {
                if direction.is_goods() {
                    b.max(total)
                } else {
                    b.min(total)
                }
            }
        });
    }
    best.unwrap_or_else(Q::zero)
}

/// Welfare ratio of the allocation against the literal optimum.
pub fn literal_welfare_ratio(alloc: &Allocation, oracle: &Oracle) -> Ratio {
    let mut achieved = Q::zero();
    for i in 1..=alloc.n {
        achieved += value(oracle, i, alloc.bundle(i));
    }
    let opt = literal_optimal_welfare(alloc.round, alloc.n, oracle, alloc.direction);
    if opt.is_zero() {
        if achieved.is_zero() {
            Ratio::one()
        } else {
            Ratio::Infinite
        }
    } else {
        Ratio::Finite(achieved / opt)
    }
}

/// Non-wastefulness by definition: positive marginals inside bundles, zero
/// marginals for every discarded item against every bundle.
pub fn literal_nw(alloc: &Allocation, oracle: &Oracle) -> bool {
    for i in 1..=alloc.n {
        let bundle = alloc.bundle(i);
        for &e in bundle {
            let mut rest = bundle.clone();
            rest.remove(&e);
            if value(oracle, i, bundle) - value(oracle, i, &rest) <= Q::zero() {
                return false;
            }
        }
    }
    for &e in &alloc.discarded {
        for i in 1..=alloc.n {
            let bundle = alloc.bundle(i);
            let mut with = bundle.clone();
            with.insert(e);
            if value(oracle, i, &with) != value(oracle, i, bundle) {
                return false;
            }
        }
    }
    true
}

/// Completeness by definition.
pub fn literal_complete(alloc: &Allocation) -> bool {
    alloc.discarded.is_empty() && alloc.held.is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairstream::core::Decision;
    use fairstream::rational::{q, qr};
    use fairstream::valuations::AdditiveTable;

    fn example() -> (Allocation, Oracle) {
        let rows = [
            [6, 4, 5, 9, 3],
            [5, 8, 10, 2, 5],
            [12, 6, 6, 8, 4],
        ];
        let oracle = Oracle::Additive(AdditiveTable::new(
            Direction::Goods,
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x)).collect())
                .collect(),
        ));
        let plan = [1usize, 2, 3, 1, 1];
        let mut alloc = Allocation::empty(Direction::Goods, 3, 0);
        for (idx, &agent) in plan.iter().enumerate() {
            alloc = alloc
                .apply_decision(idx as u32 + 1, Decision::assign(agent))
                .unwrap();
        }
        (alloc, oracle)
    }

    #[test]
    fn worked_example_matches_the_reported_ratios() {
        let (alloc, oracle) = example();
        assert_eq!(literal_ef1(&alloc, &oracle), Ratio::Finite(qr(1, 2)));
        assert_eq!(literal_mms_ratio(&alloc, &oracle), Ratio::Finite(qr(1, 2)));
        assert_eq!(
            literal_mms_share(3, 5, 3, &oracle, Direction::Goods),
            q(12)
        );
        assert_eq!(
            literal_optimal_welfare(5, 3, &oracle, Direction::Goods),
            q(44)
        );
    }

    #[test]
    fn empty_allocation_is_satisfied_everywhere() {
        let (_, oracle) = example();
        let alloc = Allocation::empty(Direction::Goods, 3, 0);
        assert_eq!(literal_ef1(&alloc, &oracle), Ratio::one());
        assert_eq!(literal_mms_ratio(&alloc, &oracle), Ratio::one());
        assert_eq!(literal_welfare_ratio(&alloc, &oracle), Ratio::one());
        assert!(literal_nw(&alloc, &oracle));
    }
}
