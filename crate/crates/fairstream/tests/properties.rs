//! Property tests for the structural invariants: matroid laws, share
//! symmetry, replay determinism, format round trips, and the
//! adversary/witness contracts.

use std::collections::BTreeSet;

use proptest::prelude::*;

use fairstream::adversaries::{
    builtin_adversary, replay_witness, solve_game, Adversary, GameQuery, Metric,
};
use fairstream::algorithms::AlgorithmKind;
use fairstream::audit::{AuditContext, Budget};
use fairstream::core::{Decision, Direction, Payload, Stream};
use fairstream::harness::{
    generate, play, read_instance, run_stream, write_instance, Bounds, Driver, GenClass, GenSpec,
    RunOptions, Target,
};
use fairstream::rational::{q, qr, Q, Ratio};
use fairstream::valuations::{
    Oracle, PartitionMatroidRank, SupermodularComplementCost, Valuation,
};

fn ids(mask: u32) -> BTreeSet<u32> {
    (0..32)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| b + 1)
        .collect()
}

fn rank_oracle(cats: &[usize], universe: usize) -> PartitionMatroidRank {
    PartitionMatroidRank::new(vec![cats
        .iter()
        .map(|c| Some(format!("c{}", c % universe)))
        .collect()])
}

proptest! {
    /// Rank functions are monotone and submodular with 0/1 marginals.
    #[test]
    fn partition_rank_laws(cats in prop::collection::vec(0usize..5, 1..10), x in 0u32..1024, y in 0u32..1024) {
        let t = cats.len() as u32;
        let mask = if t >= 31 { u32::MAX } else { (1u32 << t) - 1 };
        let (x, y) = (x & mask, y & mask);
        let m = rank_oracle(&cats, 3);
        let vx = m.set_value(1, &ids(x)).unwrap();
        let vy = m.set_value(1, &ids(y)).unwrap();
        let vu = m.set_value(1, &ids(x | y)).unwrap();
        let vi = m.set_value(1, &ids(x & y)).unwrap();
        prop_assert!(vx.clone() + vy.clone() >= vu.clone() + vi.clone());
        if x & y == x {
            prop_assert!(vx <= vy);
        }
        // binary marginal law
        for e in 1..=t {
            if x & (1 << (e - 1)) == 0 {
                let d = m.marginal(1, &ids(x), e).unwrap();
                prop_assert!(d == q(0) || d == q(1));
            }
        }
    }

    /// Complement costs are supermodular with 0/1 marginals, and the
    /// rank/cost duality holds exactly.
    #[test]
    fn complement_cost_laws(cats in prop::collection::vec(0usize..4, 1..10), x in 0u32..1024, y in 0u32..1024) {
        let t = cats.len() as u32;
        let mask = (1u32 << t) - 1;
        let (x, y) = (x & mask, y & mask);
        let labels: Vec<_> = cats.iter().map(|c| Some(format!("c{c}"))).collect();
        let cost = SupermodularComplementCost::new(vec![labels.clone()]);
        let rank = PartitionMatroidRank::new(vec![labels]);
        let cx = cost.set_value(1, &ids(x)).unwrap();
        let cy = cost.set_value(1, &ids(y)).unwrap();
        let cu = cost.set_value(1, &ids(x | y)).unwrap();
        let ci = cost.set_value(1, &ids(x & y)).unwrap();
        prop_assert!(cx.clone() + cy.clone() <= cu + ci);
        // duality: cost(S) + rank(S) = |S|
        let r = rank.set_value(1, &ids(x)).unwrap();
        prop_assert_eq!(cx + r, q(ids(x).len() as i64));
        for e in 1..=t {
            if x & (1 << (e - 1)) == 0 {
                let d = cost.marginal(1, &ids(x), e).unwrap();
                prop_assert!(d == q(0) || d == q(1));
            }
        }
    }

    /// Exact shares are invariant under permuting the items.
    #[test]
    fn share_is_item_symmetric(seed in 0u64..500, n in 2usize..4) {
        let spec = GenSpec {
            class: GenClass::Bivalued { a: q(1), b: q(5) },
            direction: Direction::Goods,
            n,
            t: 6,
            deadline: 0,
            seed,
        };
        let stream = generate(&spec);
        let oracle = Oracle::from_stream(&stream);
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        let base = ctx.mms_share(1, 6).unwrap();

        let mut items = stream.items.clone();
        items.reverse();
        for (idx, item) in items.iter_mut().enumerate() {
            item.id = idx as u32 + 1;
        }
        let shuffled = Stream::new(stream.direction, n, stream.representation, 0, items).unwrap();
        let oracle2 = Oracle::from_stream(&shuffled);
        let ctx2 = AuditContext::new(&oracle2, Budget::default()).unwrap();
        prop_assert_eq!(base, ctx2.mms_share(1, 6).unwrap());
    }

    /// Instance files survive a serialize/parse round trip.
    #[test]
    fn instance_round_trip(seed in 0u64..500, matroid in any::<bool>()) {
        let spec = GenSpec {
            class: if matroid {
                GenClass::PartitionMatroid { categories: 3 }
            } else {
                GenClass::Trivalued { a: qr(1, 10), b: q(1), z: q(10) }
            },
            direction: if seed % 2 == 0 { Direction::Goods } else { Direction::Chores },
            n: 2 + (seed % 3) as usize,
            t: 1 + (seed % 7) as usize,
            deadline: 0,
            seed,
        };
        let stream = generate(&spec);
        let mut buf = Vec::new();
        write_instance(&stream, Some("test"), &mut buf).unwrap();
        let parsed = read_instance(buf.as_slice()).unwrap();
        prop_assert_eq!(parsed, stream);
    }
}

#[test]
fn matroid_exchange_exhaustive() {
    // exhaustive over every labeling of up to 6 items with 3 categories:
    // whenever rank(C) < rank(D), some item of D-C has marginal 1 on C
    for t in 1..=6usize {
        for code in 0..3usize.pow(t as u32) {
            let mut cats = Vec::with_capacity(t);
            let mut c = code;
            for _ in 0..t {
                cats.push(c % 3);
                c /= 3;
            }
            let m = rank_oracle(&cats, 3);
            let full = (1u32 << t) - 1;
            for cset in 0..=full {
                for dset in 0..=full {
                    let rc = m.set_value(1, &ids(cset)).unwrap();
                    let rd = m.set_value(1, &ids(dset)).unwrap();
                    if rc < rd {
                        let found = (1..=t as u32).any(|e| {
                            dset & (1 << (e - 1)) != 0
                                && cset & (1 << (e - 1)) == 0
                                && m.marginal(1, &ids(cset), e).unwrap() == q(1)
                        });
                        assert!(found, "exchange fails: cats {cats:?} C={cset:#b} D={dset:#b}");
                    }
                }
            }
        }
    }
}

#[test]
fn replay_is_deterministic() {
    for seed in 0..50 {
        let spec = GenSpec {
            class: GenClass::PartitionMatroid { categories: 4 },
            direction: Direction::Goods,
            n: 3,
            t: 8,
            deadline: 0,
            seed,
        };
        let stream = generate(&spec);
        let run = |_| {
            run_stream(
                &stream,
                Driver::Algorithm(AlgorithmKind::MarginalGreedy { relaxed: false }),
                &RunOptions::default(),
            )
            .unwrap()
        };
        let a = run(());
        let b = run(());
        assert_eq!(a.decisions, b.decisions);
        assert_eq!(
            serde_json::to_string(&a.rounds).unwrap(),
            serde_json::to_string(&b.rounds).unwrap()
        );
    }
}

#[test]
fn metrics_depend_only_on_the_prefix() {
    // two streams sharing a 4-item prefix agree on every round-4 metric
    let spec = GenSpec {
        class: GenClass::Bivalued { a: q(1), b: q(5) },
        direction: Direction::Goods,
        n: 2,
        t: 8,
        deadline: 0,
        seed: 11,
    };
    let long = generate(&spec);
    let short = Stream::new(
        long.direction,
        long.n,
        long.representation,
        0,
        long.items[..4].to_vec(),
    )
    .unwrap();
    let script: Vec<Decision> = (0..8).map(|k| Decision::assign(1 + (k % 2))).collect();
    let full = run_stream(&long, Driver::Scripted(&script), &RunOptions::default()).unwrap();
    let cut = run_stream(&short, Driver::Scripted(&script[..4]), &RunOptions::default()).unwrap();
    assert_eq!(full.rounds[3], cut.rounds[3]);
}

#[test]
fn greedy_discards_only_worthless_items() {
    for seed in 0..200 {
        let spec = GenSpec {
            class: GenClass::PartitionMatroid { categories: 3 },
            direction: Direction::Goods,
            n: 2,
            t: 8,
            deadline: 0,
            seed,
        };
        let stream = generate(&spec);
        let oracle = Oracle::from_stream(&stream);
        for kind in [
            AlgorithmKind::GreedyNw,
            AlgorithmKind::MarginalGreedy { relaxed: false },
        ] {
            let report =
                run_stream(&stream, Driver::Algorithm(kind), &RunOptions::default()).unwrap();
            // replay decisions, checking every discard had zero marginal
            // for every agent at its moment of arrival
            let mut alloc = fairstream::core::Allocation::empty(Direction::Goods, 2, 0);
            for (idx, d) in report.decisions.iter().enumerate() {
                let id = idx as u32 + 1;
                if *d == Decision::Discard {
                    for agent in 1..=2 {
                        assert_eq!(
                            oracle.marginal(agent, alloc.bundle(agent), id).unwrap(),
                            q(0),
                            "seed {seed}: discarded item {id} had positive marginal"
                        );
                    }
                }
                alloc = alloc.apply_decision(id, *d).unwrap();
            }
        }
    }
}

#[test]
fn witness_replay_reproduces_game_values() {
    let eps = qr(1, 10);
    for (name, metric) in [
        ("trivalued_goods_2", Metric::Ef1),
        ("bivalued_goods", Metric::Mms),
        ("submodbin_fairness", Metric::Ef1),
        ("bivalued_chores", Metric::Ef1),
        ("supermod_ef1", Metric::Ef1),
        ("identical_pref_chores", Metric::Ef1),
    ] {
        let adv = builtin_adversary(name, &eps).unwrap();
        let value = solve_game(adv.as_ref(), &GameQuery::new(metric)).unwrap();
        let (alloc, oracle) = replay_witness(adv.as_ref(), &value.witness);
        let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
        let measured = match metric {
            Metric::Ef1 => ctx.ef1_ratio(&alloc).unwrap(),
            Metric::Mms => ctx.mms_ratio(&alloc).unwrap(),
            _ => unreachable!(),
        };
        assert_eq!(Some(measured), value.value, "{name} witness mismatch");
    }
}

#[test]
fn plays_never_beat_the_certified_game_value() {
    let eps = qr(1, 10);
    // tri-valued goods vs relaxed rotating greedy: final EF1 at most eps
    let adv = builtin_adversary("trivalued_goods_2", &eps).unwrap();
    let outcome = play(
        adv.as_ref(),
        Target::Builtin(AlgorithmKind::MarginalGreedy { relaxed: true }),
        Budget::default(),
    )
    .unwrap();
    assert!(outcome.constraint_ok);
    assert!(outcome.ef1.cmp_total(&Ratio::Finite(qr(1, 10))).is_le());

    // bi-valued goods vs the two-agent controller: exactly the optimum 1/2
    let adv = builtin_adversary("bivalued_goods", &eps).unwrap();
    let outcome = play(
        adv.as_ref(),
        Target::Builtin(AlgorithmKind::BivaluedTwoGoods),
        Budget::default(),
    )
    .unwrap();
    assert!(outcome.constraint_ok);
    assert_eq!(outcome.ef1, Ratio::Finite(qr(1, 2)));

    // chores EF1 tree vs the chores controller: between the certified
    // optimum and the universal two-bound
    let adv = builtin_adversary("bivalued_chores", &eps).unwrap();
    let outcome = play(
        adv.as_ref(),
        Target::Builtin(AlgorithmKind::BivaluedTwoChores),
        Budget::default(),
    )
    .unwrap();
    assert!(outcome.constraint_ok);
    assert!(outcome.ef1.cmp_total(&Ratio::Finite(qr(20, 11))).is_ge());
    assert!(outcome.ef1.cmp_total(&Ratio::Finite(q(2))).is_le());
}

/// Replays the category trees and checks the marginal each agent reports for
/// every on-script item, as stated round by round in the construction.
#[test]
fn figure_trees_reproduce_stated_marginals() {
    fn marginals_along(
        adv: &dyn Adversary,
        path: &[usize],
    ) -> Vec<(Q, Q)> {
        let mut history: Vec<Decision> = Vec::new();
        let mut payloads: Vec<Payload> = Vec::new();
        let mut out = Vec::new();
        let mut alloc = fairstream::core::Allocation::empty(adv.direction(), 2, 0);
        for &agent in path {
            let payload = adv.next(&history).expect("on-script item");
            payloads.push(payload);
            let id = payloads.len() as u32;
            let oracle = adv.oracle(&payloads);
            out.push((
                oracle.marginal(1, alloc.bundle(1), id).unwrap(),
                oracle.marginal(2, alloc.bundle(2), id).unwrap(),
            ));
            alloc = alloc.apply_decision(id, Decision::assign(agent)).unwrap();
            history.push(Decision::assign(agent));
        }
        out
    }

    let fairness = builtin_adversary("submodbin_fairness", &qr(1, 10)).unwrap();
    // seed, forced second, then either side: marginals are 1 everywhere on
    // script, and the closer is worthless only to the loaded agent
    let ms = marginals_along(fairness.as_ref(), &[1, 2, 2, 2]);
    assert_eq!(ms[0], (q(1), q(1)));
    assert_eq!(ms[1], (q(1), q(1)));
    assert_eq!(ms[2], (q(1), q(1)));
    assert_eq!(ms[3], (q(0), q(1)));
    let ms = marginals_along(fairness.as_ref(), &[1, 2, 1, 1]);
    assert_eq!(ms[3], (q(1), q(0)));

    let shares = builtin_adversary("supermod_mms_usc", &qr(1, 10)).unwrap();
    // first case: two free items on one side, then marginal cost 1 for the
    // loaded side and 0 across, then 1 for both
    let ms = marginals_along(shares.as_ref(), &[1, 1, 2, 2]);
    assert_eq!(ms[0], (q(0), q(0)));
    assert_eq!(ms[1], (q(0), q(0)));
    assert_eq!(ms[2], (q(1), q(0)));
    assert_eq!(ms[3], (q(1), q(1)));
    // deep case: free items alternating, closing with 1 for both
    let ms = marginals_along(shares.as_ref(), &[1, 2, 1, 2, 2, 2]);
    assert_eq!(ms[0], (q(0), q(0)));
    assert_eq!(ms[1], (q(0), q(0)));
    assert_eq!(ms[2], (q(0), q(0)));
    assert_eq!(ms[3], (q(0), q(0)));
    assert_eq!(ms[4], (q(0), q(0)));
    assert_eq!(ms[5], (q(1), q(1)));
}

#[test]
fn deadline_runs_audit_only_flush_points() {
    let spec = GenSpec {
        class: GenClass::Bivalued { a: q(1), b: q(5) },
        direction: Direction::Goods,
        n: 2,
        t: 7,
        deadline: 1,
        seed: 4,
    };
    let stream = generate(&spec);
    let report = run_stream(
        &stream,
        Driver::Algorithm(AlgorithmKind::DeadlineMatching),
        &RunOptions {
            bounds: Bounds {
                ef1_min: Some(q(1)),
                ..Default::default()
            },
            ..Default::default()
        },
    )
    .unwrap();
    // seven items pair into three flushes plus the trailing release
    assert_eq!(report.rounds.len(), 4);
    assert!(report.ok());
    // recorded trace replays to the same audits
    let replay = run_stream(
        &stream,
        Driver::Scripted(&report.decisions),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(replay.rounds, report.rounds);
}
