//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured values. Quantified criteria sweep ten thousand seeded
//! streams; certificate criteria pin exact rational game values.
//!
//! Every tolerance is written here literally; nothing is calibrated at run
//! time.

use fairstream::adversaries::{
    builtin_adversary, game_value_at_epsilon, replay_witness, solve_game, GameQuery, Metric,
};
use fairstream::algorithms::AlgorithmKind;
use fairstream::audit::{AuditContext, Budget};
use fairstream::core::{Decision, Direction, Item, Payload, Representation, Stream};
use fairstream::harness::{
    run_generated_batch, run_stream, Bounds, Driver, GenClass, GenSpec, RunOptions,
};
use fairstream::rational::{q, qr, Q, Ratio};

fn fin(p: i64, d: i64) -> Option<Ratio> {
    Some(Ratio::Finite(qr(p, d)))
}

fn opts(bounds: Bounds) -> RunOptions {
    RunOptions {
        budget: Budget::default(),
        bounds,
        timings: false,
    }
}

fn example_stream() -> Stream {
    let rows = [
        [6, 4, 5, 9, 3],
        [5, 8, 10, 2, 5],
        [12, 6, 6, 8, 4],
    ];
    let items = (0..5)
        .map(|k| Item {
            id: k as u32 + 1,
            payload: Payload::Additive((0..3).map(|i| q(rows[i][k])).collect()),
        })
        .collect();
    Stream::new(Direction::Goods, 3, Representation::Additive, 0, items).unwrap()
}

#[test]
fn criterion_01_example_replay() {
    let started = std::time::Instant::now();
    let script = vec![
        Decision::assign(1),
        Decision::assign(2),
        Decision::assign(3),
        Decision::assign(1),
        Decision::assign(1),
    ];
    let report = run_stream(
        &example_stream(),
        Driver::Scripted(&script),
        &opts(Bounds::default()),
    )
    .unwrap();
    let r4 = &report.rounds[3];
    assert_eq!(r4.ef1, Ratio::Finite(qr(3, 4)));
    assert_eq!(r4.mms, fin(3, 4));
    assert_eq!(r4.welfare, fin(29, 39));
    let r5 = &report.rounds[4];
    assert_eq!(r5.ef1, Ratio::Finite(qr(1, 2)));
    assert_eq!(r5.mms, fin(1, 2));
    assert_eq!(r5.welfare, fin(8, 11));
    assert_eq!(report.summary.ef1, Ratio::Finite(qr(1, 2)));
    assert_eq!(report.summary.mms, fin(1, 2));
    assert_eq!(report.summary.welfare, fin(1, 2));
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 1, "replay took {elapsed:?}");
    println!(
        "criterion 01 PASS: replay audits 3/4 3/4 29/39 | 1/2 1/2 8/11, summaries 1/2 1/2 1/2 in {elapsed:?}"
    );
}

#[test]
fn criterion_02_marginal_greedy_guarantees() {
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| GenSpec {
            class: GenClass::PartitionMatroid { categories: 4 },
            direction: Direction::Goods,
            n: 2 + (seed % 2) as usize,
            t: 1 + ((seed / 2) % 10) as usize,
            deadline: 0,
            seed,
        })
        .collect();
    let bounds = Bounds {
        ef1_min: Some(qr(1, 2)),
        mms_min: Some(qr(1, 2)),
        welfare_min: Some(qr(1, 2)),
        require_nw: true,
        ..Default::default()
    };
    let batch = run_generated_batch(
        &specs,
        AlgorithmKind::MarginalGreedy { relaxed: false },
        &opts(bounds),
    )
    .unwrap();
    assert_eq!(batch.failed, 0, "failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);
    println!(
        "criterion 02 PASS: marginal greedy kept NW, EF1>=1/2, MMS>=1/2, USW>=1/2 on {} matroid streams",
        batch.total
    );
}

#[test]
fn criterion_03_submodular_binary_certificates() {
    let eps = qr(1, 10);
    let ef1 = game_value_at_epsilon("submodbin_fairness", Metric::Ef1, &eps).unwrap();
    assert_eq!(ef1.value, fin(1, 2));
    let mms = game_value_at_epsilon("submodbin_fairness", Metric::Mms, &eps).unwrap();
    assert_eq!(mms.value, fin(1, 2));
    let usw = game_value_at_epsilon("submodbin_usw", Metric::Usw, &eps).unwrap();
    assert_eq!(usw.value, fin(1, 2));
    println!("criterion 03 PASS: rank-valuation game values EF1=1/2 MMS=1/2 USW=1/2 exactly");
}

#[test]
fn criterion_04_two_agent_goods_controller() {
    let pairs = [(1i64, 5i64), (1, 10), (3, 7)];
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| {
            let (a, b) = pairs[(seed % 3) as usize];
            GenSpec {
                class: GenClass::Bivalued { a: q(a), b: q(b) },
                direction: Direction::Goods,
                n: 2,
                t: 1 + ((seed / 3) % 12) as usize,
                deadline: 0,
                seed,
            }
        })
        .collect();
    let bounds = Bounds {
        ef1_min: Some(qr(1, 2)),
        mms_min: Some(qr(1, 3)),
        require_nw: true,
        base_rounds_exact_ef1: true,
        ..Default::default()
    };
    let batch = run_generated_batch(&specs, AlgorithmKind::BivaluedTwoGoods, &opts(bounds)).unwrap();
    assert_eq!(batch.failed, 0, "failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);
    println!(
        "criterion 04 PASS: goods controller kept NW, EF1>=1/2, MMS>=1/3, base rounds exact on {} streams",
        batch.total
    );
}

#[test]
fn criterion_05_bivalued_goods_certificates() {
    let eps = qr(1, 10);
    let ef1 = game_value_at_epsilon("bivalued_goods", Metric::Ef1, &eps).unwrap();
    assert_eq!(ef1.value, fin(1, 2));
    let mms = game_value_at_epsilon("bivalued_goods", Metric::Mms, &eps).unwrap();
    assert_eq!(mms.value, fin(1, 3));
    for e in [qr(1, 5), qr(1, 10), qr(1, 20)] {
        let ef1 = game_value_at_epsilon("bivalued_goods", Metric::Ef1, &e).unwrap();
        let mms = game_value_at_epsilon("bivalued_goods", Metric::Mms, &e).unwrap();
        assert!(ef1.value.unwrap().cmp_total(&Ratio::Finite(qr(1, 2))).is_le());
        assert!(mms.value.unwrap().cmp_total(&Ratio::Finite(qr(1, 3))).is_le());
    }
    println!("criterion 05 PASS: two-agent bi-valued game values EF1=1/2 MMS=1/3, trend capped at every epsilon");
}

#[test]
fn criterion_06_picking_algorithms_exact() {
    // goods: identical binary agents plus one bi-valued agent
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| GenSpec {
            class: GenClass::BinaryPlusBivalued {
                a: q(2),
                b: q(7),
                identical: true,
            },
            direction: Direction::Goods,
            n: 2 + (seed % 3) as usize,
            t: 1 + ((seed / 3) % 12) as usize,
            deadline: 0,
            seed,
        })
        .collect();
    let bounds = Bounds {
        ef1_min: Some(q(1)),
        mms_min: Some(q(1)),
        require_nw: true,
        ..Default::default()
    };
    let batch = run_generated_batch(&specs, AlgorithmKind::AdaptedPicking, &opts(bounds)).unwrap();
    assert_eq!(batch.failed, 0, "goods failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);

    // chores: independent binary agents plus one bi-valued agent
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| GenSpec {
            class: GenClass::BinaryPlusBivalued {
                a: q(2),
                b: q(7),
                identical: false,
            },
            direction: Direction::Chores,
            n: 2 + (seed % 3) as usize,
            t: 1 + ((seed / 3) % 12) as usize,
            deadline: 0,
            seed,
        })
        .collect();
    let bounds = Bounds {
        ef1_max: Some(q(1)),
        mms_max: Some(q(1)),
        require_complete: true,
        ..Default::default()
    };
    let batch =
        run_generated_batch(&specs, AlgorithmKind::AdaptedChoresPicking, &opts(bounds)).unwrap();
    assert_eq!(batch.failed, 0, "chores failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);
    println!("criterion 06 PASS: picking rules stayed exactly EF1 and exact-share on 2x10000 mixed streams");
}

#[test]
fn criterion_07_compelled_greedy_exact() {
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| GenSpec {
            class: GenClass::Binary,
            direction: Direction::Chores,
            n: 2 + (seed % 3) as usize,
            t: 1 + ((seed / 3) % 12) as usize,
            deadline: 0,
            seed,
        })
        .collect();
    let bounds = Bounds {
        ef1_max: Some(q(1)),
        mms_max: Some(q(1)),
        welfare_max: Some(q(1)),
        require_complete: true,
        ..Default::default()
    };
    let batch =
        run_generated_batch(&specs, AlgorithmKind::CompelledGreedy, &opts(bounds)).unwrap();
    assert_eq!(batch.failed, 0, "failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);
    println!(
        "criterion 07 PASS: compelled greedy stayed complete, EF1, exact-share, min-USC on {} binary streams",
        batch.total
    );
}

#[test]
fn criterion_08_supermodular_certificates() {
    let eps = qr(1, 10);
    let ef1 = game_value_at_epsilon("supermod_ef1", Metric::Ef1, &eps).unwrap();
    assert_eq!(ef1.value, Some(Ratio::Infinite));

    let mms = game_value_at_epsilon("supermod_mms_usc", Metric::Mms, &eps).unwrap();
    assert_eq!(mms.value, Some(Ratio::Infinite));
    let usc = game_value_at_epsilon("supermod_mms_usc", Metric::Usc, &eps).unwrap();
    assert_eq!(usc.value, Some(Ratio::Infinite));

    // witness detail: one unit of allocated cost against zero share and
    // zero optimal social cost
    let adv = builtin_adversary("supermod_mms_usc", &eps).unwrap();
    let (alloc, oracle) = replay_witness(adv.as_ref(), &usc.witness);
    let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
    let total = ctx.welfare(&alloc);
    assert_eq!(total, q(1));
    assert_eq!(ctx.optimal_welfare(alloc.round).unwrap(), q(0));
    let shares: Vec<Q> = (1..=2)
        .map(|i| ctx.mms_share(i, alloc.round).unwrap())
        .collect();
    assert!(shares.iter().any(|s| *s == q(0)));
    println!("criterion 08 PASS: supermodular games are infinitely bad (cost 1 vs share 0, optimum 0)");
}

#[test]
fn criterion_09_two_agent_chores_controller() {
    let pairs = [(1i64, 5i64), (1, 10), (3, 7)];
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| {
            let (a, b) = pairs[(seed % 3) as usize];
            GenSpec {
                class: GenClass::Bivalued { a: q(a), b: q(b) },
                direction: Direction::Chores,
                n: 2,
                t: 1 + ((seed / 3) % 12) as usize,
                deadline: 0,
                seed,
            }
        })
        .collect();
    let bounds = Bounds {
        ef1_max: Some(q(2)),
        mms_max: Some(qr(5, 3)),
        require_complete: true,
        base_rounds_exact_ef1: true,
        ..Default::default()
    };
    let batch =
        run_generated_batch(&specs, AlgorithmKind::BivaluedTwoChores, &opts(bounds)).unwrap();
    assert_eq!(batch.failed, 0, "failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);
    println!(
        "criterion 09 PASS: chores controller kept completeness, EF1<=2, MMS<=5/3, base rounds exact on {} streams",
        batch.total
    );
}

#[test]
fn criterion_10_bivalued_chores_certificates() {
    // EF1 optimum of the case tree at eps = 1/10 is 2/(1+eps) = 20/11,
    // climbing toward 2 as eps shrinks; the worst branch of the witness
    // path costs (1/(2 eps) + 1/2)-EF1.
    let ef1 = game_value_at_epsilon("bivalued_chores", Metric::Ef1, &qr(1, 10)).unwrap();
    assert_eq!(ef1.value, fin(20, 11));
    assert!(!ef1.witness.is_empty());
    let mut last = Ratio::Finite(q(0));
    for e in [qr(1, 5), qr(1, 10), qr(1, 20)] {
        let v = game_value_at_epsilon("bivalued_chores", Metric::Ef1, &e)
            .unwrap()
            .value
            .unwrap();
        assert!(v.cmp_total(&Ratio::Finite(q(2))).is_lt());
        assert!(v.cmp_total(&last).is_gt(), "not climbing toward 2");
        last = v;
    }
    let mms = game_value_at_epsilon("bivalued_chores_mms", Metric::Mms, &qr(1, 10)).unwrap();
    assert_eq!(mms.value, fin(3, 2));
    println!("criterion 10 PASS: chores EF1 optimum 20/11 climbing to 2, share instance exactly 3/2");
}

#[test]
fn criterion_11_remaining_certificates() {
    let eps = qr(1, 10);
    let check = |name: &str, metric: Metric, expected: Ratio| {
        let got = game_value_at_epsilon(name, metric, &eps)
            .unwrap()
            .value
            .unwrap_or_else(|| panic!("{name} had no legal path"));
        assert_eq!(got, expected, "{name} {metric:?}");
    };
    check("trivalued_goods_2", Metric::Ef1, Ratio::Finite(qr(1, 10)));
    // The two-agent write-up reports eps/(1+eps) for the share ratio, but
    // its own n-agent generalization and the exhaustive search both give
    // eps: the witness path parks the third item on the loaded side.
    check("trivalued_goods_2", Metric::Mms, Ratio::Finite(qr(1, 10)));
    check("trivalued_goods_n", Metric::Ef1, Ratio::Finite(qr(1, 10)));
    check("trivalued_goods_n", Metric::Mms, Ratio::Finite(qr(1, 10)));
    check("trivalued_chores_2", Metric::Ef1, Ratio::Finite(q(10)));
    check("trivalued_chores_n", Metric::Ef1, Ratio::Finite(q(10)));
    check("bivalued_goods_usw", Metric::Usw, Ratio::Finite(qr(1, 10)));
    // The fair branch the construction overlooks (seed item kept, the other
    // two across) is exactly EF1 and exact-share, so the best fair welfare
    // share is (1 + eps + eps^2)/3, not eps.
    check("binbi_goods_usw", Metric::Usw, Ratio::Finite(qr(37, 100)));
    check("bivalued_chores_usc", Metric::Usc, Ratio::Finite(q(10)));
    check("binbi_chores_usc", Metric::Usc, Ratio::Finite(q(10)));

    // identical preferences: no path stays exactly EF1
    let goods = game_value_at_epsilon("identical_pref_goods", Metric::Ef1, &eps)
        .unwrap()
        .value
        .unwrap();
    assert_eq!(goods, Ratio::Finite(qr(10, 11)));
    assert!(goods.cmp_total(&Ratio::one()).is_lt());
    let chores = game_value_at_epsilon("identical_pref_chores", Metric::Ef1, &eps)
        .unwrap()
        .value
        .unwrap();
    assert_eq!(chores, Ratio::Finite(qr(20, 11)));
    assert!(chores.cmp_total(&Ratio::one()).is_gt());
    println!("criterion 11 PASS: remaining certificates hold (tri-valued 1/10 and 10, gated welfare 1/10, 37/100, 10, 10, identical preferences 10/11 and 20/11)");
}

#[test]
fn criterion_12_deadline_and_monotone_suites() {
    // deadline-1 pair matching, both directions
    for direction in [Direction::Goods, Direction::Chores] {
        let specs: Vec<GenSpec> = (0..10_000u64)
            .map(|seed| GenSpec {
                class: GenClass::Bivalued { a: q(1), b: q(5) },
                direction,
                n: 2,
                t: 1 + (seed % 12) as usize,
                deadline: 1,
                seed,
            })
            .collect();
        let bounds = if direction.is_goods() {
            Bounds {
                ef1_min: Some(q(1)),
                require_nw: true,
                ..Default::default()
            }
        } else {
            Bounds {
                ef1_max: Some(q(1)),
                require_complete: true,
                ..Default::default()
            }
        };
        let batch =
            run_generated_batch(&specs, AlgorithmKind::DeadlineMatching, &opts(bounds)).unwrap();
        assert_eq!(
            batch.failed, 0,
            "{direction:?} failures: {:?}",
            &batch.failures[..batch.failures.len().min(3)]
        );
    }

    // monotone chores through round robin
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| GenSpec {
            class: GenClass::MonotoneAdditive { max_value: 9 },
            direction: Direction::Chores,
            n: 2 + (seed % 2) as usize,
            t: 1 + ((seed / 2) % 10) as usize,
            deadline: 0,
            seed,
        })
        .collect();
    let bounds = Bounds {
        ef1_max: Some(q(1)),
        require_complete: true,
        ..Default::default()
    };
    let batch = run_generated_batch(&specs, AlgorithmKind::RoundRobin, &opts(bounds)).unwrap();
    assert_eq!(batch.failed, 0, "round robin failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);

    // monotone goods through relaxed marginal greedy
    let specs: Vec<GenSpec> = specs
        .into_iter()
        .map(|s| GenSpec {
            direction: Direction::Goods,
            ..s
        })
        .collect();
    let bounds = Bounds {
        ef1_min: Some(q(1)),
        require_nw: true,
        ..Default::default()
    };
    let batch = run_generated_batch(
        &specs,
        AlgorithmKind::MarginalGreedy { relaxed: true },
        &opts(bounds),
    )
    .unwrap();
    assert_eq!(batch.failed, 0, "greedy failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);
    println!("criterion 12 PASS: deadline flush points and monotone streams stayed exactly EF1 (4x10000 runs)");
}

#[test]
fn criterion_13_oracle_equivalence() {
    use fairstream::valuations::Oracle;
    use rand::{Rng, SeedableRng};

    let results: Vec<Result<(), String>> = (0..10_000u64)
        .map(|seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xFA1F);
            let direction = if rng.gen::<bool>() {
                Direction::Goods
            } else {
                Direction::Chores
            };
            let n = 2 + (seed % 2) as usize;
            let t = 1 + ((seed / 2) % 8) as usize;
            let class = match seed % 5 {
                0 => GenClass::Binary,
                1 => GenClass::Bivalued { a: q(1), b: q(5) },
                2 => GenClass::Trivalued {
                    a: qr(1, 10),
                    b: q(1),
                    z: q(10),
                },
                3 => GenClass::PartitionMatroid { categories: 3 },
                _ => GenClass::MonotoneAdditive { max_value: 6 },
            };
            let stream = fairstream::harness::generate(&GenSpec {
                class,
                direction,
                n,
                t,
                deadline: 0,
                seed,
            });
            let oracle = Oracle::from_stream(&stream);
            let ctx = AuditContext::new(&oracle, Budget::default()).unwrap();
            let mut alloc = fairstream::core::Allocation::empty(direction, n, 0);
            for item in &stream.items {
                let d = if direction.is_goods() && rng.gen_ratio(1, 8) {
                    Decision::Discard
                } else {
                    Decision::assign(rng.gen_range(1..=n))
                };
                alloc = alloc.apply_decision(item.id, d).unwrap();
            }
            let fast_ef1 = ctx.ef1_ratio(&alloc).unwrap();
            let lit_ef1 = oracles::literal_ef1(&alloc, &oracle);
            if fast_ef1 != lit_ef1 {
                return Err(format!("seed {seed}: ef1 {fast_ef1} vs literal {lit_ef1}"));
            }
            let fast_mms = ctx.mms_ratio(&alloc).unwrap();
            let lit_mms = oracles::literal_mms_ratio(&alloc, &oracle);
            if fast_mms != lit_mms {
                return Err(format!("seed {seed}: mms {fast_mms} vs literal {lit_mms}"));
            }
            let fast_w = ctx.welfare_ratio(&alloc).unwrap();
            let lit_w = oracles::literal_welfare_ratio(&alloc, &oracle);
            if fast_w != lit_w {
                return Err(format!("seed {seed}: welfare {fast_w} vs literal {lit_w}"));
            }
            if direction.is_goods() {
                let fast_nw = ctx.check_nw(&alloc).unwrap();
                if fast_nw != oracles::literal_nw(&alloc, &oracle) {
                    return Err(format!("seed {seed}: nw divergence"));
                }
            } else if ctx.check_complete(&alloc) != oracles::literal_complete(&alloc) {
                return Err(format!("seed {seed}: completeness divergence"));
            }
            Ok(())
        })
        .collect();
    let errors: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    assert!(errors.is_empty(), "divergences: {:?}", &errors[..errors.len().min(5)]);
    println!("criterion 13 PASS: audit equals the literal evaluators on 10000 random instances");
}

#[test]
fn criterion_14_nw_existence_and_refutation() {
    // the fixed-order greedy keeps every round non-wasteful on rank streams
    let specs: Vec<GenSpec> = (0..10_000u64)
        .map(|seed| GenSpec {
            class: GenClass::PartitionMatroid { categories: 4 },
            direction: Direction::Goods,
            n: 2 + (seed % 2) as usize,
            t: 1 + ((seed / 2) % 10) as usize,
            deadline: 0,
            seed,
        })
        .collect();
    let bounds = Bounds {
        require_nw: true,
        ..Default::default()
    };
    let batch = run_generated_batch(&specs, AlgorithmKind::GreedyNw, &opts(bounds)).unwrap();
    assert_eq!(batch.failed, 0, "failures: {:?}", &batch.failures[..batch.failures.len().min(3)]);

    // the fixed general-submodular instance admits no non-wasteful play
    let adv = builtin_adversary("claim2_submodular", &qr(1, 10)).unwrap();
    let value = solve_game(adv.as_ref(), &GameQuery::new(Metric::Ef1)).unwrap();
    assert_eq!(value.value, None, "a legal path slipped through");
    println!(
        "criterion 14 PASS: greedy is non-wasteful on {} rank streams; the submodular instance has no legal path",
        batch.total
    );
}
