//! Seeded random instance generation, one stream per (spec, seed) pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core::{Direction, Item, Payload, Representation, Stream};
use crate::rational::{q, Q};

/// Valuation class of a generated stream.
#[derive(Debug, Clone, PartialEq)]
pub enum GenClass {
    /// Per-item values in {0, 1}.
    Binary,
    /// Per-item values in {a, b} for every agent.
    Bivalued { a: Q, b: Q },
    /// Per-item values in {a, b, z}.
    Trivalued { a: Q, b: Q, z: Q },
    /// Category rows over `categories` labels per agent (rank valuations for
    /// goods, complement costs for chores).
    PartitionMatroid { categories: usize },
    /// Agents `1..n-1` binary (identical when `identical`), agent `n`
    /// bi-valued with levels {a, b}.
    BinaryPlusBivalued { a: Q, b: Q, identical: bool },
    /// General additive rows sorted so every agent's column is monotone in
    /// one shared direction.
    MonotoneAdditive { max_value: i64 },
}

impl GenClass {
    pub fn label(&self) -> &'static str {
        match self {
            GenClass::Binary => "binary",
            GenClass::Bivalued { .. } => "bivalued",
            GenClass::Trivalued { .. } => "trivalued",
            GenClass::PartitionMatroid { .. } => "partition-matroid",
            GenClass::BinaryPlusBivalued { .. } => "binary+bivalued",
            GenClass::MonotoneAdditive { .. } => "monotone",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub class: GenClass,
    pub direction: Direction,
    pub n: usize,
    pub t: usize,
    pub deadline: u8,
    pub seed: u64,
}

/// Deterministically generates the stream a spec describes.
pub fn generate(spec: &GenSpec) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let t = spec.t;
    let (representation, rows): (Representation, Vec<Payload>) = match &spec.class {
        GenClass::Binary => (
            Representation::Additive,
            (0..t)
                .map(|_| Payload::Additive((0..n).map(|_| q(rng.gen_range(0..=1))).collect()))
                .collect(),
        ),
        GenClass::Bivalued { a, b } => (
            Representation::Additive,
            (0..t)
                .map(|_| {
                    Payload::Additive(
                        (0..n)
                            .map(|_| if rng.gen::<bool>() { a.clone() } else { b.clone() })
                            .collect(),
                    )
                })
                .collect(),
        ),
        GenClass::Trivalued { a, b, z } => (
            Representation::Additive,
            (0..t)
                .map(|_| {
                    Payload::Additive(
                        (0..n)
                            .map(|_| match rng.gen_range(0..3) {
                                0 => a.clone(),
                                1 => b.clone(),
                                _ => z.clone(),
                            })
                            .collect(),
                    )
                })
                .collect(),
        ),
        GenClass::PartitionMatroid { categories } => (
            Representation::Matroid,
            (0..t)
                .map(|_| {
                    Payload::Categories(
                        (0..n)
                            .map(|_| Some(format!("c{}", rng.gen_range(0..*categories))))
                            .collect(),
                    )
                })
                .collect(),
        ),
        GenClass::BinaryPlusBivalued { a, b, identical } => (
            Representation::Additive,
            (0..t)
                .map(|_| {
                    let shared = q(rng.gen_range(0..=1));
                    let mut row: Vec<Q> = (0..n - 1)
                        .map(|_| {
                            if *identical {
                                shared.clone()
                            } else {
                                q(rng.gen_range(0..=1))
                            }
                        })
                        .collect();
                    row.push(if rng.gen::<bool>() { a.clone() } else { b.clone() });
                    Payload::Additive(row)
                })
                .collect(),
        ),
        GenClass::MonotoneAdditive { max_value } => {
            let ascending = rng.gen::<bool>();
            let mut columns: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..t).map(|_| rng.gen_range(0..=*max_value)).collect())
                .collect();
            for col in &mut columns {
                col.sort_unstable();
                if !ascending {
                    col.reverse();
                }
            }
            (
                Representation::Additive,
                (0..t)
                    .map(|k| Payload::Additive((0..n).map(|i| q(columns[i][k])).collect()))
                    .collect(),
            )
        }
    };
    let items = rows
        .into_iter()
        .enumerate()
        .map(|(idx, payload)| Item {
            id: idx as u32 + 1,
            payload,
        })
        .collect();
    Stream::new(spec.direction, n, representation, spec.deadline, items)
        .expect("generated streams are structurally valid")
}
