//! fairstream: a streaming engine for online fair allocation.
//!
//! Items arrive one by one, each revealing its values (goods) or costs
//! (chores) to a fixed set of agents; an allocator makes an immediate,
//! irrevocable decision per item. This crate provides:
//!
//! - the domain model ([`core`]): streams, decisions, allocations;
//! - valuation oracles ([`valuations`]): additive tables and
//!   partition-matroid rank functions (with their supermodular complement
//!   costs), all over exact rationals;
//! - exact per-round audits ([`audit`]): EF1 and share ratios, welfare
//!   against brute-force optima, and the non-wastefulness / completeness
//!   constraints;
//! - the online allocators ([`algorithms`]): greedy, rotating-priority
//!   greedy, two-agent envy-cycle controllers, picking rules, round robin,
//!   and deadline-1 pair matching;
//! - adaptive adversaries with an exhaustive game solver ([`adversaries`])
//!   certifying lower bounds against every deterministic algorithm;
//! - a harness ([`harness`]) with JSONL formats, seeded generators, batch
//!   runs, and a line protocol for external allocators.

pub mod adversaries;
pub mod algorithms;
pub mod audit;
pub mod core;
pub mod harness;
pub mod rational;
pub mod valuations;

pub use crate::core::{Allocation, Decision, Direction, Item, ItemId, Payload, Stream};
pub use crate::rational::{Q, Ratio};
pub use crate::valuations::{Oracle, Valuation, ValuationClass};
