//! Greedy allocators: fixed-order and rotating-priority marginal greedy for
//! goods, the compelled variant for binary-cost chores, and round robin for
//! monotone chores streams.

use num_traits::Zero;

use super::{AlgorithmError, Allocator, ItemView, StepAction};
use crate::core::Decision;
use crate::rational::Q;

/// Scans agents in the fixed order `1..=n` and assigns to the first with a
/// positive marginal; discards otherwise. Keeps every allocation
/// non-wasteful on submodular binary streams.
pub struct GreedyNw {
    n: usize,
}

impl GreedyNw {
    pub fn new(n: usize) -> Self {
        GreedyNw { n }
    }
}

impl Allocator for GreedyNw {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError> {
        for agent in 1..=self.n {
            if view.marginals[agent - 1] > Q::zero() {
                return Ok(StepAction::Decide(Decision::assign(agent)));
            }
        }
        Ok(StepAction::Decide(Decision::Discard))
    }
}

/// Rotating-priority greedy: the first agent in the priority order with a
/// positive marginal takes the item and moves to the back; an item nobody
/// gains from is discarded with the order untouched.
pub struct MarginalGreedy {
    order: Vec<usize>,
}

impl MarginalGreedy {
    pub fn new(n: usize) -> Self {
        MarginalGreedy {
            order: (1..=n).collect(),
        }
    }

    pub fn priority_order(&self) -> &[usize] {
        &self.order
    }
}

impl Allocator for MarginalGreedy {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError> {
        for pos in 0..self.order.len() {
            let agent = self.order[pos];
            if view.marginals[agent - 1] > Q::zero() {
                self.order.remove(pos);
                self.order.push(agent);
                return Ok(StepAction::Decide(Decision::assign(agent)));
            }
        }
        Ok(StepAction::Decide(Decision::Discard))
    }
}

/// Binary-cost chores greedy: a zero-cost agent (first in priority order)
/// absorbs the chore for free and the order is unchanged; otherwise the
/// head of the order takes it and rotates to the back.
pub struct CompelledGreedy {
    order: Vec<usize>,
}

impl CompelledGreedy {
    pub fn new(n: usize) -> Self {
        CompelledGreedy {
            order: (1..=n).collect(),
        }
    }

    pub fn priority_order(&self) -> &[usize] {
        &self.order
    }
}

impl Allocator for CompelledGreedy {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError> {
        let costs = view.values()?;
        for &agent in &self.order {
            if costs[agent - 1].is_zero() {
                return Ok(StepAction::Decide(Decision::assign(agent)));
            }
        }
        let head = self.order.remove(0);
        self.order.push(head);
        Ok(StepAction::Decide(Decision::assign(head)))
    }
}

/// Fixed cycle `1, 2, ..., n, 1, ...` for chores whose cost rows are globally
/// monotone (every agent's column entirely non-decreasing, or entirely
/// non-increasing). The monotonicity declaration is validated as rows arrive.
pub struct RoundRobin {
    n: usize,
    k: u32,
    prev: Option<Vec<Q>>,
    may_increase: bool,
    may_decrease: bool,
}

impl RoundRobin {
    pub fn new(n: usize) -> Self {
        RoundRobin {
            n,
            k: 0,
            prev: None,
            may_increase: true,
            may_decrease: true,
        }
    }
}

impl Allocator for RoundRobin {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError> {
        let costs = view.values()?.to_vec();
        if let Some(prev) = &self.prev {
            if !prev.iter().zip(&costs).all(|(p, c)| p <= c) {
                self.may_increase = false;
            }
            if !prev.iter().zip(&costs).all(|(p, c)| p >= c) {
                self.may_decrease = false;
            }
            if !self.may_increase && !self.may_decrease {
                return Err(AlgorithmError::NotMonotone(format!(
                    "cost row of item {} breaks both orderings",
                    view.id
                )));
            }
        }
        self.prev = Some(costs);
        let agent = (self.k as usize % self.n) + 1;
        self.k += 1;
        Ok(StepAction::Decide(Decision::assign(agent)))
    }
}
