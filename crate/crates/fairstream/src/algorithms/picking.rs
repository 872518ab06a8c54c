//! Picking allocators for one bi-valued agent alongside binary agents.
//!
//! Agent `n` holds the bi-valued function; agents `1..n-1` are binary. The
//! bi-valued agent gets first refusal on her high-level items and last
//! refusal on her low-level items, throttled by how her countable holdings
//! compare with the smallest binary bundle; zero-valued items route to
//! whoever is indifferent.

use num_traits::Zero;

use super::{AlgorithmError, Allocator, ItemView, StepAction};
use crate::core::Decision;
use crate::rational::Q;

/// Goods variant: agents `1..n-1` share one identical binary valuation.
pub struct AdaptedPicking {
    n: usize,
    /// Bundle sizes of the binary agents.
    sizes: Vec<usize>,
    /// Items in agent n's bundle the binary agents value positively.
    countable: usize,
    levels: (Q, Q),
}

impl AdaptedPicking {
    pub fn new(n: usize, levels: (Q, Q)) -> Self {
        AdaptedPicking {
            n,
            sizes: vec![0; n - 1],
            countable: 0,
            levels,
        }
    }

    fn i_min(&self) -> usize {
        let mut best = 0;
        for (idx, &s) in self.sizes.iter().enumerate() {
            if s < self.sizes[best] {
                best = idx;
            }
        }
        best + 1
    }
}

impl Allocator for AdaptedPicking {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError> {
        let row = view.values()?;
        let i_min = self.i_min();
        let common = &row[i_min - 1]; // identical binary agents
        let target = if common.is_zero() {
            self.n
        } else {
            let high = row[self.n - 1] == self.levels.1 && self.levels.0 != self.levels.1;
            let min_size = self.sizes[i_min - 1];
            if high {
                if self.countable <= min_size {
                    self.n
                } else {
                    i_min
                }
            } else if self.countable >= min_size {
                i_min
            } else {
                self.n
            }
        };
        if target == self.n {
            if !common.is_zero() {
                self.countable += 1;
            }
        } else {
            self.sizes[target - 1] += 1;
        }
        Ok(StepAction::Decide(Decision::assign(target)))
    }
}

/// Chores variant: agents `1..n-1` have binary costs, not necessarily
/// identical; any agent with a zero-cost view absorbs the chore outright.
pub struct AdaptedChoresPicking {
    n: usize,
    /// Count of positive-cost items per binary agent.
    loaded: Vec<usize>,
    /// Size of agent n's bundle.
    size_n: usize,
    levels: (Q, Q),
}

impl AdaptedChoresPicking {
    pub fn new(n: usize, levels: (Q, Q)) -> Self {
        AdaptedChoresPicking {
            n,
            loaded: vec![0; n - 1],
            size_n: 0,
            levels,
        }
    }

    fn i_min(&self) -> usize {
        let mut best = 0;
        for (idx, &s) in self.loaded.iter().enumerate() {
            if s < self.loaded[best] {
                best = idx;
            }
        }
        best + 1
    }
}

impl Allocator for AdaptedChoresPicking {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError> {
        let row = view.values()?;
        if let Some(free) = (1..=self.n).find(|&i| row[i - 1].is_zero()) {
            if free < self.n {
                // zero-cost: her load counter is untouched
            } else {
                self.size_n += 1;
            }
            return Ok(StepAction::Decide(Decision::assign(free)));
        }
        let i_min = self.i_min();
        let low = row[self.n - 1] == self.levels.0;
        let min_loaded = self.loaded[i_min - 1];
        let target = if low {
            if min_loaded >= self.size_n {
                self.n
            } else {
                i_min
            }
        } else if min_loaded <= self.size_n {
            i_min
        } else {
            self.n
        };
        if target == self.n {
            self.size_n += 1;
        } else {
            self.loaded[target - 1] += 1;
        }
        Ok(StepAction::Decide(Decision::assign(target)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn view(id: u32, row: &[i64]) -> ItemView {
        ItemView {
            id,
            values: Some(row.iter().map(|&x| q(x)).collect()),
            marginals: row.iter().map(|&x| q(x)).collect(),
        }
    }

    fn run(alloc: &mut dyn Allocator, rows: &[Vec<i64>]) -> Vec<usize> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| match alloc.step(&view(i as u32 + 1, r)).unwrap() {
                StepAction::Decide(Decision::Assign { agent }) => agent,
                other => panic!("unexpected action {other:?}"),
            })
            .collect()
    }

    #[test]
    fn goods_two_agent_illustration() {
        // agent 1 binary, agent 2 bi-valued (a=2, b=7)
        let mut p = AdaptedPicking::new(2, (q(2), q(7)));
        let picks = run(
            &mut p,
            &[
                vec![1, 2],
                vec![1, 2],
                vec![0, 2],
                vec![1, 7],
                vec![1, 2],
            ],
        );
        assert_eq!(picks, vec![1, 2, 2, 2, 1]);
    }

    #[test]
    fn zero_valued_items_go_to_the_bivalued_agent() {
        let mut p = AdaptedPicking::new(3, (q(1), q(4)));
        let picks = run(&mut p, &[vec![0, 0, 4], vec![0, 0, 1]]);
        assert_eq!(picks, vec![3, 3]);
    }

    #[test]
    fn chores_three_agent_illustration() {
        // agents 1-2 binary, agent 3 bi-valued (a=1, b=9)
        let mut p = AdaptedChoresPicking::new(3, (q(1), q(9)));
        let picks = run(
            &mut p,
            &[
                vec![1, 1, 1],
                vec![0, 1, 1],
                vec![1, 1, 1],
                vec![1, 1, 9],
                vec![1, 1, 9],
            ],
        );
        assert_eq!(picks, vec![3, 1, 1, 2, 1]);
    }

    #[test]
    fn chores_zero_cost_agent_takes_lowest_index() {
        let mut p = AdaptedChoresPicking::new(3, (q(1), q(9)));
        let picks = run(&mut p, &[vec![1, 0, 1]]);
        assert_eq!(picks, vec![2]);
    }
}
