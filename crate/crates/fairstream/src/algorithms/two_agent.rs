//! Two-agent bi-valued controllers.
//!
//! The base procedure follows the envy graph: when nobody envies, the item
//! goes to whoever rates it at their high level (goods) or low level
//! (chores); under one-sided envy it goes to the agent the envy graph
//! permits. When that assignment would close an envy cycle the controller
//! hands the very item to a cycle-breaking phase (`Pbc`), which either
//! resolves within two rounds or escalates to a deeper case split (`Dbc`)
//! that may run for several two-round beats before handing back. Bundle
//! state is never reset across hand-offs.
//!
//! Invariants maintained (asserted in debug builds):
//! - entering `Pbc`, the triggering item sits at the unenvied agent's low
//!   level and both bundles are non-empty;
//! - entering `Dbc` (goods), the unenvied agent leads by at least her low
//!   level: `v_i(A_i) >= v_i(A_j) + a_i`; mirrored for chores;
//! - whenever the mode is `Base` the allocation is EF1 with no envy cycle.

use super::{AlgorithmError, Allocator, ItemView, StepAction};
use crate::core::{Decision, Direction};
use crate::rational::Q;

/// Controller phase. `Base` rounds carry the exact-EF1 guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerMode {
    Base,
    Pbc,
    Dbc,
}

pub struct TwoAgentController {
    direction: Direction,
    /// `(a, b)` level pair per agent, `a <= b`.
    levels: [(Q, Q); 2],
    /// `val[i][j]` = agent `i+1`'s value/cost of agent `j+1`'s bundle.
    val: [[Q; 2]; 2],
    count: [usize; 2],
    mode: ControllerMode,
    lambda: u8,
    mu: u8,
    /// Roles while breaking a cycle: `i` is the unenvied agent.
    role_i: usize,
    role_j: usize,
}

impl TwoAgentController {
    pub fn new(direction: Direction, levels: [(Q, Q); 2]) -> Self {
        TwoAgentController {
            direction,
            levels,
            val: Default::default(),
            count: [0, 0],
            mode: ControllerMode::Base,
            lambda: 1,
            mu: 0,
            role_i: 1,
            role_j: 2,
        }
    }

    pub fn mode(&self) -> ControllerMode {
        self.mode
    }

    fn is_high(&self, agent: usize, v: &Q) -> bool {
        let (a, b) = &self.levels[agent - 1];
        a != b && v == b
    }

    fn check_level(&self, agent: usize, v: &Q) -> Result<(), AlgorithmError> {
        let (a, b) = &self.levels[agent - 1];
        if v != a && v != b {
            return Err(AlgorithmError::ClassMismatch(format!(
                "agent {agent} revealed {v} outside levels ({a}, {b})"
            )));
        }
        Ok(())
    }

    fn assign(&mut self, agent: usize, row: &[Q]) -> StepAction {
        for viewer in 0..2 {
            self.val[viewer][agent - 1] += row[viewer].clone();
        }
        self.count[agent - 1] += 1;
        StepAction::Decide(Decision::assign(agent))
    }

    /// Does `agent` envy `other` right now?
    fn envies(&self, agent: usize, other: usize) -> bool {
        let own = &self.val[agent - 1][agent - 1];
        let theirs = &self.val[agent - 1][other - 1];
        if self.direction.is_goods() {
            own < theirs
        } else {
            own > theirs
        }
    }

    fn step_base(&mut self, row: &[Q]) -> StepAction {
        let envy1 = self.envies(1, 2);
        let envy2 = self.envies(2, 1);
        debug_assert!(!(envy1 && envy2), "base mode never holds an envy cycle");
        if !envy1 && !envy2 {
            let high1 = self.is_high(1, &row[0]);
            let high2 = self.is_high(2, &row[1]);
            let target = if high1 == high2 {
                1 // same level for both: lowest index
            } else if self.direction.is_goods() {
                if high1 {
                    1
                } else {
                    2
                }
            } else {
                // chores: prefer the agent who rates it low
                if high1 {
                    2
                } else {
                    1
                }
            };
            return self.assign(target, row);
        }
        if self.direction.is_goods() {
            // i is the envier (nobody envies her), j the envied agent. Giving
            // e to i closes an envy cycle when i would still envy j and j
            // would start envying i.
            let (i, j) = if envy1 { (1, 2) } else { (2, 1) };
            let i_after = &self.val[i - 1][i - 1] + &row[i - 1];
            let j_sees = &self.val[j - 1][i - 1] + &row[j - 1];
            if i_after < self.val[i - 1][j - 1] && self.val[j - 1][j - 1] < j_sees {
                self.enter_pbc(i, j);
                return self.step_pbc(row);
            }
            self.assign(i, row)
        } else {
            // i does not envy; j is the envier. Giving e to i closes a cycle
            // when j would still envy i and i would start envying j.
            let (i, j) = if envy1 { (2, 1) } else { (1, 2) };
            let j_sees = &self.val[j - 1][i - 1] + &row[j - 1];
            let i_after = &self.val[i - 1][i - 1] + &row[i - 1];
            if self.val[j - 1][j - 1] > j_sees && i_after > self.val[i - 1][j - 1] {
                self.enter_pbc(i, j);
                return self.step_pbc(row);
            }
            self.assign(i, row)
        }
    }

    fn enter_pbc(&mut self, i: usize, j: usize) {
        self.mode = ControllerMode::Pbc;
        self.lambda = 1;
        self.mu = 0;
        self.role_i = i;
        self.role_j = j;
        debug_assert!(self.count[i - 1] >= 1 && self.count[j - 1] >= 1);
    }

    fn step_pbc(&mut self, row: &[Q]) -> StepAction {
        let (i, j) = (self.role_i, self.role_j);
        if self.lambda == 1 {
            if self.direction.is_goods() {
                debug_assert!(
                    !self.is_high(i, &row[i - 1]),
                    "cycle trigger is always the unenvied agent's low level"
                );
            } else {
                debug_assert!(!self.is_high(j, &row[j - 1]));
            }
            if self.count[j - 1] == 1 {
                let act = self.assign(j, row);
                self.mode = ControllerMode::Base;
                return act;
            }
            let give_j = if self.direction.is_goods() {
                self.is_high(j, &row[j - 1])
            } else {
                self.is_high(i, &row[i - 1])
            };
            self.lambda = 2;
            if give_j {
                self.mu = 1;
                self.assign(j, row)
            } else {
                self.mu = 2;
                self.assign(i, row)
            }
        } else {
            if self.mu == 1 {
                let act = self.assign(i, row);
                self.mode = ControllerMode::Base;
                return act;
            }
            // mu == 2
            let resolve = if self.direction.is_goods() {
                !self.is_high(i, &row[i - 1])
            } else {
                !self.is_high(j, &row[j - 1])
            };
            if resolve {
                let act = self.assign(j, row);
                self.mode = ControllerMode::Base;
                act
            } else {
                let act = self.assign(i, row);
                self.mode = ControllerMode::Dbc;
                self.lambda = 1;
                self.mu = 0;
                if self.direction.is_goods() {
                    debug_assert!(
                        self.val[i - 1][i - 1]
                            >= &self.val[i - 1][j - 1] + &self.levels[i - 1].0
                    );
                } else {
                    debug_assert!(
                        &self.val[j - 1][j - 1] + &self.levels[j - 1].0
                            <= self.val[j - 1][i - 1]
                    );
                }
                act
            }
        }
    }

    fn step_dbc(&mut self, row: &[Q]) -> StepAction {
        let (i, j) = (self.role_i, self.role_j);
        if self.lambda == 1 {
            self.lambda = 2;
            let (hi, hj) = (self.is_high(i, &row[i - 1]), self.is_high(j, &row[j - 1]));
            if self.direction.is_goods() {
                match (hi, hj) {
                    (false, true) => {
                        self.mu = 1;
                        self.assign(j, row)
                    }
                    (true, true) => {
                        self.mu = 2;
                        self.assign(j, row)
                    }
                    (false, false) => {
                        self.mu = 3;
                        self.assign(j, row)
                    }
                    (true, false) => {
                        self.mu = 4;
                        self.assign(i, row)
                    }
                }
            } else {
                match (hj, hi) {
                    (false, true) => {
                        self.mu = 1;
                        self.assign(j, row)
                    }
                    (true, true) => {
                        self.mu = 2;
                        self.assign(j, row)
                    }
                    (false, false) => {
                        self.mu = 3;
                        self.assign(j, row)
                    }
                    (true, false) => {
                        self.mu = 4;
                        self.assign(i, row)
                    }
                }
            }
        } else {
            match self.mu {
                1 => {
                    let act = self.assign(j, row);
                    self.mode = ControllerMode::Base;
                    act
                }
                2 => {
                    let keep_cycling = if self.direction.is_goods() {
                        self.is_high(i, &row[i - 1])
                    } else {
                        self.is_high(j, &row[j - 1])
                    };
                    if keep_cycling {
                        self.lambda = 1;
                        self.assign(i, row)
                    } else {
                        let act = self.assign(j, row);
                        self.mode = ControllerMode::Base;
                        act
                    }
                }
                3 => {
                    let resolve = if self.direction.is_goods() {
                        self.is_high(j, &row[j - 1])
                    } else {
                        self.is_high(i, &row[i - 1])
                    };
                    if resolve {
                        let act = self.assign(j, row);
                        self.mode = ControllerMode::Base;
                        act
                    } else {
                        self.lambda = 1;
                        self.assign(i, row)
                    }
                }
                _ => {
                    self.lambda = 1;
                    self.assign(j, row)
                }
            }
        }
    }
}

impl Allocator for TwoAgentController {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError> {
        let row = view.values()?.to_vec();
        self.check_level(1, &row[0])?;
        self.check_level(2, &row[1])?;
        Ok(match self.mode {
            ControllerMode::Base => self.step_base(&row),
            ControllerMode::Pbc => self.step_pbc(&row),
            ControllerMode::Dbc => self.step_dbc(&row),
        })
    }

    fn controller_mode(&self) -> Option<ControllerMode> {
        Some(self.mode)
    }
}
