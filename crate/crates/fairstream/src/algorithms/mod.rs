//! Online allocators behind one streaming interface.
//!
//! Every allocator is a state machine: `step` maps an arriving item's
//! revealed row (plus its marginals against the current bundles) to an
//! irrevocable decision. Deadline-1 variants buffer one item and place the
//! pair together; `finish` releases an odd trailing item.

use thiserror::Error;

use crate::core::{AgentId, Decision, Direction, ItemId};
use crate::rational::Q;
use crate::valuations::{Oracle, ValuationClass, ValuationError};

mod deadline;
mod greedy;
mod picking;
mod two_agent;

pub use deadline::DeadlineMatching;
pub use greedy::{CompelledGreedy, GreedyNw, MarginalGreedy, RoundRobin};
pub use picking::{AdaptedChoresPicking, AdaptedPicking};
pub use two_agent::{ControllerMode, TwoAgentController};

#[derive(Debug, Error, PartialEq)]
pub enum AlgorithmError {
    #[error("valuation class mismatch: {0}")]
    ClassMismatch(String),
    #[error("algorithm requires {expected} agents, stream has {got}")]
    WrongAgentCount { expected: usize, got: usize },
    #[error("algorithm requires deadline {expected}, stream declares {got}")]
    DeadlineUnsupported { expected: u8, got: u8 },
    #[error("stream is not monotone: {0}")]
    NotMonotone(String),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("allocator state error: {0}")]
    Internal(String),
}

/// What an allocator sees when an item arrives: the revealed row (additive
/// streams only) and the per-agent marginals against current bundles.
#[derive(Debug, Clone)]
pub struct ItemView {
    pub id: ItemId,
    pub values: Option<Vec<Q>>,
    pub marginals: Vec<Q>,
}

impl ItemView {
    pub fn values(&self) -> Result<&[Q], AlgorithmError> {
        self.values
            .as_deref()
            .ok_or_else(|| AlgorithmError::ClassMismatch("additive value row required".into()))
    }
}

/// One step's outcome. `FlushPair` places the buffered item and the arriving
/// item in the same round (deadline-1 machines only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAction {
    Decide(Decision),
    FlushPair { held_to: AgentId, new_to: AgentId },
}

pub trait Allocator {
    fn step(&mut self, view: &ItemView) -> Result<StepAction, AlgorithmError>;

    /// End-of-stream flush; returns the recipient of a still-held item.
    fn finish(&mut self) -> Result<Option<AgentId>, AlgorithmError> {
        Ok(None)
    }

    /// Controller phase, for the two-agent machines.
    fn controller_mode(&self) -> Option<ControllerMode> {
        None
    }
}

/// Allocator selector used by the harness and CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    GreedyNw,
    MarginalGreedy { relaxed: bool },
    BivaluedTwoGoods,
    AdaptedPicking,
    CompelledGreedy,
    BivaluedTwoChores,
    AdaptedChoresPicking,
    DeadlineMatching,
    RoundRobin,
}

impl AlgorithmKind {
    pub fn from_name(name: &str, relaxed: bool) -> Option<Self> {
        match name {
            "greedy_nw" => Some(AlgorithmKind::GreedyNw),
            "marginal_greedy" => Some(AlgorithmKind::MarginalGreedy { relaxed }),
            "bivalued_two_goods" => Some(AlgorithmKind::BivaluedTwoGoods),
            "adapted_picking" => Some(AlgorithmKind::AdaptedPicking),
            "compelled_greedy" => Some(AlgorithmKind::CompelledGreedy),
            "bivalued_two_chores" => Some(AlgorithmKind::BivaluedTwoChores),
            "adapted_chores_picking" => Some(AlgorithmKind::AdaptedChoresPicking),
            "deadline_matching" => Some(AlgorithmKind::DeadlineMatching),
            "round_robin" => Some(AlgorithmKind::RoundRobin),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::GreedyNw => "greedy_nw",
            AlgorithmKind::MarginalGreedy { .. } => "marginal_greedy",
            AlgorithmKind::BivaluedTwoGoods => "bivalued_two_goods",
            AlgorithmKind::AdaptedPicking => "adapted_picking",
            AlgorithmKind::CompelledGreedy => "compelled_greedy",
            AlgorithmKind::BivaluedTwoChores => "bivalued_two_chores",
            AlgorithmKind::AdaptedChoresPicking => "adapted_chores_picking",
            AlgorithmKind::DeadlineMatching => "deadline_matching",
            AlgorithmKind::RoundRobin => "round_robin",
        }
    }
}

fn require_direction(oracle: &Oracle, dir: Direction, name: &str) -> Result<(), AlgorithmError> {
    if oracle.direction() != dir {
        return Err(AlgorithmError::ClassMismatch(format!(
            "{name} handles {:?} streams only",
            dir
        )));
    }
    Ok(())
}

fn binary_marginals_ok(class: &ValuationClass) -> bool {
    matches!(
        class,
        ValuationClass::Binary | ValuationClass::SubmodularBinary | ValuationClass::SupermodularBinary
    )
}

/// Instantiates an allocator from per-agent valuation classes (the session
/// descriptor used when the oracle is revealed incrementally).
pub fn build_from_classes(
    kind: AlgorithmKind,
    direction: Direction,
    deadline: u8,
    classes: &[ValuationClass],
) -> Result<Box<dyn Allocator>, AlgorithmError> {
    let n = classes.len();
    let want = |dir: Direction, name: &str| -> Result<(), AlgorithmError> {
        if direction != dir {
            return Err(AlgorithmError::ClassMismatch(format!(
                "{name} handles {dir:?} streams only"
            )));
        }
        Ok(())
    };
    let levels_of = |i: usize| -> Result<(Q, Q), AlgorithmError> {
        match &classes[i - 1] {
            ValuationClass::BiValued(a, b) => Ok((a.clone(), b.clone())),
            other => Err(AlgorithmError::ClassMismatch(format!(
                "agent {i} must be bi-valued, found {other:?}"
            ))),
        }
    };
    if kind != AlgorithmKind::DeadlineMatching && deadline != 0 {
        return Err(AlgorithmError::DeadlineUnsupported {
            expected: 0,
            got: deadline,
        });
    }
    match kind {
        AlgorithmKind::GreedyNw => {
            want(Direction::Goods, "greedy_nw")?;
            for (i, c) in classes.iter().enumerate() {
                if !binary_marginals_ok(c) {
                    return Err(AlgorithmError::ClassMismatch(format!(
                        "greedy_nw requires binary marginals for agent {}",
                        i + 1
                    )));
                }
            }
            Ok(Box::new(GreedyNw::new(n)))
        }
        AlgorithmKind::MarginalGreedy { relaxed } => {
            want(Direction::Goods, "marginal_greedy")?;
            if !relaxed {
                for (i, c) in classes.iter().enumerate() {
                    if !binary_marginals_ok(c) {
                        return Err(AlgorithmError::ClassMismatch(format!(
                            "marginal_greedy requires binary marginals for agent {}",
                            i + 1
                        )));
                    }
                }
            }
            Ok(Box::new(MarginalGreedy::new(n)))
        }
        AlgorithmKind::BivaluedTwoGoods | AlgorithmKind::BivaluedTwoChores => {
            let dir = if kind == AlgorithmKind::BivaluedTwoGoods {
                Direction::Goods
            } else {
                Direction::Chores
            };
            want(dir, kind.name())?;
            if n != 2 {
                return Err(AlgorithmError::WrongAgentCount { expected: 2, got: n });
            }
            let levels = [levels_of(1)?, levels_of(2)?];
            Ok(Box::new(TwoAgentController::new(dir, levels)))
        }
        AlgorithmKind::AdaptedPicking => {
            want(Direction::Goods, "adapted_picking")?;
            if n < 2 {
                return Err(AlgorithmError::WrongAgentCount { expected: 2, got: n });
            }
            for i in 1..n {
                if classes[i - 1] != ValuationClass::Binary {
                    return Err(AlgorithmError::ClassMismatch(format!(
                        "adapted_picking requires binary valuations for agent {i}"
                    )));
                }
            }
            Ok(Box::new(AdaptedPicking::new(n, levels_of(n)?)))
        }
        AlgorithmKind::AdaptedChoresPicking => {
            want(Direction::Chores, "adapted_chores_picking")?;
            if n < 2 {
                return Err(AlgorithmError::WrongAgentCount { expected: 2, got: n });
            }
            for i in 1..n {
                if classes[i - 1] != ValuationClass::Binary {
                    return Err(AlgorithmError::ClassMismatch(format!(
                        "adapted_chores_picking requires binary costs for agent {i}"
                    )));
                }
            }
            Ok(Box::new(AdaptedChoresPicking::new(n, levels_of(n)?)))
        }
        AlgorithmKind::CompelledGreedy => {
            want(Direction::Chores, "compelled_greedy")?;
            for (i, c) in classes.iter().enumerate() {
                if *c != ValuationClass::Binary {
                    return Err(AlgorithmError::ClassMismatch(format!(
                        "compelled_greedy requires binary costs for agent {}",
                        i + 1
                    )));
                }
            }
            Ok(Box::new(CompelledGreedy::new(n)))
        }
        AlgorithmKind::DeadlineMatching => {
            if n != 2 {
                return Err(AlgorithmError::WrongAgentCount { expected: 2, got: n });
            }
            if deadline != 1 {
                return Err(AlgorithmError::DeadlineUnsupported {
                    expected: 1,
                    got: deadline,
                });
            }
            let levels = [levels_of(1)?, levels_of(2)?];
            Ok(Box::new(DeadlineMatching::new(direction, levels)))
        }
        AlgorithmKind::RoundRobin => {
            want(Direction::Chores, "round_robin")?;
            Ok(Box::new(RoundRobin::new(n)))
        }
    }
}

/// Validates preconditions against a concrete oracle and instantiates the
/// allocator. Adds the checks only an oracle can answer, like the identical
/// binary agents the goods picking algorithm requires.
pub fn build_allocator(
    kind: AlgorithmKind,
    oracle: &Oracle,
    deadline: u8,
) -> Result<Box<dyn Allocator>, AlgorithmError> {
    let n = oracle.n_agents();
    let mut classes = (1..=n)
        .map(|i| oracle.classify(i))
        .collect::<Result<Vec<_>, _>>()?;
    // An all-ones row sits in both the binary and the bi-valued class; the
    // level-driven machines read it as the degenerate pair (1, 1).
    let wants_levels_at = |i: usize| match kind {
        AlgorithmKind::BivaluedTwoGoods
        | AlgorithmKind::BivaluedTwoChores
        | AlgorithmKind::DeadlineMatching => true,
        AlgorithmKind::AdaptedPicking | AlgorithmKind::AdaptedChoresPicking => i == n,
        _ => false,
    };
    if let Oracle::Additive(table) = oracle {
        use num_traits::Zero;
        for i in 1..=n {
            if classes[i - 1] == ValuationClass::Binary
                && wants_levels_at(i)
                && table.weights_of(i).iter().all(|w| !w.is_zero())
            {
                classes[i - 1] = ValuationClass::BiValued(
                    crate::rational::q(1),
                    crate::rational::q(1),
                );
            }
        }
    }
    if kind == AlgorithmKind::AdaptedPicking {
        require_direction(oracle, Direction::Goods, "adapted_picking")?;
        let Oracle::Additive(table) = oracle else {
            return Err(AlgorithmError::ClassMismatch(
                "adapted_picking requires additive valuations".into(),
            ));
        };
        for i in 2..n {
            if table.weights_of(i) != table.weights_of(1) {
                return Err(AlgorithmError::ClassMismatch(
                    "adapted_picking requires identical binary agents".into(),
                ));
            }
        }
    }
    build_from_classes(kind, oracle.direction(), deadline, &classes)
}
