//! Adaptive adversarial item sources and the exhaustive game solver that
//! certifies lower bounds against every deterministic online algorithm.
//!
//! An adversary is a pure function from the decision history to the next
//! revealed item (or a stop). The solver explores every decision path an
//! algorithm could take under the session constraint, evaluates the final
//! allocation's metric, and folds: an algorithm maximizes a goods ratio and
//! minimizes a chores ratio, so the game value is the best end-of-stream
//! guarantee any deterministic algorithm can achieve against that source.
//!
//! Constraint handling follows the end-of-stream convention: a path is legal
//! if its final allocation satisfies the constraint (non-wastefulness for
//! goods); completeness prunes discards outright.

use serde::Serialize;
use thiserror::Error;

use crate::audit::{AuditContext, AuditError, Budget};
use crate::core::{Allocation, Decision, Direction, Payload};
use crate::rational::{Q, Ratio};
use crate::valuations::Oracle;

mod builtins;
mod figures;

pub use builtins::*;
pub use figures::{SubmodbinFairness, SupermodEf1, SupermodMmsUsc};

/// Constraint a legal play must satisfy at the end of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    NonWasteful,
    Complete,
}

/// Metric whose end-of-stream value the game certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ef1,
    Mms,
    Usw,
    Usc,
}

impl Metric {
    pub fn from_name(s: &str) -> Option<Metric> {
        match s {
            "ef1" => Some(Metric::Ef1),
            "mms" => Some(Metric::Mms),
            "usw" => Some(Metric::Usw),
            "usc" => Some(Metric::Usc),
            _ => None,
        }
    }
}

/// Fairness gate for the efficiency-incompatibility certificates: only paths
/// whose final allocation passes the gate count as achieving fairness, and
/// the game value is then the best efficiency ratio among them.
#[derive(Debug, Clone, PartialEq)]
pub enum FairGate {
    /// Goods: some strictly positive EF1 or MMS approximation.
    Positive,
    /// Exact EF1 or exact MMS.
    Satisfied,
    /// Chores: finite EF1 ratio, or MMS ratio strictly below the bound.
    FiniteEf1OrMmsBelow(Q),
    /// Chores: finite EF1 ratio, or exact MMS.
    FiniteEf1OrMmsSatisfied,
}

/// An adaptive item source.
pub trait Adversary: Send + Sync {
    fn name(&self) -> &'static str;
    fn direction(&self) -> Direction;
    fn n_agents(&self) -> usize;
    fn constraint(&self) -> Constraint;

    /// Next item after the given decision history, or `None` to stop. Must
    /// be a pure function of the history.
    fn next(&self, history: &[Decision]) -> Option<Payload>;

    /// Oracle over the items emitted along one play.
    fn oracle(&self, emitted: &[Payload]) -> Oracle {
        oracle_from_payloads(self.direction(), self.n_agents(), emitted)
    }

    /// Declared per-agent valuation classes, used to set up the session a
    /// live target plays.
    fn agent_classes(&self) -> Vec<crate::valuations::ValuationClass>;
}

/// Short session-class label derived from the declared agent classes.
pub fn class_label(classes: &[crate::valuations::ValuationClass]) -> &'static str {
    use crate::valuations::ValuationClass as C;
    if classes.iter().all(|c| matches!(c, C::Binary)) {
        "binary"
    } else if classes.iter().all(|c| matches!(c, C::BiValued(..))) {
        "bivalued"
    } else if classes.iter().all(|c| matches!(c, C::TriValued(..))) {
        "trivalued"
    } else if classes.iter().all(|c| matches!(c, C::SubmodularBinary)) {
        "submodular-binary"
    } else if classes.iter().all(|c| matches!(c, C::SupermodularBinary)) {
        "supermodular-binary"
    } else if classes
        .iter()
        .all(|c| matches!(c, C::Binary | C::BiValued(..)))
    {
        "binary+bivalued"
    } else {
        "general"
    }
}

pub fn oracle_from_payloads(direction: Direction, n: usize, emitted: &[Payload]) -> Oracle {
    let additive = emitted
        .iter()
        .all(|p| matches!(p, Payload::Additive(_)));
    if additive {
        let mut weights = vec![Vec::with_capacity(emitted.len()); n];
        for p in emitted {
            if let Payload::Additive(row) = p {
                for (i, w) in row.iter().enumerate() {
                    weights[i].push(w.clone());
                }
            }
        }
        Oracle::Additive(crate::valuations::AdditiveTable::new(direction, weights))
    } else {
        let mut cats = vec![Vec::with_capacity(emitted.len()); n];
        for p in emitted {
            if let Payload::Categories(row) = p {
                for (i, c) in row.iter().enumerate() {
                    cats[i].push(c.clone());
                }
            }
        }
        if direction.is_goods() {
            Oracle::MatroidRank(crate::valuations::PartitionMatroidRank::new(cats))
        } else {
            Oracle::SupermodularCost(crate::valuations::SupermodularComplementCost::new(cats))
        }
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("unknown adversary `{0}`")]
    UnknownAdversary(String),
    #[error("epsilon must satisfy 0 < eps < 1")]
    BadEpsilon,
    #[error("game tree exceeded {0} explored leaves")]
    BudgetExceeded(u64),
    #[error("metric {0:?} does not apply to this adversary's direction")]
    MetricMismatch(Metric),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

/// Exhaustive value of a game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameValue {
    pub metric: Metric,
    /// `None` when no legal (gate-passing) decision path exists at all.
    pub value: Option<Ratio>,
    /// A decision path attaining the value.
    pub witness: Vec<Decision>,
    pub leaves: u64,
}

pub struct GameQuery {
    pub metric: Metric,
    pub gate: Option<FairGate>,
    pub leaf_budget: u64,
    pub audit_budget: Budget,
}

impl GameQuery {
    pub fn new(metric: Metric) -> Self {
        GameQuery {
            metric,
            gate: None,
            leaf_budget: 1 << 22,
            audit_budget: Budget::default(),
        }
    }

    pub fn with_gate(metric: Metric, gate: FairGate) -> Self {
        GameQuery {
            gate: Some(gate),
            ..GameQuery::new(metric)
        }
    }
}

/// Explores every legal decision path against the adversary and returns the
/// algorithm-optimal end-of-stream metric with a witness path.
pub fn solve_game(adv: &dyn Adversary, query: &GameQuery) -> Result<GameValue, GameError> {
    match (query.metric, adv.direction()) {
        (Metric::Usw, Direction::Chores) | (Metric::Usc, Direction::Goods) => {
            return Err(GameError::MetricMismatch(query.metric))
        }
        _ => {}
    }
    let mut solver = Solver {
        adv,
        query,
        leaves: 0,
    };
    let mut payloads = Vec::new();
    let mut history = Vec::new();
    let best = solver.explore(&mut payloads, &mut history)?;
    Ok(GameValue {
        metric: query.metric,
        value: best.as_ref().map(|(r, _)| r.clone()),
        witness: best.map(|(_, w)| w).unwrap_or_default(),
        leaves: solver.leaves,
    })
}

struct Solver<'a> {
    adv: &'a dyn Adversary,
    query: &'a GameQuery,
    leaves: u64,
}

impl Solver<'_> {
    fn explore(
        &mut self,
        payloads: &mut Vec<Payload>,
        history: &mut Vec<Decision>,
    ) -> Result<Option<(Ratio, Vec<Decision>)>, GameError> {
        match self.adv.next(history) {
            None => {
                self.leaves += 1;
                if self.leaves > self.query.leaf_budget {
                    return Err(GameError::BudgetExceeded(self.query.leaf_budget));
                }
                self.evaluate(payloads, history)
            }
            Some(payload) => {
                payloads.push(payload);
                let n = self.adv.n_agents();
                let mut moves: Vec<Decision> = (1..=n).map(Decision::assign).collect();
                if self.adv.direction().is_goods() {
                    moves.push(Decision::Discard);
                }
                let goods = self.adv.direction().is_goods();
                let mut best: Option<(Ratio, Vec<Decision>)> = None;
                for mv in moves {
                    history.push(mv);
                    let sub = self.explore(payloads, history)?;
                    history.pop();
                    if let Some((r, w)) = sub {
                        best = Some(match best {
                            None => (r, w),
                            Some((br, bw)) => {
                                let replace = if goods {
                                    r.cmp_total(&br).is_gt()
                                } else {
                                    r.cmp_total(&br).is_lt()
                                };
                                if replace {
                                    (r, w)
                                } else {
                                    (br, bw)
                                }
                            }
                        });
                    }
                }
                payloads.pop();
                Ok(best)
            }
        }
    }

    /// Evaluates a finished play: constraint legality, optional fairness
    /// gate, then the queried metric of the final allocation.
    fn evaluate(
        &self,
        payloads: &[Payload],
        history: &[Decision],
    ) -> Result<Option<(Ratio, Vec<Decision>)>, GameError> {
        let n = self.adv.n_agents();
        let direction = self.adv.direction();
        let mut alloc = Allocation::empty(direction, n, 0);
        for (idx, &d) in history.iter().enumerate() {
            alloc = alloc
                .apply_decision(idx as u32 + 1, d)
                .expect("solver plays structurally legal moves");
        }
        let oracle = self.adv.oracle(payloads);
        let ctx = AuditContext::new(&oracle, self.query.audit_budget)?;
        if self.adv.constraint() == Constraint::NonWasteful && !ctx.check_nw(&alloc)? {
            return Ok(None);
        }
        if let Some(gate) = &self.query.gate {
            if !self.gate_passes(gate, &ctx, &alloc)? {
                return Ok(None);
            }
        }
        let value = match self.query.metric {
            Metric::Ef1 => ctx.ef1_ratio(&alloc)?,
            Metric::Mms => ctx.mms_ratio(&alloc)?,
            Metric::Usw | Metric::Usc => ctx.welfare_ratio(&alloc)?,
        };
        Ok(Some((value, history.to_vec())))
    }

    fn gate_passes(
        &self,
        gate: &FairGate,
        ctx: &AuditContext,
        alloc: &Allocation,
    ) -> Result<bool, GameError> {
        let ef1 = ctx.ef1_ratio(alloc)?;
        let mms = ctx.mms_ratio(alloc)?;
        Ok(match gate {
            FairGate::Positive => {
                ef1.cmp_total(&Ratio::zero()).is_gt() || mms.cmp_total(&Ratio::zero()).is_gt()
            }
            FairGate::Satisfied => ef1.is_one() || mms.is_one(),
            FairGate::FiniteEf1OrMmsBelow(bound) => {
                ef1.finite().is_some()
                    || matches!(mms.finite(), Some(m) if m < bound)
            }
            FairGate::FiniteEf1OrMmsSatisfied => ef1.finite().is_some() || mms.is_one(),
        })
    }
}

/// Replays a witness path against the adversary and returns the final
/// allocation together with the oracle over the emitted items.
pub fn replay_witness(adv: &dyn Adversary, witness: &[Decision]) -> (Allocation, Oracle) {
    let mut payloads = Vec::new();
    let mut alloc = Allocation::empty(adv.direction(), adv.n_agents(), 0);
    for (idx, &d) in witness.iter().enumerate() {
        let payload = adv
            .next(&witness[..idx])
            .expect("witness is no longer than the emission sequence");
        payloads.push(payload);
        alloc = alloc.apply_decision(idx as u32 + 1, d).expect("legal witness");
    }
    let oracle = adv.oracle(&payloads);
    (alloc, oracle)
}

/// Serializable game-tree dump (`search --dump-tree`).
#[derive(Debug, Serialize)]
pub struct TreeNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item: Option<Payload>,
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub children: std::collections::BTreeMap<String, TreeNode>,
}

pub fn dump_tree(adv: &dyn Adversary, history: &mut Vec<Decision>) -> TreeNode {
    match adv.next(history) {
        None => TreeNode {
            item: None,
            children: Default::default(),
        },
        Some(payload) => {
            let n = adv.n_agents();
            let mut moves: Vec<(String, Decision)> = (1..=n)
                .map(|i| (format!("assign{i}"), Decision::assign(i)))
                .collect();
            if adv.direction().is_goods() {
                moves.push(("discard".into(), Decision::Discard));
            }
            let mut children = std::collections::BTreeMap::new();
            for (label, mv) in moves {
                history.push(mv);
                children.insert(label, dump_tree(adv, history));
                history.pop();
            }
            TreeNode {
                item: Some(payload),
                children,
            }
        }
    }
}

/// Instantiates a named builtin construction at the given epsilon.
pub fn builtin_adversary(name: &str, eps: &Q) -> Result<Box<dyn Adversary>, GameError> {
    use num_traits::{One, Zero};
    if !(eps > &Q::zero() && eps < &Q::one()) {
        return Err(GameError::BadEpsilon);
    }
    let eps = eps.clone();
    Ok(match name {
        "trivalued_goods_2" => Box::new(TrivaluedGoodsTwo::new(eps)),
        "trivalued_goods_n" => Box::new(TrivaluedGoodsN::new(eps)),
        "submodbin_fairness" => Box::new(SubmodbinFairness::new()),
        "submodbin_usw" => Box::new(SubmodbinUsw::new()),
        "bivalued_goods" => Box::new(BivaluedGoods::new(eps)),
        "bivalued_goods_usw" => Box::new(BivaluedGoodsUsw::new(eps)),
        "binbi_goods_usw" => Box::new(BinbiGoodsUsw::new(eps)),
        "trivalued_chores_2" => Box::new(TrivaluedChoresTwo::new(eps)),
        "trivalued_chores_n" => Box::new(TrivaluedChoresN::new(eps)),
        "supermod_ef1" => Box::new(SupermodEf1::new()),
        "supermod_mms_usc" => Box::new(SupermodMmsUsc::new()),
        "bivalued_chores" => Box::new(BivaluedChores::new(eps)),
        "bivalued_chores_mms" => Box::new(BivaluedChoresMms::new()),
        "bivalued_chores_usc" => Box::new(BivaluedChoresUsc::new(eps)),
        "binbi_chores_usc" => Box::new(BinbiChoresUsc::new(eps)),
        "identical_pref" | "identical_pref_goods" => Box::new(IdenticalPrefGoods::new(eps)),
        "identical_pref_chores" => Box::new(IdenticalPrefChores::new(eps)),
        "claim2_submodular" => Box::new(Claim2Submodular::new()),
        other => return Err(GameError::UnknownAdversary(other.to_string())),
    })
}

/// All builtin adversary names, in a stable order.
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "trivalued_goods_2",
        "trivalued_goods_n",
        "submodbin_fairness",
        "submodbin_usw",
        "bivalued_goods",
        "bivalued_goods_usw",
        "binbi_goods_usw",
        "trivalued_chores_2",
        "trivalued_chores_n",
        "supermod_ef1",
        "supermod_mms_usc",
        "bivalued_chores",
        "bivalued_chores_mms",
        "bivalued_chores_usc",
        "binbi_chores_usc",
        "identical_pref_goods",
        "identical_pref_chores",
        "claim2_submodular",
    ]
}

/// Exact game value of a named construction at a given epsilon.
pub fn game_value_at_epsilon(name: &str, metric: Metric, eps: &Q) -> Result<GameValue, GameError> {
    let adv = builtin_adversary(name, eps)?;
    let gate = builtin_gate(name);
    let query = match gate {
        Some(g) => GameQuery::with_gate(metric, g),
        None => GameQuery::new(metric),
    };
    solve_game(adv.as_ref(), &query)
}

/// The fairness gate a named efficiency-incompatibility construction is
/// certified under, if any.
pub fn builtin_gate(name: &str) -> Option<FairGate> {
    match name {
        "bivalued_goods_usw" => Some(FairGate::Positive),
        "binbi_goods_usw" => Some(FairGate::Satisfied),
        "bivalued_chores_usc" => Some(FairGate::FiniteEf1OrMmsBelow(crate::rational::q(2))),
        "binbi_chores_usc" => Some(FairGate::FiniteEf1OrMmsSatisfied),
        _ => None,
    }
}
