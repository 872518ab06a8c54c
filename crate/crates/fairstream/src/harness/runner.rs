//! Streams items through an allocator (or a scripted decision trace), audits
//! every settled round, and folds the per-round metrics into a run report.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algorithms::{
    build_allocator, AlgorithmError, AlgorithmKind, Allocator, ItemView, StepAction,
};
use crate::audit::{AuditContext, AuditError, Budget, RoundMetrics};
use crate::core::{Allocation, CoreError, Decision, Direction, Payload, Stream};
use crate::harness::generator::{generate, GenSpec};
use crate::rational::{Q, Ratio};
use crate::valuations::{Oracle, ValuationError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("decision trace ended before item {0}")]
    MissingDecision(u32),
}

/// Assertions a run is checked against; failures land in
/// `RunReport::violations` and flip the CLI exit code.
#[derive(Debug, Default, Clone)]
pub struct Bounds {
    pub ef1_min: Option<Q>,
    pub mms_min: Option<Q>,
    pub welfare_min: Option<Q>,
    pub ef1_max: Option<Q>,
    pub mms_max: Option<Q>,
    pub welfare_max: Option<Q>,
    pub require_nw: bool,
    pub require_complete: bool,
    /// Every round whose controller mode is `Base` must be exactly EF1.
    pub base_rounds_exact_ef1: bool,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub budget: Budget,
    pub bounds: Bounds,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            budget: Budget::from_env(),
            bounds: Bounds::default(),
            timings: false,
        }
    }
}

/// Decision source for one run.
pub enum Driver<'a> {
    Algorithm(AlgorithmKind),
    /// Replays a recorded or overriding decision trace.
    Scripted(&'a [Decision]),
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub ef1: Ratio,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mms: Option<Ratio>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub welfare: Option<Ratio>,
    pub mms_skipped_rounds: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nw_all: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete_all: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counters {
    pub enumerated: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub direction: Direction,
    pub n: usize,
    pub rounds: Vec<RoundMetrics>,
    /// Controller mode after each audited round, when the allocator has one.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<String>,
    pub summary: Summary,
    pub violations: Vec<String>,
    pub counters: Counters,
    /// Decisions actually taken, in arrival order (holds included).
    pub decisions: Vec<Decision>,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs one stream end to end.
pub fn run_stream(
    stream: &Stream,
    driver: Driver<'_>,
    opts: &RunOptions,
) -> Result<RunReport, RunError> {
    let started = std::time::Instant::now();
    let oracle = Oracle::from_stream(stream);
    let ctx = AuditContext::new(&oracle, opts.budget)?;
    let mut allocator: Option<Box<dyn Allocator>> = None;
    let (label, script): (String, Option<&[Decision]>) = match driver {
        Driver::Algorithm(kind) => {
            allocator = Some(build_allocator(kind, &oracle, stream.deadline)?);
            (kind.name().to_string(), None)
        }
        Driver::Scripted(ds) => ("scripted".to_string(), Some(ds)),
    };

    let mut alloc = Allocation::empty(stream.direction, stream.n, stream.deadline);
    let mut rounds = Vec::new();
    let mut modes = Vec::new();
    let mut decisions = Vec::new();
    // Trace cursor for scripted runs. While a hold is pending, the next
    // trace line releases the held item, and the line after that decides the
    // arriving one (the wire protocol uses the same convention).
    let mut cursor = 0usize;
    let take_line = |cursor: &mut usize, id: u32| -> Result<Decision, RunError> {
        let ds = script.expect("cursor used only in scripted mode");
        let d = *ds.get(*cursor).ok_or(RunError::MissingDecision(id))?;
        *cursor += 1;
        Ok(d)
    };

    for item in stream.items.iter() {
        let marginals: Vec<Q> = (1..=stream.n)
            .map(|i| oracle.marginal(i, alloc.bundle(i), item.id))
            .collect::<Result<_, _>>()?;
        let values = match &item.payload {
            Payload::Additive(row) => Some(row.clone()),
            Payload::Categories(_) => None,
        };
        let view = ItemView {
            id: item.id,
            values,
            marginals,
        };
        let action = match &mut allocator {
            Some(a) => a.step(&view)?,
            None => {
                if alloc.held.is_some() {
                    let flush = take_line(&mut cursor, item.id)?;
                    let Decision::Assign { agent } = flush else {
                        return Err(RunError::Core(CoreError::IllegalDecision(
                            "a pending hold must be released by an assignment".into(),
                        )));
                    };
                    match take_line(&mut cursor, item.id)? {
                        Decision::Assign { agent: next } => StepAction::FlushPair {
                            held_to: agent,
                            new_to: next,
                        },
                        _ => {
                            return Err(RunError::Core(CoreError::IllegalDecision(
                                "the item arriving at a flush must be assigned".into(),
                            )))
                        }
                    }
                } else {
                    StepAction::Decide(take_line(&mut cursor, item.id)?)
                }
            }
        };
        match action {
            StepAction::Decide(d) => {
                decisions.push(d);
                alloc = alloc.apply_decision(item.id, d)?;
            }
            StepAction::FlushPair { held_to, new_to } => {
                decisions.push(Decision::assign(held_to));
                decisions.push(Decision::assign(new_to));
                alloc = alloc
                    .flush_held(held_to)?
                    .apply_decision(item.id, Decision::assign(new_to))?;
            }
        }
        debug_assert!(alloc.conservation_holds());
        if alloc.held.is_none() {
            rounds.push(ctx.round_metrics(&alloc)?);
            if let Some(a) = &allocator {
                if let Some(mode) = a.controller_mode() {
                    modes.push(format!("{mode:?}"));
                }
            }
        }
    }
    let trailing_flush = match &mut allocator {
        Some(a) => a.finish()?,
        None if alloc.held.is_some() => match take_line(&mut cursor, stream.len() as u32 + 1) {
            Ok(Decision::Assign { agent }) => Some(agent),
            _ => None,
        },
        None => None,
    };
    if let Some(agent) = trailing_flush {
        decisions.push(Decision::assign(agent));
        alloc = alloc.flush_held(agent)?;
        rounds.push(ctx.round_metrics(&alloc)?);
        if let Some(a) = &allocator {
            if let Some(mode) = a.controller_mode() {
                modes.push(format!("{mode:?}"));
            }
        }
    }

    let summary = summarize(stream.direction, &rounds);
    let violations = check_bounds(stream.direction, &opts.bounds, &rounds, &modes, &summary);
    Ok(RunReport {
        algorithm: label,
        direction: stream.direction,
        n: stream.n,
        rounds,
        modes,
        summary,
        violations,
        counters: Counters {
            enumerated: ctx.enumerated(),
            wall_ms: opts
                .timings
                .then(|| started.elapsed().as_millis() as u64),
        },
        decisions,
    })
}

fn fold(direction: Direction, values: impl Iterator<Item = Ratio>) -> Option<Ratio> {
    values.reduce(|a, b| {
        if direction.is_goods() {
            Ratio::min_of(a, b)
        } else {
            Ratio::max_of(a, b)
        }
    })
}

fn summarize(direction: Direction, rounds: &[RoundMetrics]) -> Summary {
    let ef1 = fold(direction, rounds.iter().map(|r| r.ef1.clone())).unwrap_or_else(Ratio::one);
    let mms = fold(
        direction,
        rounds.iter().filter_map(|r| r.mms.clone()),
    );
    let welfare = fold(
        direction,
        rounds.iter().filter_map(|r| r.welfare.clone()),
    );
    let mms_skipped_rounds = rounds.iter().filter(|r| r.mms.is_none()).count() as u32;
    let nw_all = direction
        .is_goods()
        .then(|| rounds.iter().all(|r| r.nw_ok == Some(true)));
    let complete_all = (!direction.is_goods())
        .then(|| rounds.iter().all(|r| r.complete_ok == Some(true)));
    Summary {
        ef1,
        mms,
        welfare,
        mms_skipped_rounds,
        nw_all,
        complete_all,
    }
}

fn check_bounds(
    direction: Direction,
    bounds: &Bounds,
    rounds: &[RoundMetrics],
    modes: &[String],
    summary: &Summary,
) -> Vec<String> {
    let mut out = Vec::new();
    let below = |r: &Ratio, bound: &Q| matches!(r.finite(), Some(x) if x < bound);
    let above = |r: &Ratio, bound: &Q| match r {
        Ratio::Infinite => true,
        Ratio::Finite(x) => x > bound,
    };
    if let Some(b) = &bounds.ef1_min {
        if below(&summary.ef1, b) {
            out.push(format!("ef1 {} fell below {}", summary.ef1, b));
        }
    }
    if let Some(b) = &bounds.ef1_max {
        if above(&summary.ef1, b) {
            out.push(format!("ef1 {} exceeded {}", summary.ef1, b));
        }
    }
    if let Some(b) = &bounds.mms_min {
        match &summary.mms {
            Some(m) if !below(m, b) => {}
            Some(m) => out.push(format!("mms {m} fell below {b}")),
            None => {}
        }
    }
    if let Some(b) = &bounds.mms_max {
        if let Some(m) = &summary.mms {
            if above(m, b) {
                out.push(format!("mms {m} exceeded {b}"));
            }
        }
    }
    if let Some(b) = &bounds.welfare_min {
        if let Some(w) = &summary.welfare {
            if below(w, b) {
                out.push(format!("welfare {w} fell below {b}"));
            }
        }
    }
    if let Some(b) = &bounds.welfare_max {
        if let Some(w) = &summary.welfare {
            if above(w, b) {
                out.push(format!("welfare {w} exceeded {b}"));
            }
        }
    }
    if bounds.require_nw && summary.nw_all == Some(false) {
        out.push("a round violated non-wastefulness".into());
    }
    if bounds.require_complete && summary.complete_all == Some(false) {
        out.push("a round violated completeness".into());
    }
    if bounds.base_rounds_exact_ef1 && !modes.is_empty() {
        for (r, mode) in rounds.iter().zip(modes) {
            if mode == "Base" && !r.ef1.is_one() {
                out.push(format!("base-mode round {} has ef1 {}", r.round, r.ef1));
            }
        }
    }
    let _ = direction;
    out
}

/// Batch outcome over seeded generated streams.
#[derive(Debug, Serialize)]
pub struct BatchReport {
    pub total: usize,
    pub failed: usize,
    /// (seed, violations) for every failing run, in seed order.
    pub failures: Vec<(u64, Vec<String>)>,
}

/// Runs an algorithm over many generated streams in parallel, aggregating
/// deterministically in seed order.
pub fn run_generated_batch(
    specs: &[GenSpec],
    kind: AlgorithmKind,
    opts: &RunOptions,
) -> Result<BatchReport, RunError> {
    let results: Vec<(u64, Result<RunReport, RunError>)> = specs
        .par_iter()
        .map(|spec| {
            let stream = generate(spec);
            (spec.seed, run_stream(&stream, Driver::Algorithm(kind), opts))
        })
        .collect();
    let mut failures = Vec::new();
    for (seed, result) in results {
        let report = result?;
        if !report.ok() {
            failures.push((seed, report.violations));
        }
    }
    Ok(BatchReport {
        total: specs.len(),
        failed: failures.len(),
        failures,
    })
}

/// CSV rows for a report (one line per audited round).
pub fn write_report_csv<W: std::io::Write>(
    report: &RunReport,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "round,ef1,ef1_raw,mms,mms_raw,welfare,nw_ok,complete_ok")?;
    for r in &report.rounds {
        let opt = |x: &Option<Ratio>| x.as_ref().map(|v| v.to_string()).unwrap_or_default();
        let optb = |x: &Option<bool>| x.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.round,
            r.ef1,
            r.ef1_raw,
            opt(&r.mms),
            opt(&r.mms_raw),
            opt(&r.welfare),
            optb(&r.nw_ok),
            optb(&r.complete_ok),
        )?;
    }
    Ok(())
}
