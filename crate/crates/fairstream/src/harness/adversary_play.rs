//! Live play of an adaptive adversary against a builtin allocator or an
//! external process speaking the line protocol.

use std::io::{BufRead, BufReader};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use super::protocol::{
    read_ack, read_decision, validate_decision, CategoriesRound, ProtocolError, SessionHeader,
    ValuesRound,
};
use crate::adversaries::{class_label, Adversary, Constraint};
use crate::algorithms::{build_from_classes, AlgorithmError, AlgorithmKind, ItemView, StepAction};
use crate::audit::{AuditContext, AuditError, Budget};
use crate::core::{Allocation, CoreError, Decision, Payload};
use crate::rational::{Q, Ratio};

#[derive(Debug, Error)]
pub enum PlayError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("failed to launch external allocator: {0}")]
    Spawn(std::io::Error),
}

/// Who plays against the adversary.
pub enum Target<'a> {
    Builtin(AlgorithmKind),
    External {
        command: &'a [String],
        timeout: Duration,
    },
}

/// Final audited state of one adaptive play.
#[derive(Debug, Serialize)]
pub struct PlayOutcome {
    pub adversary: String,
    pub rounds: u32,
    pub decisions: Vec<Decision>,
    pub ef1: Ratio,
    pub mms: Option<Ratio>,
    pub welfare: Option<Ratio>,
    pub constraint_ok: bool,
}

/// Streams the adversary's items into the target and audits the end state.
pub fn play(adv: &dyn Adversary, target: Target<'_>, budget: Budget) -> Result<PlayOutcome, PlayError> {
    let n = adv.n_agents();
    let direction = adv.direction();
    let mut history: Vec<Decision> = Vec::new();
    let mut payloads: Vec<Payload> = Vec::new();
    let mut alloc = Allocation::empty(direction, n, 0);

    let mut session = match target {
        Target::Builtin(kind) => Session::Builtin(build_from_classes(
            kind,
            direction,
            0,
            &adv.agent_classes(),
        )?),
        Target::External { command, timeout } => {
            Session::External(ExternalSession::spawn(command, timeout, adv)?)
        }
    };

    while let Some(payload) = adv.next(&history) {
        payloads.push(payload.clone());
        let id = payloads.len() as u32;
        let oracle = adv.oracle(&payloads);
        let marginals: Vec<Q> = (1..=n)
            .map(|i| oracle.marginal(i, alloc.bundle(i), id))
            .collect::<Result<_, _>>()
            .map_err(AuditError::from)?;
        let decision = session.decide(id, &payload, &marginals, adv)?;
        validate_decision(&decision, direction, n, 0)?;
        alloc = alloc.apply_decision(id, decision)?;
        history.push(decision);
    }

    let oracle = adv.oracle(&payloads);
    let ctx = AuditContext::new(&oracle, budget)?;
    let constraint_ok = match adv.constraint() {
        Constraint::NonWasteful => ctx.check_nw(&alloc)?,
        Constraint::Complete => ctx.check_complete(&alloc),
    };
    let mms = match ctx.mms_ratio(&alloc) {
        Ok(m) => Some(m),
        Err(AuditError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let welfare = match ctx.welfare_ratio(&alloc) {
        Ok(w) => Some(w),
        Err(AuditError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(PlayOutcome {
        adversary: adv.name().to_string(),
        rounds: alloc.round,
        decisions: history,
        ef1: ctx.ef1_ratio(&alloc)?,
        mms,
        welfare,
        constraint_ok,
    })
}

enum Session {
    Builtin(Box<dyn crate::algorithms::Allocator>),
    External(ExternalSession),
}

impl Session {
    fn decide(
        &mut self,
        id: u32,
        payload: &Payload,
        marginals: &[Q],
        adv: &dyn Adversary,
    ) -> Result<Decision, PlayError> {
        match self {
            Session::Builtin(allocator) => {
                let values = match payload {
                    Payload::Additive(row) => Some(row.clone()),
                    Payload::Categories(_) => None,
                };
                let view = ItemView {
                    id,
                    values,
                    marginals: marginals.to_vec(),
                };
                match allocator.step(&view)? {
                    StepAction::Decide(d) => Ok(d),
                    StepAction::FlushPair { .. } => Err(PlayError::Algorithm(
                        AlgorithmError::DeadlineUnsupported { expected: 0, got: 1 },
                    )),
                }
            }
            Session::External(ext) => ext.round(id, payload, marginals, adv),
        }
    }
}

struct ExternalSession {
    child: Child,
    stdin: std::process::ChildStdin,
    lines: mpsc::Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ExternalSession {
    fn spawn(
        command: &[String],
        timeout: Duration,
        adv: &dyn Adversary,
    ) -> Result<Self, PlayError> {
        let mut child = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(PlayError::Spawn)?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut session = ExternalSession {
            child,
            stdin,
            lines: rx,
            timeout,
        };
        let classes = adv.agent_classes();
        let header = SessionHeader {
            direction: adv.direction(),
            n: adv.n_agents(),
            deadline: 0,
            class: class_label(&classes).to_string(),
        };
        super::protocol::write_line(&mut session.stdin, &header)?;
        let mut line = session.recv()?;
        read_ack(&mut line)?;
        Ok(session)
    }

    fn recv(&mut self) -> Result<std::io::Cursor<Vec<u8>>, PlayError> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(std::io::Cursor::new(format!("{line}\n").into_bytes())),
            Ok(Err(e)) => Err(ProtocolError::Io(e).into()),
            Err(mpsc::RecvTimeoutError::Timeout) => {
                Err(ProtocolError::Timeout(self.timeout).into())
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(ProtocolError::Closed.into()),
        }
    }

    fn round(
        &mut self,
        id: u32,
        payload: &Payload,
        marginals: &[Q],
        adv: &dyn Adversary,
    ) -> Result<Decision, PlayError> {
        match payload {
            Payload::Additive(values) => {
                let msg = ValuesRound {
                    round: id,
                    values: values.clone(),
                };
                super::protocol::write_line(&mut self.stdin, &msg)?;
            }
            Payload::Categories(cats) => {
                let msg = CategoriesRound {
                    round: id,
                    categories: cats.clone(),
                    marginals: marginals.to_vec(),
                };
                super::protocol::write_line(&mut self.stdin, &msg)?;
            }
        }
        let mut line = self.recv()?;
        Ok(read_decision(
            &mut line,
            adv.direction(),
            adv.n_agents(),
            0,
        )?)
    }
}

impl Drop for ExternalSession {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
