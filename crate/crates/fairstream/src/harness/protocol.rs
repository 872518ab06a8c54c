//! Newline-delimited JSON protocol for third-party allocators.
//!
//! The server opens with one session header, the client acknowledges, and
//! each round is one server line answered by one client line (two when a
//! pending hold must be released first: the first reply places the held
//! item, the second the arriving one). Rationals travel as `"p/q"` strings;
//! any malformed or illegal reply aborts the session.

use std::io::{BufRead, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Category, Decision, Direction};
use crate::rational::Q;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed client line `{0}`")]
    Malformed(String),
    #[error("client closed the session early")]
    Closed,
    #[error("client reply timed out after {0:?}")]
    Timeout(Duration),
    #[error("illegal reply: {0}")]
    IllegalReply(String),
    #[error("client did not acknowledge the session header")]
    NoAck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionHeader {
    pub direction: Direction,
    pub n: usize,
    pub deadline: u8,
    pub class: String,
}

#[derive(Debug, Serialize)]
pub struct ValuesRound {
    pub round: u32,
    #[serde(with = "crate::rational::q_vec_serde")]
    pub values: Vec<Q>,
}

#[derive(Debug, Serialize)]
pub struct CategoriesRound {
    pub round: u32,
    pub categories: Vec<Category>,
    #[serde(with = "crate::rational::q_vec_serde")]
    pub marginals: Vec<Q>,
}

/// Server line asking the client to release a held item at end of stream.
#[derive(Debug, Serialize)]
pub struct FlushRequest {
    pub flush: bool,
}

#[derive(Debug, Deserialize)]
struct Ack {
    ack: bool,
}

pub fn write_line<W: Write, T: Serialize>(writer: &mut W, msg: &T) -> Result<(), ProtocolError> {
    let line = serde_json::to_string(msg).expect("protocol messages serialize");
    writer.write_all(line.as_bytes())?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn read_ack<R: BufRead>(reader: &mut R) -> Result<(), ProtocolError> {
    let line = read_raw_line(reader)?;
    let ack: Ack = serde_json::from_str(&line).map_err(|_| ProtocolError::Malformed(line))?;
    if !ack.ack {
        return Err(ProtocolError::NoAck);
    }
    Ok(())
}

pub fn read_decision<R: BufRead>(
    reader: &mut R,
    direction: Direction,
    n: usize,
    deadline: u8,
) -> Result<Decision, ProtocolError> {
    let line = read_raw_line(reader)?;
    let decision: Decision =
        serde_json::from_str(&line).map_err(|_| ProtocolError::Malformed(line.clone()))?;
    validate_decision(&decision, direction, n, deadline)?;
    Ok(decision)
}

pub fn validate_decision(
    decision: &Decision,
    direction: Direction,
    n: usize,
    deadline: u8,
) -> Result<(), ProtocolError> {
    match decision {
        Decision::Assign { agent } if *agent >= 1 && *agent <= n => Ok(()),
        Decision::Assign { agent } => Err(ProtocolError::IllegalReply(format!(
            "agent {agent} out of range 1..={n}"
        ))),
        Decision::Discard if direction.is_goods() => Ok(()),
        Decision::Discard => Err(ProtocolError::IllegalReply(
            "chores sessions may not discard".into(),
        )),
        Decision::Hold if deadline == 1 => Ok(()),
        Decision::Hold => Err(ProtocolError::IllegalReply(
            "hold requires a deadline-1 session".into(),
        )),
    }
}

fn read_raw_line<R: BufRead>(reader: &mut R) -> Result<String, ProtocolError> {
    let mut line = String::new();
    let read = reader.read_line(&mut line)?;
    if read == 0 {
        return Err(ProtocolError::Closed);
    }
    Ok(line.trim_end_matches(['\n', '\r']).to_string())
}
