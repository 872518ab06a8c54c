//! JSONL instance and decision-trace formats.
//!
//! An instance file is one header object followed by one object per item.
//! Rationals are `"p/q"` strings throughout; category labels are strings
//! with `null` marking a loop. Decision traces are one decision object per
//! line, identical to the wire protocol's client messages.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Category, CoreError, Decision, Direction, Item, Payload, Representation, Stream};
use crate::rational::{format_q, parse_q, ParseRationalError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Rational {
        line: usize,
        source: ParseRationalError,
    },
    #[error("line {line}: item needs exactly one of `values` or `categories`")]
    AmbiguousItem { line: usize },
    #[error("missing header line")]
    MissingHeader,
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceHeader {
    pub direction: Direction,
    pub n: usize,
    pub representation: Representation,
    #[serde(default)]
    pub deadline: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<Category>>,
}

/// Parses a JSONL instance.
pub fn read_instance<R: BufRead>(reader: R) -> Result<Stream, FormatError> {
    let mut header: Option<InstanceHeader> = None;
    let mut items = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(
                serde_json::from_str(&line).map_err(|source| FormatError::Json {
                    line: lineno,
                    source,
                })?,
            );
            continue;
        }
        let record: ItemRecord =
            serde_json::from_str(&line).map_err(|source| FormatError::Json {
                line: lineno,
                source,
            })?;
        let payload = match (record.values, record.categories) {
            (Some(values), None) => {
                let row = values
                    .iter()
                    .map(|s| parse_q(s))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|source| FormatError::Rational {
                        line: lineno,
                        source,
                    })?;
                Payload::Additive(row)
            }
            (None, Some(cats)) => Payload::Categories(cats),
            _ => return Err(FormatError::AmbiguousItem { line: lineno }),
        };
        items.push(Item {
            id: items.len() as u32 + 1,
            payload,
        });
    }
    let header = header.ok_or(FormatError::MissingHeader)?;
    Ok(Stream::new(
        header.direction,
        header.n,
        header.representation,
        header.deadline,
        items,
    )?)
}

/// Writes a stream as a JSONL instance (byte-stable for a fixed stream).
pub fn write_instance<W: Write>(
    stream: &Stream,
    class: Option<&str>,
    mut writer: W,
) -> Result<(), FormatError> {
    let header = InstanceHeader {
        direction: stream.direction,
        n: stream.n,
        representation: stream.representation,
        deadline: stream.deadline,
        class: class.map(str::to_owned),
    };
    writeln!(writer, "{}", serde_json::to_string(&header).unwrap())?;
    for item in &stream.items {
        let record = match &item.payload {
            Payload::Additive(row) => ItemRecord {
                values: Some(row.iter().map(format_q).collect()),
                categories: None,
            },
            Payload::Categories(cats) => ItemRecord {
                values: None,
                categories: Some(cats.clone()),
            },
        };
        writeln!(writer, "{}", serde_json::to_string(&record).unwrap())?;
    }
    Ok(())
}

/// Parses a JSONL decision trace.
pub fn read_decisions<R: BufRead>(reader: R) -> Result<Vec<Decision>, FormatError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| FormatError::Json {
                line: idx + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

pub fn write_decisions<W: Write>(decisions: &[Decision], mut writer: W) -> Result<(), FormatError> {
    for d in decisions {
        writeln!(writer, "{}", serde_json::to_string(d).unwrap())?;
    }
    Ok(())
}
