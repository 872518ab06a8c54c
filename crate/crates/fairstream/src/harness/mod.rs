//! Harness: file formats, seeded generation, stream running, reporting, and
//! the external-allocator protocol.

pub mod adversary_play;
pub mod formats;
pub mod generator;
pub mod protocol;
pub mod runner;

pub use adversary_play::{play, PlayError, PlayOutcome, Target};
pub use formats::{
    read_decisions, read_instance, write_decisions, write_instance, FormatError, InstanceHeader,
};
pub use generator::{generate, GenClass, GenSpec};
pub use runner::{
    run_generated_batch, run_stream, write_report_csv, BatchReport, Bounds, Counters, Driver,
    RunError, RunOptions, RunReport, Summary,
};
