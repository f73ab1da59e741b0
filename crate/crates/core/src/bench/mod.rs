//! Experiment harness: synthetic benchmark generation, contact-network
//! datasets, suite execution, and summary reports.

pub mod config;
pub mod dataset;
pub mod generate;
pub mod report;
pub mod suite;
pub mod temporal;

use thiserror::Error;

use crate::automata::AutomataError;
use crate::faultyflow::FaultyFlowError;
use crate::oracle::{ModelError, OracleError};
use crate::verify::VerifyError;

pub use config::Settings;
pub use dataset::{Dataset, Example};
pub use generate::{gen_benchmark, loop_fault, BenchConfig, FaultShape, Manifest, OracleSpec};
pub use report::{median, render_csv, render_text, summarize, Summary};
pub use suite::{read_records, run_suite, write_records, RunRecord};
pub use temporal::{contact_dataset, contact_sizes, TemporalNetwork};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    FaultyFlow(#[from] FaultyFlowError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("longest time-respecting walk has {longest} vertices, at least {needed} needed")]
    NetworkTooSmall { longest: usize, needed: usize },
    #[error("could not break a time-respecting walk by replacing one vertex")]
    Unbreakable,
    #[error("{0}: no usable instance after {1} attempts")]
    Rerolls(String, usize),
    #[error("{0}")]
    Invalid(String),
}
