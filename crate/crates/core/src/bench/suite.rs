//! Running verification algorithms over a manifest, one record per run.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Settings;
use super::generate::Manifest;
use super::BenchError;
use crate::faultyflow::{detect, FaultyFlowReport};
use crate::sampling::derive_seed;
use crate::verify::{self, Algorithm, Outcome, RunStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub spec: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub epsilon: f64,
    pub gamma: f64,
    #[serde(default)]
    pub outcome: Option<Outcome>,
    /// The counterexample spelled with the alphabet's letters.
    #[serde(default)]
    pub counterexample: Option<Vec<String>>,
    #[serde(default)]
    pub stats: Option<RunStats>,
    #[serde(default)]
    pub faulty_flow: Option<FaultyFlowReport>,
    #[serde(default)]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn found_counterexample(&self) -> bool {
        matches!(self.outcome, Some(Outcome::CounterexampleFound { .. }))
    }
}

struct Job {
    instance: usize,
    spec: usize,
    algorithm: Algorithm,
}

/// Runs `algorithms` on every (instance, spec) pair of the manifest.
///
/// Runs execute in parallel, each with its own freshly loaded oracle so query
/// counts stay per run. A failing or panicking run yields a record with
/// `error` set. Records are written as JSON lines to a temporary file that
/// replaces `out` once complete.
pub fn run_suite(
    manifest: &Manifest,
    algorithms: &[Algorithm],
    settings: &Settings,
    seed: u64,
    out: Option<&Path>,
) -> Result<Vec<RunRecord>, BenchError> {
    let mut jobs = Vec::new();
    for (i, entry) in manifest.instances.iter().enumerate() {
        for spec in 0..entry.specs.len() {
            for &algorithm in algorithms {
                jobs.push(Job {
                    instance: i,
                    spec,
                    algorithm,
                });
            }
        }
    }
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .enumerate()
        .map(|(r, job)| {
            let run_seed = derive_seed(seed, r as u64);
            let mut record = RunRecord {
                instance: manifest.instances[job.instance].id.clone(),
                spec: job.spec,
                algorithm: job.algorithm,
                seed: run_seed,
                epsilon: settings.verify.epsilon,
                gamma: settings.verify.gamma,
                outcome: None,
                counterexample: None,
                stats: None,
                faulty_flow: None,
                error: None,
            };
            let result = catch_unwind(AssertUnwindSafe(|| {
                execute(manifest, job, settings, run_seed, &mut record)
            }));
            match result {
                Ok(Ok(())) => {}
                Ok(Err(e)) => record.error = Some(e.to_string()),
                Err(panic) => {
                    let msg = panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "unknown panic".into());
                    record.error = Some(format!("panic: {msg}"));
                }
            }
            record
        })
        .collect();
    if let Some(out) = out {
        write_records(&records, out)?;
    }
    Ok(records)
}

fn execute(
    manifest: &Manifest,
    job: &Job,
    settings: &Settings,
    seed: u64,
    record: &mut RunRecord,
) -> Result<(), BenchError> {
    let inst = manifest.instantiate(job.instance)?;
    let spec = &inst.specs[job.spec];
    let params = settings.verify_params(spec.alphabet().len(), seed)?;
    let verdict = verify::run(job.algorithm, inst.oracle.as_ref(), spec, &params)?;
    if let Some(w) = verdict.counterexample() {
        record.counterexample = Some(spec.alphabet().spell(w));
        if job.algorithm == Algorithm::Pdv && settings.faulty_flow.enabled {
            if let Some(hyp) = &verdict.hypothesis {
                let cfg = settings.faulty_flow.flow_config();
                record.faulty_flow = Some(detect(inst.oracle.as_ref(), spec, hyp, w, &cfg)?);
            }
        }
    }
    record.outcome = Some(verdict.outcome);
    record.stats = Some(verdict.stats);
    Ok(())
}

pub fn write_records(records: &[RunRecord], out: &Path) -> Result<(), BenchError> {
    let tmp = out.with_extension("tmp");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        for r in records {
            serde_json::to_writer(&mut f, r)?;
            f.write_all(b"\n")?;
        }
        f.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    std::fs::rename(&tmp, out)?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, BenchError> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}
