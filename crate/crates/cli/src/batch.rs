//! Batch mode: a JSON array of jobs, run on the worker pool, reported in
//! manifest order. A failing job is recorded inline and never aborts the batch.
//!
//! Job shape: `{"command": "classify", "seed": 7, "input": {…}}`, where
//! `input_file` (relative to the manifest) may replace `input`, and the
//! remaining keys are the per-command options (`tol`, `restarts`,
//! `iterations`, `kind`, `n`, `m`, `samples`).

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::jobs::{self, Command, JobOptions, Raw};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Job {
    command: Command,
    /// Mandatory: heuristic verdicts must be reproducible.
    seed: Option<u64>,
    input: Option<Value>,
    input_file: Option<String>,
    #[serde(flatten)]
    options: JobOptions,
}

#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum JobResult {
    Ok {
        index: usize,
        command: &'static str,
        undetermined: bool,
        result: Value,
    },
    Error {
        index: usize,
        error: String,
    },
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub jobs: usize,
    pub ok: usize,
    pub error: usize,
    pub undetermined: usize,
    pub results: Vec<JobResult>,
}

fn run_job(index: usize, spec: &Value, base: &Path) -> JobResult {
    let attempt = || -> Result<JobResult, String> {
        let job = Job::deserialize(spec).map_err(|e| format!("malformed job: {e}"))?;
        let seed = job.seed.ok_or("every batch job needs a seed")?;
        let text;
        let raw = match (&job.input, &job.input_file) {
            (Some(_), Some(_)) => return Err("give input or input_file, not both".into()),
            (Some(v), None) => Some(Raw::Value(v)),
            (None, Some(f)) => {
                let p = base.join(f);
                text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
                Some(Raw::Text(&text))
            }
            (None, None) => None,
        };
        let out = jobs::execute(job.command, raw.as_ref(), &job.options, seed)?;
        Ok(JobResult::Ok {
            index,
            command: job.command.name(),
            undetermined: out.undetermined,
            result: out.value,
        })
    };
    attempt().unwrap_or_else(|error| JobResult::Error { index, error })
}

pub fn run(manifest: &str, base: &Path) -> Result<Summary, String> {
    let specs: Vec<Value> =
        serde_json::from_str(manifest).map_err(|e| format!("malformed manifest (expected a JSON array of jobs): {e}"))?;
    let results: Vec<JobResult> = specs.par_iter().enumerate().map(|(i, s)| run_job(i, s, base)).collect();
    let error = results.iter().filter(|r| matches!(r, JobResult::Error { .. })).count();
    let undetermined = results
        .iter()
        .filter(|r| matches!(r, JobResult::Ok { undetermined: true, .. }))
        .count();
    Ok(Summary {
        jobs: results.len(),
        ok: results.len() - error,
        error,
        undetermined,
        results,
    })
}
