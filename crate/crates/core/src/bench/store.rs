//! JSON-lines record store and the parallel run matrix.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::problem::{registry, Problem};
use crate::solvers::{self, Algorithm, RunResult};
use crate::Error;

use super::{problem_seed, sample_points, ExperimentConfig};

/// Environment variable holding the worker count of the run matrix.
pub const THREADS_ENV: &str = "SETOPT_THREADS";

/// One line of the store: a run summary without its trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub point_index: usize,
    pub x0: Vec<f64>,
    #[serde(flatten)]
    pub result: RunResult,
}

impl RunRecord {
    pub fn key(&self) -> (String, Algorithm, usize) {
        (self.result.problem.clone(), self.result.algorithm, self.point_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatrixSummary {
    pub total: usize,
    pub computed: usize,
    pub skipped: usize,
}

/// Worker count from [`THREADS_ENV`]; `None` when unset or invalid.
pub fn threads_from_env() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            log::warn!("ignoring {THREADS_ENV}={raw:?}");
            None
        }
    }
}

/// Reads every complete record of a store. Lines that do not parse (for
/// instance one cut short by a killed run) are skipped with a warning.
pub fn read_store(path: &Path) -> Result<Vec<RunRecord>, Error> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(&line) {
            Ok(r) => out.push(r),
            Err(e) => log::warn!("{}:{}: skipping unreadable record ({e})", path.display(), no + 1),
        }
    }
    Ok(out)
}

fn failed_result(problem: &Problem, algorithm: Algorithm, x0: &[f64], err: &Error) -> RunResult {
    RunResult {
        problem: problem.name().to_string(),
        algorithm,
        converged: false,
        iterations: 0,
        wall_time: 0.0,
        final_point: x0.to_vec(),
        final_t: None,
        final_radius: 0.0,
        mean_step: None,
        error: Some(err.code().to_string()),
        error_message: Some(err.to_string()),
        events: Vec::new(),
        trace: Vec::new(),
    }
}

/// Makes sure appended records start on a fresh line.
fn terminate_last_line(path: &Path) -> Result<(), Error> {
    let mut f = match OpenOptions::new().read(true).append(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let len = f.metadata().map_err(|e| Error::io(path, e))?.len();
    if len == 0 {
        return Ok(());
    }
    let mut last = [0u8; 1];
    f.seek(SeekFrom::Start(len - 1)).map_err(|e| Error::io(path, e))?;
    f.read_exact(&mut last).map_err(|e| Error::io(path, e))?;
    if last[0] != b'\n' {
        f.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Runs every (problem, algorithm, point) combination that the store at
/// `path` does not hold yet and appends the results as they finish.
pub fn run_matrix(config: &ExperimentConfig, path: &Path) -> Result<MatrixSummary, Error> {
    config.validate()?;
    let solver = config.solver_config();
    let mut problems = Vec::with_capacity(config.problem_ids.len());
    for id in &config.problem_ids {
        let p = registry(id)?;
        let cone = config.cone_for(p.m())?;
        problems.push((p, cone));
    }

    let done: HashSet<(String, Algorithm, usize)> = if path.exists() {
        read_store(path)?.iter().map(RunRecord::key).collect()
    } else {
        HashSet::new()
    };

    let mut jobs = Vec::new();
    let mut total = 0;
    for (pi, (p, _)) in problems.iter().enumerate() {
        let points = sample_points(p.bounds(), config.points_per_problem, problem_seed(config.rng_seed, p.name()));
        for (k, x0) in points.into_iter().enumerate() {
            for &alg in &config.algorithms {
                total += 1;
                if !done.contains(&(p.name().to_string(), alg, k)) {
                    jobs.push((pi, k, alg, x0.clone()));
                }
            }
        }
    }
    let summary = MatrixSummary {
        total,
        computed: jobs.len(),
        skipped: total - jobs.len(),
    };
    if jobs.is_empty() {
        return Ok(summary);
    }

    terminate_last_line(path)?;
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let (tx, rx) = mpsc::channel::<RunRecord>();
    let writer_path = path.to_path_buf();
    let writer = std::thread::spawn(move || -> Result<(), Error> {
        let mut out = std::io::BufWriter::new(file);
        for rec in rx {
            let line = serde_json::to_string(&rec).map_err(|e| Error::Json {
                path: writer_path.display().to_string(),
                source: e,
            })?;
            writeln!(out, "{line}").and_then(|_| out.flush()).map_err(|e| Error::io(&writer_path, e))?;
        }
        Ok(())
    });

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads_from_env().unwrap_or(0))
        .build()
        .map_err(|e| Error::Experiment(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        jobs.into_par_iter().for_each_with(tx, |tx, (pi, k, alg, x0)| {
            let (p, cone) = &problems[pi];
            let mut result = solvers::run(alg, p, cone, &x0, &solver, false)
                .unwrap_or_else(|e| failed_result(p, alg, &x0, &e));
            result.trace.clear();
            // The writer only stops early on an I/O error, reported below.
            let _ = tx.send(RunRecord {
                point_index: k,
                x0,
                result,
            });
        });
    });
    writer
        .join()
        .map_err(|_| Error::Experiment("record writer panicked".into()))??;
    Ok(summary)
}
