//! CSV and JSON writers. Floats go through `Display`, which is shortest
//! round-trip, so output is byte-stable across runs.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::run::{run, Algorithm, RunConfig, RunOutput};

pub fn csv_path(prefix: &Path) -> PathBuf {
    prefix.with_extension("csv")
}

pub fn json_path(prefix: &Path) -> PathBuf {
    prefix.with_extension("json")
}

fn fmt_db(x: f64) -> String {
    format!("{x}")
}

pub fn run_csv(out: &RunOutput) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "error_db", "wallclock_ns"])?;
    for r in &out.rows {
        w.write_record([
            r.iteration.to_string(),
            fmt_db(r.error_db),
            r.wallclock_ns.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn write_run(prefix: &Path, out: &RunOutput) -> Result<()> {
    write_bytes(&csv_path(prefix), &run_csv(out)?)?;
    write_bytes(&json_path(prefix), &to_json(&out.sidecar)?)
}

/// Runs each algorithm on its own thread and merges the results, ordered by
/// algorithm name.
pub fn compare(algorithms: &[Algorithm], cfg: &RunConfig) -> Result<Vec<(Algorithm, RunOutput)>> {
    let mut names: Vec<Algorithm> = algorithms.to_vec();
    names.sort_by_key(|a| a.name());
    names.dedup();
    let results: Vec<Result<RunOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|&a| s.spawn(move || run(a, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    names
        .into_iter()
        .zip(results)
        .map(|(a, r)| r.with_context(|| format!("running {a}")).map(|o| (a, o)))
        .collect()
}

pub fn compare_csv(results: &[(Algorithm, RunOutput)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["algorithm", "iteration", "error_db", "wallclock_ns"])?;
    for (a, out) in results {
        for r in &out.rows {
            w.write_record([
                a.name().to_string(),
                r.iteration.to_string(),
                fmt_db(r.error_db),
                r.wallclock_ns.to_string(),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

pub fn write_compare(prefix: &Path, results: &[(Algorithm, RunOutput)]) -> Result<()> {
    write_bytes(&csv_path(prefix), &compare_csv(results)?)?;
    let sidecars: Vec<_> = results.iter().map(|(_, o)| &o.sidecar).collect();
    write_bytes(&json_path(prefix), &to_json(&sidecars)?)
}

/// Drops the last CSV column (wall-clock time) from every line.
pub fn strip_wallclock(csv_bytes: &[u8]) -> String {
    String::from_utf8_lossy(csv_bytes)
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}
