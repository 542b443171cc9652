//! Config-driven experiment runs with CSV and JSON output.

mod config;
mod models;

pub use config::{
    parse_j_list, parse_n_list, prior_config_pairs, ExperimentConfig, Model, NullDensity,
};
pub use models::{
    run_model, CurveRow, PriorSampleRow, Rows, RunOutput, SmallBallRow, TestRow, CURVE_HEADER,
    PRIOR_SAMPLE_HEADER, SMALL_BALL_HEADER, TEST_HEADER,
};

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fit::{rate_fit, FitPoint, RateFit};

/// Environment variable consulted for the worker count.
pub const WORKERS_ENV: &str = "CONTRACTLAB_WORKERS";

/// Process exit code for an error: 2 for configuration problems, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}

/// Worker count from the command-line flag, then the environment, then the
/// config, then the machine.
pub fn resolve_workers(flag: Option<usize>, cfg: &ExperimentConfig) -> Result<usize> {
    let env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|w| *w > 0)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "{WORKERS_ENV} must be a positive integer, got `{v}`"
                    ))
                })?,
        ),
        Err(_) => None,
    };
    if flag == Some(0) {
        return Err(Error::Config("--workers must be >= 1".into()));
    }
    Ok(flag
        .or(env)
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

/// Files written by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub rows: usize,
}

/// Runs `cfg` on a pool of `workers` threads and writes `<output_path>.csv`
/// and `<output_path>.json`. Output does not depend on the worker count.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<RunFiles> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let out = pool.install(|| run_model(cfg))?;
    write_output(cfg, &out)
}

fn write_output(cfg: &ExperimentConfig, out: &RunOutput) -> Result<RunFiles> {
    let csv_path = cfg.csv_path();
    let json_path = cfg.json_path();
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    out.rows
        .write(cfg.model, BufWriter::new(File::create(&csv_path)?))?;
    let mut summary = json!({
        "model": cfg.model.tag(),
        "config": cfg.echo(),
        "warnings": cfg.warnings(),
        "rows": out.rows.len(),
    });
    if let (Some(doc), Some(extra)) = (summary.as_object_mut(), out.summary.as_object()) {
        doc.extend(extra.clone());
    }
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&json_path, text)?;
    Ok(RunFiles {
        csv: csv_path,
        json: json_path,
        rows: out.rows.len(),
    })
}

#[derive(Debug, Deserialize)]
struct CurveRecord {
    r: String,
    n: u64,
    loss_mean: f64,
    loss_median: f64,
    loss_q90: f64,
}

/// Refits every `r` found in a contraction-curve CSV, in order of appearance.
pub fn fit_csv(path: &Path) -> Result<Vec<(String, RateFit)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if !["r", "n", "loss_median"]
        .iter()
        .all(|h| headers.iter().any(|c| c == *h))
    {
        return Err(Error::Config(format!(
            "{} is not a contraction-curve CSV",
            path.display()
        )));
    }
    let mut groups: Vec<(String, Vec<FitPoint>)> = Vec::new();
    for rec in reader.deserialize() {
        let rec: CurveRecord = rec?;
        let point = FitPoint {
            n: rec.n,
            median: rec.loss_median,
            q90: rec.loss_q90,
            mean: rec.loss_mean,
        };
        match groups.iter_mut().find(|(r, _)| *r == rec.r) {
            Some((_, pts)) => pts.push(point),
            None => groups.push((rec.r, vec![point])),
        }
    }
    groups
        .into_iter()
        .map(|(r, pts)| Ok((r, rate_fit(&pts)?)))
        .collect()
}
