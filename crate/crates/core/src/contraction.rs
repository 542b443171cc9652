//! Shared bookkeeping for Monte Carlo contraction curves.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::space::NormIndex;
use crate::stats::{mean, quantile_sorted};

/// Loss summary for one `(n, r)` cell of a contraction curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionPoint {
    pub n: u64,
    pub r: NormIndex,
    /// Resolution level used for this `n` (prior truncation or histogram level).
    pub level: u32,
    pub reps: usize,
    pub radius: f64,
    /// Fraction of replicates with loss above `radius`.
    pub posterior_prob: f64,
    pub loss_mean: f64,
    pub loss_median: f64,
    pub loss_q90: f64,
}

pub fn summarize(
    n: u64,
    r: NormIndex,
    level: u32,
    radius: f64,
    losses: &[f64],
) -> ContractionPoint {
    let mut sorted = losses.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    ContractionPoint {
        n,
        r,
        level,
        reps: losses.len(),
        radius,
        posterior_prob: losses.iter().filter(|l| **l > radius).count() as f64 / losses.len() as f64,
        loss_mean: mean(losses),
        loss_median: quantile_sorted(&sorted, 0.5),
        loss_q90: quantile_sorted(&sorted, 0.9),
    }
}

/// Monte Carlo layout shared by the contraction experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSettings {
    pub n_list: Vec<u64>,
    pub rs: Vec<NormIndex>,
    pub reps: usize,
    pub seed: u64,
    /// Radius is this multiple of the reference rate at each `n`.
    pub radius_multiplier: f64,
}

impl CurveSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.rs.is_empty() {
            return invalid("need at least one sample size and one norm index");
        }
        if let Some(n) = self.n_list.iter().find(|n| **n < 2) {
            return invalid(format!("sample sizes must be >= 2, got {n}"));
        }
        if self.reps == 0 {
            return invalid("need at least one replicate");
        }
        if !(self.radius_multiplier > 0.0) {
            return invalid("radius multiplier must be positive");
        }
        Ok(())
    }
}

/// Evaluates `cell(n, rep)` for every sample size and replicate in parallel,
/// returning results grouped by `n` in input order.
pub fn run_cells<T, F>(n_list: &[u64], reps: usize, cell: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(u64, usize) -> Result<T> + Sync,
{
    let flat: Vec<T> = n_list
        .par_iter()
        .flat_map_iter(|&n| (0..reps).map(move |rep| (n, rep)))
        .map(|(n, rep)| cell(n, rep))
        .collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    Ok(n_list
        .iter()
        .map(|_| it.by_ref().take(reps).collect())
        .collect())
}

/// Turns per-replicate loss vectors (one entry per `r`) into curve points.
pub fn collect_points(
    settings: &CurveSettings,
    per_n: Vec<Vec<Vec<f64>>>,
    level_of: impl Fn(u64) -> u32,
    radius_of: impl Fn(u64, NormIndex) -> Result<f64>,
) -> Result<Vec<ContractionPoint>> {
    let mut out = Vec::new();
    for (&n, reps) in settings.n_list.iter().zip(per_n) {
        for (i, &r) in settings.rs.iter().enumerate() {
            let losses: Vec<f64> = reps.iter().map(|row| row[i]).collect();
            out.push(summarize(n, r, level_of(n), radius_of(n, r)?, &losses));
        }
    }
    Ok(out)
}
