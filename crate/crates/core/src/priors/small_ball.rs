//! Monte Carlo estimates of `Pr{‖W − w‖_∞ < ε}` for the integrated Brownian
//! motion priors.
//!
//! [`small_ball_prob`] is the plain frequency estimator. Its relative error
//! blows up once the probability drops below roughly `1/reps`, which happens
//! quickly: for Brownian motion the probability at `ε = 0.25` is of order
//! `1e-9`. [`small_ball_splitting`] handles that regime by fixed-effort
//! splitting along the grid: after each time step the particles that left the
//! tube are replaced by copies of survivors, and the estimate is the product of
//! the per-step survival fractions.

use rand::Rng;
use serde::Serialize;

use super::ibm::{PathStepper, ReleasedIbm};
use crate::error::{invalid, Result};
use crate::stats::Proportion;
use crate::wavelet::GridFunction;

/// Crude Monte Carlo estimate at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallBall {
    pub eps: f64,
    pub proportion: Proportion,
    /// No draw fell inside the ball; the interval is `[0, upper]`.
    pub degenerate: bool,
}

fn check_center(process: &ReleasedIbm, center: &GridFunction) -> Result<()> {
    if center.level() != process.grid_level() {
        return invalid(format!(
            "center has level {} but the process is sampled at level {}",
            center.level(),
            process.grid_level()
        ));
    }
    Ok(())
}

fn sup_distance(path: &GridFunction, center: &GridFunction) -> f64 {
    path.values()
        .iter()
        .zip(center.values())
        .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

pub fn small_ball_prob<R: Rng + ?Sized>(
    process: &ReleasedIbm,
    center: &GridFunction,
    eps: f64,
    reps: u64,
    rng: &mut R,
) -> Result<SmallBall> {
    Ok(small_ball_curve(process, center, &[eps], reps, rng)?.remove(0))
}

/// Estimates at several radii from one shared set of draws, so the curve is
/// monotone in `eps`.
pub fn small_ball_curve<R: Rng + ?Sized>(
    process: &ReleasedIbm,
    center: &GridFunction,
    eps_list: &[f64],
    reps: u64,
    rng: &mut R,
) -> Result<Vec<SmallBall>> {
    if reps < 100 {
        return invalid(format!("need at least 100 replicates, got {reps}"));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0)) {
        return invalid(format!("radius must be positive, got {e}"));
    }
    check_center(process, center)?;
    let dists: Vec<f64> = (0..reps)
        .map(|_| sup_distance(&process.sample(rng), center))
        .collect();
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let hits = dists.iter().filter(|d| **d < eps).count() as u64;
            SmallBall {
                eps,
                proportion: Proportion::new(hits, reps),
                degenerate: hits == 0,
            }
        })
        .collect())
}

/// Splitting estimate of a small-ball probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingEstimate {
    pub eps: f64,
    pub particles: usize,
    pub estimate: f64,
    /// `ln(estimate)`; `-inf` when the particle system died out.
    pub log_estimate: f64,
    /// Approximate standard error of `log_estimate`, `sqrt(Σ (1 − p_i) / (N p_i))`.
    pub log_std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub degenerate: bool,
}

pub fn small_ball_splitting<R: Rng + ?Sized>(
    process: &ReleasedIbm,
    center: &GridFunction,
    eps: f64,
    particles: usize,
    rng: &mut R,
) -> Result<SplittingEstimate> {
    if particles < 100 {
        return invalid(format!("need at least 100 particles, got {particles}"));
    }
    if !(eps > 0.0) {
        return invalid(format!("radius must be positive, got {eps}"));
    }
    check_center(process, center)?;
    let target = center.values();
    let n = particles as f64;
    let mut swarm: Vec<PathStepper> = (0..particles)
        .map(|_| PathStepper::new(process, rng))
        .collect();
    let mut log_p = 0.0f64;
    let mut rel_var = 0.0;
    for (i, &c) in target.iter().enumerate() {
        if i > 0 {
            swarm.iter_mut().for_each(|p| p.advance(rng));
        }
        let alive: Vec<usize> = (0..particles)
            .filter(|&k| (swarm[k].value() - c).abs() < eps)
            .collect();
        if alive.is_empty() {
            return Ok(SplittingEstimate {
                eps,
                particles,
                estimate: 0.0,
                log_estimate: f64::NEG_INFINITY,
                log_std_error: f64::INFINITY,
                lower: 0.0,
                // survival so far times the Wilson bound for the stage that died
                upper: log_p.exp() * Proportion::new(0, particles as u64).upper,
                degenerate: true,
            });
        }
        let p = alive.len() as f64 / n;
        log_p += p.ln();
        rel_var += (1.0 - p) / (n * p);
        if alive.len() < particles {
            let next: Vec<PathStepper> = (0..particles)
                .map(|_| swarm[alive[rng.random_range(0..alive.len())]].clone())
                .collect();
            swarm = next;
        }
    }
    let se = rel_var.sqrt();
    let z = 1.959963984540054;
    Ok(SplittingEstimate {
        eps,
        particles,
        estimate: log_p.exp(),
        log_estimate: log_p,
        log_std_error: se,
        lower: (log_p - z * se).exp(),
        upper: (log_p + z * se).exp().min(1.0),
        degenerate: false,
    })
}
