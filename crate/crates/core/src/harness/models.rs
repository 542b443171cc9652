//! Per-model experiment runners and their output rows.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, Model, NullDensity};
use crate::contraction::{ContractionPoint, CurveSettings};
use crate::density_tests::{
    bump_alternative, calibrate_m0, deviation_draws, error_rates, moment_regime, moment_scale,
    talagrand_envelope, KernelSpec,
};
use crate::error::{Error, Result};
use crate::fit::{fit_curve, RateFit};
use crate::histogram;
use crate::priors::{small_ball_curve, small_ball_splitting, ReleasedIbm};
use crate::rates::{contraction_exponent, minimax_exponent, RateSchedule};
use crate::seed::stream;
use crate::space::{holder_coeff_radius, lr_norm, NormIndex, TestFunction};
use crate::stats::{least_squares, mean, quantile};
use crate::wavelet::GridFunction;
use crate::white_noise::{self, WhiteNoiseSetup};

/// Rows and summary produced by one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Rows,
    pub summary: Value,
}

#[derive(Debug, Clone)]
pub enum Rows {
    Curve(Vec<CurveRow>),
    Test(Vec<TestRow>),
    SmallBall(Vec<SmallBallRow>),
    PriorSample(Vec<PriorSampleRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Self::Curve(v) => v.len(),
            Self::Test(v) => v.len(),
            Self::SmallBall(v) => v.len(),
            Self::PriorSample(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column names in output order.
    pub fn header(model: Model) -> &'static [&'static str] {
        match model {
            Model::WhiteNoise | Model::Histogram => CURVE_HEADER,
            Model::TestPower | Model::MomentCheck => TEST_HEADER,
            Model::SmallBall => SMALL_BALL_HEADER,
            Model::PriorSample => PRIOR_SAMPLE_HEADER,
        }
    }

    pub(crate) fn write<W: std::io::Write>(&self, model: Model, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(Self::header(model))?;
        match self {
            Self::Curve(v) => v.iter().try_for_each(|r| out.serialize(r))?,
            Self::Test(v) => v.iter().try_for_each(|r| out.serialize(r))?,
            Self::SmallBall(v) => v.iter().try_for_each(|r| out.serialize(r))?,
            Self::PriorSample(v) => v.iter().try_for_each(|r| out.serialize(r))?,
        }
        out.flush()?;
        Ok(())
    }
}

pub const CURVE_HEADER: &[&str] = &[
    "model",
    "alpha",
    "r",
    "n",
    "eps_n",
    "delta_n",
    "J_n",
    "gamma_power",
    "level",
    "radius",
    "posterior_prob",
    "loss_mean",
    "loss_median",
    "loss_q90",
    "reps",
    "seed",
];

/// One `(r, n)` cell of a contraction curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub model: &'static str,
    pub alpha: f64,
    pub r: NormIndex,
    pub n: u64,
    pub eps_n: f64,
    pub delta_n: f64,
    #[serde(rename = "J_n")]
    pub j_n: u32,
    pub gamma_power: f64,
    pub level: u32,
    pub radius: f64,
    pub posterior_prob: f64,
    pub loss_mean: f64,
    pub loss_median: f64,
    pub loss_q90: f64,
    pub reps: usize,
    pub seed: u64,
}

pub const TEST_HEADER: &[&str] = &[
    "model",
    "kind",
    "alpha",
    "r",
    "j",
    "n",
    "eps_n",
    "delta_n",
    "J_n",
    "gamma_power",
    "reps",
    "ratio",
    "skipped",
    "q99",
    "U",
    "sigma2",
    "bound",
    "typeI",
    "typeI_lower",
    "typeI_upper",
    "typeII",
    "typeII_lower",
    "typeII_upper",
    "distance",
    "M0",
    "seed",
];

/// Row shared by the test-power and moment-check models; columns that do not
/// apply to a model are left empty.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TestRow {
    pub model: &'static str,
    pub kind: String,
    pub alpha: f64,
    pub r: String,
    pub j: u32,
    pub n: u64,
    pub eps_n: f64,
    pub delta_n: f64,
    #[serde(rename = "J_n")]
    pub j_n: u32,
    pub gamma_power: f64,
    pub reps: usize,
    pub ratio: Option<f64>,
    pub skipped: Option<bool>,
    pub q99: Option<f64>,
    #[serde(rename = "U")]
    pub u: Option<f64>,
    pub sigma2: Option<f64>,
    pub bound: Option<f64>,
    #[serde(rename = "typeI")]
    pub type_i: Option<f64>,
    #[serde(rename = "typeI_lower")]
    pub type_i_lower: Option<f64>,
    #[serde(rename = "typeI_upper")]
    pub type_i_upper: Option<f64>,
    #[serde(rename = "typeII")]
    pub type_ii: Option<f64>,
    #[serde(rename = "typeII_lower")]
    pub type_ii_lower: Option<f64>,
    #[serde(rename = "typeII_upper")]
    pub type_ii_upper: Option<f64>,
    pub distance: Option<f64>,
    #[serde(rename = "M0")]
    pub m0: Option<f64>,
    pub seed: u64,
}

pub const SMALL_BALL_HEADER: &[&str] = &[
    "model",
    "alpha",
    "grid_level",
    "released",
    "eps",
    "reps",
    "crude_estimate",
    "crude_lower",
    "crude_upper",
    "crude_degenerate",
    "split_estimate",
    "split_log_se",
    "split_lower",
    "split_upper",
    "split_degenerate",
    "neg_log",
    "seed",
];

/// Crude and splitting estimates at one radius. `neg_log` is `-ln` of the
/// splitting estimate, empty when that estimate is zero.
#[derive(Debug, Clone, Serialize)]
pub struct SmallBallRow {
    pub model: &'static str,
    pub alpha: f64,
    pub grid_level: u32,
    pub released: bool,
    pub eps: f64,
    pub reps: usize,
    pub crude_estimate: f64,
    pub crude_lower: f64,
    pub crude_upper: f64,
    pub crude_degenerate: bool,
    pub split_estimate: f64,
    pub split_log_se: Option<f64>,
    pub split_lower: f64,
    pub split_upper: f64,
    pub split_degenerate: bool,
    pub neg_log: Option<f64>,
    pub seed: u64,
}

pub const PRIOR_SAMPLE_HEADER: &[&str] = &[
    "model",
    "prior",
    "alpha",
    "draw",
    "sup_norm",
    "min",
    "max",
    "integral",
    "holder_radius",
    "attempts",
    "seed",
];

/// Summary of one prior draw. `integral` refers to the induced density and
/// `holder_radius` to the coefficients; either is empty when absent.
#[derive(Debug, Clone, Serialize)]
pub struct PriorSampleRow {
    pub model: &'static str,
    pub prior: &'static str,
    pub alpha: f64,
    pub draw: usize,
    pub sup_norm: f64,
    pub min: f64,
    pub max: f64,
    pub integral: Option<f64>,
    pub holder_radius: Option<f64>,
    pub attempts: u64,
    pub seed: u64,
}

fn schedules(cfg: &ExperimentConfig) -> Result<Vec<RateSchedule>> {
    let mut out = Vec::new();
    for &r in &cfg.r {
        for &n in &cfg.n_list {
            out.push(RateSchedule::new(
                cfg.alpha,
                r,
                n,
                cfg.gamma_log_power,
                cfg.c_res,
            )?);
        }
    }
    Ok(out)
}

fn schedule_json(s: &[RateSchedule]) -> Value {
    Value::Array(
        s.iter()
            .map(|s| {
                json!({
                    "r": s.r.to_string(),
                    "n": s.n,
                    "eps_n": s.eps_n,
                    "gamma_n": s.gamma_n,
                    "delta_n": s.delta_n,
                    "J_n": s.j_n,
                    "feasibility": s.feasibility(),
                })
            })
            .collect(),
    )
}

fn find_schedule(s: &[RateSchedule], r: NormIndex, n: u64) -> &RateSchedule {
    s.iter()
        .find(|s| s.r == r && s.n == n)
        .expect("schedule for every (r, n)")
}

fn fit_json(fit: Result<RateFit>) -> Value {
    match fit {
        Ok(f) => serde_json::to_value(f).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn truth(cfg: &ExperimentConfig) -> Result<TestFunction> {
    TestFunction::new(cfg.alpha, cfg.bound, cfg.profile)
}

fn null_density(cfg: &ExperimentConfig) -> Result<GridFunction> {
    match cfg.density {
        NullDensity::Uniform => Ok(GridFunction::constant(cfg.grid_level, 1.0)),
        NullDensity::TestFunction => {
            truth(cfg)?.density(cfg.basis, cfg.basis.default_coarse_level(), cfg.grid_level)
        }
    }
}

fn curve_settings(cfg: &ExperimentConfig) -> CurveSettings {
    CurveSettings {
        n_list: cfg.n_list.clone(),
        rs: cfg.r.clone(),
        reps: cfg.reps,
        seed: cfg.seed,
        radius_multiplier: cfg.radius_multiplier,
    }
}

fn curve_output(
    cfg: &ExperimentConfig,
    points: Vec<ContractionPoint>,
    exponent_of: impl Fn(NormIndex) -> f64,
) -> Result<RunOutput> {
    let sched = schedules(cfg)?;
    let mut rows: Vec<CurveRow> = points
        .iter()
        .map(|p| {
            let s = find_schedule(&sched, p.r, p.n);
            CurveRow {
                model: cfg.model.tag(),
                alpha: cfg.alpha,
                r: p.r,
                n: p.n,
                eps_n: s.eps_n,
                delta_n: s.delta_n,
                j_n: s.j_n,
                gamma_power: cfg.gamma_log_power,
                level: p.level,
                radius: p.radius,
                posterior_prob: p.posterior_prob,
                loss_mean: p.loss_mean,
                loss_median: p.loss_median,
                loss_q90: p.loss_q90,
                reps: p.reps,
                seed: cfg.seed,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.r.as_f64().total_cmp(&b.r.as_f64()).then(a.n.cmp(&b.n)));
    let fits: serde_json::Map<String, Value> = cfg
        .r
        .iter()
        .map(|&r| {
            let fit = fit_curve(&points, r).map(|mut f| {
                f.theoretical_exponent = Some(exponent_of(r));
                f
            });
            (r.to_string(), fit_json(fit))
        })
        .collect();
    Ok(RunOutput {
        rows: Rows::Curve(rows),
        summary: json!({
            "theoretical_exponent": exponent_of(cfg.r[0]),
            "fits": fits,
            "schedules": schedule_json(&sched),
        }),
    })
}

fn run_white_noise(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let j0 = cfg.coarse_level().max(1);
    let coeffs = truth(cfg)?.coeffs(cfg.basis, j0, cfg.grid_level)?;
    let setup = WhiteNoiseSetup::new(coeffs, cfg.alpha, cfg.c_res, cfg.truncation_extra)?;
    let points = white_noise::contraction_curve(&setup, &curve_settings(cfg))?;
    let alpha = cfg.alpha;
    curve_output(cfg, points, |_| minimax_exponent(alpha))
}

fn run_histogram(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p0 = truth(cfg)?.density(cfg.basis, cfg.basis.default_coarse_level(), cfg.grid_level)?;
    let points = histogram::contraction_curve(&p0, cfg.alpha, &curve_settings(cfg))?;
    let alpha = cfg.alpha;
    curve_output(cfg, points, |r| contraction_exponent(alpha, r))
}

fn test_row(cfg: &ExperimentConfig, s: &RateSchedule, j: u32) -> TestRow {
    TestRow {
        model: cfg.model.tag(),
        kind: cfg.kernel.to_string(),
        alpha: cfg.alpha,
        r: s.r.to_string(),
        j,
        n: s.n,
        eps_n: s.eps_n,
        delta_n: s.delta_n,
        j_n: s.j_n,
        gamma_power: cfg.gamma_log_power,
        reps: cfg.reps,
        seed: cfg.seed,
        ..TestRow::default()
    }
}

fn run_test_power(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p0 = null_density(cfg)?;
    let sched = schedules(cfg)?;
    let cal_reps = cfg.calibration_reps.unwrap_or(cfg.reps);
    let mut rows = Vec::new();
    let mut m0s = serde_json::Map::new();
    for &r in &cfg.r {
        // calibrated once, at the smallest sample size
        let first = find_schedule(&sched, r, cfg.n_list[0]);
        let m0 = calibrate_m0(&p0, r, first, cfg.kernel, cal_reps, cfg.quantile, cfg.seed)?;
        m0s.insert(r.to_string(), json!(m0));
        for &n in &cfg.n_list {
            let s = find_schedule(&sched, r, n);
            let cell = (1usize << s.j_n) / 3;
            let alt = bump_alternative(&p0, cfg.distance_multiplier * s.delta_n, s.j_n, cell)?;
            let rep = error_rates(&p0, &alt, r, s, cfg.kernel, m0, cfg.reps, cfg.seed)?;
            rows.push(TestRow {
                type_i: Some(rep.type_i.estimate),
                type_i_lower: Some(rep.type_i.lower),
                type_i_upper: Some(rep.type_i.upper),
                type_ii: Some(rep.type_ii.estimate),
                type_ii_lower: Some(rep.type_ii.lower),
                type_ii_upper: Some(rep.type_ii.upper),
                distance: Some(rep.distance),
                m0: Some(m0),
                ..test_row(cfg, s, s.j_n)
            });
        }
    }
    Ok(RunOutput {
        rows: Rows::Test(rows),
        summary: json!({
            "theoretical_exponent": Value::Null,
            "M0": m0s,
            "calibration_reps": cal_reps,
            "quantile": cfg.quantile,
            "schedules": schedule_json(&sched),
        }),
    })
}

fn run_moment_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p0 = null_density(cfg)?;
    let sched = schedules(cfg)?;
    let x = 100f64.ln();
    let mut rows = Vec::new();
    for &r in &cfg.r {
        let p0_norm = lr_norm(&p0, r);
        for &j in &cfg.j_list {
            let spec = KernelSpec::new(cfg.kernel, j)?;
            for &n in &cfg.n_list {
                let s = find_schedule(&sched, r, n);
                let draws =
                    deviation_draws(&p0, r, spec, n, cfg.reps, cfg.seed ^ ((j as u64) << 48))?;
                let in_regime = moment_regime(j, n, r);
                let env = talagrand_envelope(spec, r, p0_norm, n, x)?;
                rows.push(TestRow {
                    ratio: in_regime.then(|| mean(&draws) / moment_scale(j, n, r)),
                    skipped: Some(!in_regime),
                    q99: Some(quantile(&draws, 0.99)),
                    u: Some(env.u),
                    sigma2: Some(env.sigma2),
                    bound: Some(env.bound),
                    ..test_row(cfg, s, j)
                });
            }
        }
    }
    let summary: serde_json::Map<String, Value> = cfg
        .r
        .iter()
        .map(|r| {
            let key = r.to_string();
            let mine: Vec<&TestRow> = rows.iter().filter(|row| row.r == key).collect();
            let ratios: Vec<f64> = mine.iter().filter_map(|row| row.ratio).collect();
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let below = mine.iter().filter(|row| row.q99 <= row.bound).count();
            let v = json!({
                "cells": ratios.len(),
                "ratio_min": (!ratios.is_empty()).then_some(lo),
                "ratio_max": (!ratios.is_empty()).then_some(hi),
                "ratio_spread": (!ratios.is_empty()).then(|| hi / lo),
                "envelope_holds": below,
                "envelope_cells": mine.len(),
            });
            (key, v)
        })
        .collect();
    Ok(RunOutput {
        rows: Rows::Test(rows),
        summary: json!({
            "theoretical_exponent": Value::Null,
            "per_r": summary,
            "schedules": schedule_json(&sched),
        }),
    })
}

fn run_small_ball(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let process = ReleasedIbm::new(cfg.alpha, cfg.grid_level, cfg.released)?;
    let center = GridFunction::zeros(cfg.grid_level);
    let tag = cfg.model.tag();
    let crude = small_ball_curve(
        &process,
        &center,
        &cfg.eps_list,
        cfg.reps as u64,
        &mut stream(cfg.seed, tag, 0, 0),
    )?;
    let split: Vec<_> = cfg
        .eps_list
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mut rng = stream(cfg.seed, tag, 1, i as u64);
            small_ball_splitting(&process, &center, eps, cfg.reps, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SmallBallRow> = crude
        .iter()
        .zip(&split)
        .map(|(c, s)| SmallBallRow {
            model: tag,
            alpha: cfg.alpha,
            grid_level: cfg.grid_level,
            released: cfg.released,
            eps: c.eps,
            reps: cfg.reps,
            crude_estimate: c.proportion.estimate,
            crude_lower: c.proportion.lower,
            crude_upper: c.proportion.upper,
            crude_degenerate: c.degenerate,
            split_estimate: s.estimate,
            split_log_se: s.log_std_error.is_finite().then_some(s.log_std_error),
            split_lower: s.lower,
            split_upper: s.upper,
            split_degenerate: s.degenerate,
            neg_log: (!s.degenerate).then(|| -s.log_estimate),
            seed: cfg.seed,
        })
        .collect();
    rows.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.neg_log.map(|v| (r.eps.powf(-1.0 / cfg.alpha), v)))
        .unzip();
    let fit = match least_squares(&x, &y) {
        Ok(f) => serde_json::to_value(f)?,
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(RunOutput {
        rows: Rows::SmallBall(rows),
        summary: json!({
            "theoretical_exponent": Value::Null,
            "regressor": "eps^(-1/alpha)",
            "neg_log_fit": fit,
        }),
    })
}

fn run_prior_sample(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = cfg.prior_spec()?;
    let tag = cfg.model.tag();
    let rows: Vec<PriorSampleRow> = (0..cfg.reps)
        .into_par_iter()
        .map(|i| {
            let draw = spec.sample(&mut stream(cfg.seed, tag, 0, i as u64))?;
            let holder_radius = match &draw.coeffs {
                Some(c) => Some(holder_coeff_radius(c, cfg.alpha)?),
                None => None,
            };
            Ok(PriorSampleRow {
                model: tag,
                prior: spec.name(),
                alpha: cfg.alpha,
                draw: i,
                sup_norm: draw.function.max_abs(),
                min: draw.function.min(),
                max: draw.function.max(),
                integral: draw.density.as_ref().map(GridFunction::integral),
                holder_radius,
                attempts: draw.attempts,
                seed: cfg.seed,
            })
        })
        .collect::<Result<_>>()?;
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_norm).collect();
    Ok(RunOutput {
        summary: json!({
            "theoretical_exponent": Value::Null,
            "prior": spec.name(),
            "sup_norm_median": quantile(&sups, 0.5),
            "sup_norm_q90": quantile(&sups, 0.9),
            "attempts_mean": mean(&rows.iter().map(|r| r.attempts as f64).collect::<Vec<_>>()),
        }),
        rows: Rows::PriorSample(rows),
    })
}

/// Runs the configured model in the current rayon pool.
pub fn run_model(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.model {
        Model::WhiteNoise => run_white_noise(cfg),
        Model::Histogram => run_histogram(cfg),
        Model::TestPower => run_test_power(cfg),
        Model::MomentCheck => run_moment_check(cfg),
        Model::SmallBall => run_small_ball(cfg),
        Model::PriorSample => run_prior_sample(cfg),
    }
    .map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    })
}
