//! Log-log slope fits of loss curves against `log(n / log n)`.

use serde::Serialize;

use crate::contraction::ContractionPoint;
use crate::error::{Error, Result};
use crate::space::NormIndex;
use crate::stats::least_squares;

/// Loss quantiles at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: u64,
    pub median: f64,
    pub q90: f64,
    pub mean: f64,
}

/// OLS fit of `log(median loss)` on `log(n / log n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Quadratic coefficient when `(x − x̄)²` is added to the fit, with
    /// `x = log(n / log n)`. Near zero
    /// when the log-log curve is straight; it absorbs unmodelled log factors.
    pub curvature: f64,
    pub per_n: Vec<FitPoint>,
    /// Expected decay exponent; the fitted slope should be close to its negative.
    pub theoretical_exponent: Option<f64>,
}

/// The regressor `log(n / log n)`.
pub fn log_effective_n(n: u64) -> f64 {
    let nf = n as f64;
    (nf / nf.ln()).ln()
}

/// Fits the medians of `points`. Needs at least four distinct `n > 2` and
/// positive medians.
pub fn rate_fit(points: &[FitPoint]) -> Result<RateFit> {
    let mut ns: Vec<u64> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need >= 4 distinct n, got {}",
            ns.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.n < 3 || !(p.median > 0.0)) {
        return Err(Error::InsufficientData(format!(
            "cannot take logs at n = {} (median loss {})",
            p.n, p.median
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| log_effective_n(p.n)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.median.ln()).collect();
    let line = least_squares(&x, &y)?;
    // quadratic coefficient of y on (x, (x − x̄)²), by partialling x out of both
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let sq: Vec<f64> = x.iter().map(|v| (v - mx) * (v - mx)).collect();
    let on_x = least_squares(&x, &sq)?;
    let sq_perp: Vec<f64> = x
        .iter()
        .zip(&sq)
        .map(|(a, b)| b - on_x.intercept - on_x.slope * a)
        .collect();
    let resid: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(a, b)| b - line.intercept - line.slope * a)
        .collect();
    let curvature = least_squares(&sq_perp, &resid)?.slope;
    Ok(RateFit {
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        curvature,
        per_n: points.to_vec(),
        theoretical_exponent: None,
    })
}

/// Fit of the curve points for one norm index.
pub fn fit_curve(points: &[ContractionPoint], r: NormIndex) -> Result<RateFit> {
    let pts: Vec<FitPoint> = points
        .iter()
        .filter(|p| p.r == r)
        .map(|p| FitPoint {
            n: p.n,
            median: p.loss_median,
            q90: p.loss_q90,
            mean: p.loss_mean,
        })
        .collect();
    rate_fit(&pts)
}
