//! Prior samplers: wavelet series with uniform or Gaussian coefficients,
//! Dirichlet dyadic histograms, and released integrated Brownian motion.

mod ibm;
mod series;
mod small_ball;

pub use ibm::{normalize_exp, ReleasedIbm, MIN_ACCEPTANCE, TRIAL_BLOCK};
pub use series::{DiagGaussianPrior, PriorVariances, UniformSeriesPrior};
pub use small_ball::{
    small_ball_curve, small_ball_prob, small_ball_splitting, SmallBall, SplittingEstimate,
};

use rand::Rng;

use crate::error::Result;
use crate::histogram::DirichletHistogram;
use crate::wavelet::{synthesize, GridFunction, WaveletCoeffs};

/// Any of the priors, as configured for a prior-sampling run.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    UniformSeries(UniformSeriesPrior),
    DiagGaussian(DiagGaussianPrior),
    DirichletHistogram {
        level: u32,
    },
    /// Released integrated Brownian motion, conditioned on `‖·‖_∞ <= c` when `c` is set.
    ReleasedIbm {
        process: ReleasedIbm,
        c: Option<f64>,
    },
}

/// One prior draw. `function` is the underlying random function (the series,
/// the histogram, or the Brownian path); `density` is the induced density where
/// the prior is a prior on densities.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorDraw {
    pub function: GridFunction,
    pub density: Option<GridFunction>,
    pub coeffs: Option<WaveletCoeffs>,
    /// Rejection attempts spent on conditioning (1 when unconditioned).
    pub attempts: u64,
}

impl PriorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UniformSeries(_) => "uniform-series",
            Self::DiagGaussian(_) => "diag-gaussian",
            Self::DirichletHistogram { .. } => "dirichlet-histogram",
            Self::ReleasedIbm { .. } => "released-ibm",
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PriorDraw> {
        Ok(match self {
            Self::UniformSeries(p) => {
                let coeffs = p.sample_coeffs(rng);
                let function = synthesize(&coeffs)?;
                let density = normalize_exp(&function);
                PriorDraw {
                    function,
                    density: Some(density),
                    coeffs: Some(coeffs),
                    attempts: 1,
                }
            }
            Self::DiagGaussian(p) => {
                let coeffs = p.sample(rng);
                PriorDraw {
                    function: synthesize(&coeffs)?,
                    density: None,
                    coeffs: Some(coeffs),
                    attempts: 1,
                }
            }
            Self::DirichletHistogram { level } => {
                let h = DirichletHistogram::prior(*level)?.sample_histogram(rng);
                PriorDraw {
                    function: h.clone(),
                    density: Some(h),
                    coeffs: None,
                    attempts: 1,
                }
            }
            Self::ReleasedIbm { process, c } => {
                let (path, attempts) = match c {
                    Some(c) => process.sample_conditioned(*c, rng)?,
                    None => (process.sample(rng), 1),
                };
                let density = normalize_exp(&path);
                PriorDraw {
                    function: path,
                    density: Some(density),
                    coeffs: None,
                    attempts,
                }
            }
        })
    }
}
