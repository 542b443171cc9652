//! Dirichlet dyadic-histogram prior and its conjugate posterior for i.i.d.
//! density data on [0,1].
//!
//! Bins are the half-open cells `((k-1)/2^j, k/2^j]`, with the point 0 placed in
//! the first bin. Bin `k` here is zero-based.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use crate::contraction::{collect_points, run_cells, ContractionPoint, CurveSettings};
use crate::error::{invalid, Result};
use crate::rates::contraction_exponent;
use crate::seed::stream;
use crate::space::lr_norm;
use crate::wavelet::{GridFunction, MAX_LEVEL};

/// `Dir(a_1, …, a_{2^j})` on the bin weights of a level-`j` histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletHistogram {
    level: u32,
    concentration: Vec<f64>,
}

/// Zero-based bin of `x` at level `j`: `ceil(x 2^j) - 1`, with 0 in bin 0.
pub fn bin_of(x: f64, level: u32) -> Result<usize> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("data point {x} lies outside [0,1]"));
    }
    let scaled = x * (1u64 << level) as f64;
    Ok((scaled.ceil() as usize).saturating_sub(1))
}

impl DirichletHistogram {
    /// The all-ones prior.
    pub fn prior(level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return invalid(format!("histogram level {level} too large"));
        }
        Ok(Self {
            level,
            concentration: vec![1.0; 1 << level],
        })
    }

    /// Posterior after observing the given bin counts.
    pub fn from_counts(level: u32, counts: &[u64]) -> Result<Self> {
        let mut h = Self::prior(level)?;
        if counts.len() != h.concentration.len() {
            return invalid(format!(
                "expected {} bin counts, got {}",
                h.concentration.len(),
                counts.len()
            ));
        }
        h.concentration
            .iter_mut()
            .zip(counts)
            .for_each(|(a, c)| *a += *c as f64);
        Ok(h)
    }

    /// Posterior after observing raw data points.
    pub fn posterior_update(level: u32, data: &[f64]) -> Result<Self> {
        let mut counts = vec![0u64; 1 << level.min(MAX_LEVEL)];
        for &x in data {
            counts[bin_of(x, level)?] += 1;
        }
        Self::from_counts(level, &counts)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn concentration(&self) -> &[f64] {
        &self.concentration
    }

    /// Posterior mean bin weights `a_k / Σ a`.
    pub fn mean_weights(&self) -> Vec<f64> {
        let total: f64 = self.concentration.iter().sum();
        self.concentration.iter().map(|a| a / total).collect()
    }

    /// Mean density, heights `2^j a_k / Σ a`.
    pub fn mean_density(&self) -> GridFunction {
        self.weights_to_density(self.mean_weights())
    }

    /// Bin weights drawn as normalized independent Gamma variates.
    pub fn sample_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut w: Vec<f64> = self
            .concentration
            .iter()
            .map(|&a| {
                Gamma::new(a, 1.0)
                    .expect("concentration is positive")
                    .sample(rng)
            })
            .collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        w
    }

    pub fn sample_histogram<R: Rng + ?Sized>(&self, rng: &mut R) -> GridFunction {
        self.weights_to_density(self.sample_weights(rng))
    }

    fn weights_to_density(&self, weights: Vec<f64>) -> GridFunction {
        let scale = (1u64 << self.level) as f64;
        GridFunction::from_raw(self.level, weights.into_iter().map(|w| w * scale).collect())
    }
}

/// Draws i.i.d. points from a piecewise-constant density on a dyadic grid.
#[derive(Debug, Clone)]
pub struct DensitySampler {
    density: GridFunction,
    cdf: Vec<f64>,
}

impl DensitySampler {
    pub fn new(density: &GridFunction) -> Result<Self> {
        if density.min() < 0.0 {
            return invalid("density must be non-negative");
        }
        let step = density.step();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = density
            .values()
            .iter()
            .map(|v| {
                acc += v * step;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return invalid("density has zero mass");
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(Self {
            density: density.clone(),
            cdf,
        })
    }

    pub fn density(&self) -> &GridFunction {
        &self.density
    }

    pub fn sample_points<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let step = self.density.step();
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let cell = self.cdf.partition_point(|c| *c < u).min(self.cdf.len() - 1);
                (cell as f64 + rng.random::<f64>()) * step
            })
            .collect()
    }

    /// Probability mass of each bin at `level` (at most the density's level).
    pub fn bin_masses(&self, level: u32) -> Result<Vec<f64>> {
        if level > self.density.level() {
            return invalid(format!(
                "bin level {level} is finer than the density grid {}",
                self.density.level()
            ));
        }
        let block = 1usize << (self.density.level() - level);
        let mut prev = 0.0;
        Ok(self
            .cdf
            .chunks_exact(block)
            .map(|c| {
                let hi = *c.last().expect("non-empty block");
                let m = hi - prev;
                prev = hi;
                m.max(0.0)
            })
            .collect())
    }

    /// Bin counts of `n` i.i.d. points at `level`, drawn directly as a
    /// multinomial vector through sequential binomials. Points land on bin
    /// edges with probability zero, so this has the law of binning sampled data.
    pub fn bin_counts<R: Rng + ?Sized>(&self, level: u32, n: u64, rng: &mut R) -> Result<Vec<u64>> {
        let masses = self.bin_masses(level)?;
        let mut left = n;
        let mut rest = 1.0;
        let mut counts = Vec::with_capacity(masses.len());
        for (i, &m) in masses.iter().enumerate() {
            let k = if i + 1 == masses.len() {
                left
            } else if left == 0 || rest <= 0.0 {
                0
            } else {
                Binomial::new(left, (m / rest).clamp(0.0, 1.0))
                    .expect("probability in [0,1]")
                    .sample(rng)
            };
            counts.push(k);
            left -= k;
            rest -= m;
        }
        Ok(counts)
    }
}

/// Histogram resolution with `2^j ≈ (n / log n)^{1/(2α+1)}`, rounded to the
/// nearest level.
pub fn histogram_level(alpha: f64, n: u64) -> Result<u32> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid(format!("histogram prior needs 0 < alpha <= 1, got {alpha}"));
    }
    if n < 2 {
        return invalid(format!("sample size must be >= 2, got {n}"));
    }
    let nf = n as f64;
    Ok(((nf / nf.ln()).log2() / (2.0 * alpha + 1.0))
        .round()
        .max(0.0) as u32)
}

/// Model tag used for stream derivation and output rows.
pub const MODEL_TAG: &str = "histogram";

/// Contraction curve of the Dirichlet histogram posterior around `p0`. Each
/// replicate draws fresh data, updates the prior at `histogram_level(α, n)`,
/// draws one posterior density and records its `L^r` distances to `p0`. The
/// radius at `n` is `M (n / log n)^{-κ}` with `κ` the contraction exponent for `r`.
pub fn contraction_curve(
    p0: &GridFunction,
    alpha: f64,
    settings: &CurveSettings,
) -> Result<Vec<ContractionPoint>> {
    settings.validate()?;
    let sampler = DensitySampler::new(p0)?;
    if (p0.integral() - 1.0).abs() > 1e-9 || !(p0.min() > 0.0) {
        return invalid("p0 must be a strictly positive density");
    }
    for &n in &settings.n_list {
        let j = histogram_level(alpha, n)?;
        if j > p0.level() {
            return invalid(format!(
                "n = {n} needs histogram level {j} but p0 lives on level {}",
                p0.level()
            ));
        }
    }
    let per_n = run_cells(&settings.n_list, settings.reps, |n, rep| {
        let mut rng = stream(settings.seed, MODEL_TAG, n, rep as u64);
        let j = histogram_level(alpha, n)?;
        let counts = sampler.bin_counts(j, n, &mut rng)?;
        let post = DirichletHistogram::from_counts(j, &counts)?;
        let diff = post.sample_histogram(&mut rng).difference(p0);
        Ok(settings
            .rs
            .iter()
            .map(|&r| lr_norm(&diff, r))
            .collect::<Vec<f64>>())
    })?;
    collect_points(
        settings,
        per_n,
        |n| histogram_level(alpha, n).unwrap_or(0),
        |n, r| {
            let nf = n as f64;
            Ok(settings.radius_multiplier * (nf / nf.ln()).powf(-contraction_exponent(alpha, r)))
        },
    )
}
