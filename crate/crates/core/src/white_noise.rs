//! Gaussian white-noise regression in sequence space.
//!
//! Observing `dY(t) = f(t) dt + n^{-1/2} dB(t)` is equivalent to observing every
//! wavelet coefficient of `f` with independent `N(0, 1/n)` noise. Under a
//! diagonal Gaussian prior the posterior is diagonal Gaussian too:
//!
//! ```text
//! mean = μ / (μ + 1/n) · y        variance = μ / (nμ + 1)
//! ```

use rand::Rng;
use rand_distr::StandardNormal;

use crate::contraction::{collect_points, run_cells, ContractionPoint, CurveSettings};
use crate::error::{invalid, Result};
use crate::priors::{DiagGaussianPrior, PriorVariances};
use crate::rates::{epsilon_n, RateSchedule};
use crate::seed::stream;
use crate::space::{lr_norm, NormIndex};
use crate::wavelet::{synthesize, GridFunction, WaveletCoeffs};

/// Noisy coefficients `y = θ + g / √n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyCoeffs {
    pub n: u64,
    pub y: WaveletCoeffs,
}

pub fn observe<R: Rng + ?Sized>(f0: &WaveletCoeffs, n: u64, rng: &mut R) -> Result<NoisyCoeffs> {
    if n == 0 {
        return invalid("sample size n must be at least 1");
    }
    let sd = 1.0 / (n as f64).sqrt();
    let y = f0.map(|theta| theta + sd * rng.sample::<f64, _>(StandardNormal));
    Ok(NoisyCoeffs { n, y })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    pub n: u64,
    pub means: WaveletCoeffs,
    pub variances: WaveletCoeffs,
}

fn shrink(mu: f64, n: f64) -> (f64, f64) {
    // weight μ/(μ + 1/n) written as nμ/(nμ + 1) so μ = 0 is exact
    let nm = n * mu;
    (nm / (nm + 1.0), mu / (nm + 1.0))
}

pub fn posterior(mu: &PriorVariances, obs: &NoisyCoeffs) -> Result<GaussianPosterior> {
    let y = &obs.y;
    if mu.j0 != y.j0() || mu.jmax() != y.jmax() {
        return invalid(format!(
            "prior variances cover levels {}..{} but observations cover {}..{}",
            mu.j0,
            mu.jmax(),
            y.j0(),
            y.jmax()
        ));
    }
    if mu.scaling < 0.0 || mu.levels.iter().any(|v| !(*v >= 0.0)) {
        return invalid("prior variances must be non-negative");
    }
    let n = obs.n as f64;
    let mut means = y.clone();
    let mut variances = WaveletCoeffs::zeros(y.basis(), y.j0(), y.jmax());
    let (w, v) = shrink(mu.scaling, n);
    means.scaling_mut().iter_mut().for_each(|m| *m *= w);
    variances.scaling_mut().iter_mut().for_each(|x| *x = v);
    for l in y.j0()..y.jmax() {
        let (w, v) = shrink(mu.level(l), n);
        means.level_mut(l).iter_mut().for_each(|m| *m *= w);
        variances.level_mut(l).iter_mut().for_each(|x| *x = v);
    }
    Ok(GaussianPosterior {
        n: obs.n,
        means,
        variances,
    })
}

impl GaussianPosterior {
    pub fn sample_coeffs<R: Rng + ?Sized>(&self, rng: &mut R) -> WaveletCoeffs {
        self.means
            .zip_with(&self.variances, |m, v| {
                if v == 0.0 {
                    m
                } else {
                    m + v.sqrt() * rng.sample::<f64, _>(StandardNormal)
                }
            })
            .expect("means and variances share a tree")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GridFunction {
        synthesize(&self.sample_coeffs(rng)).expect("well-formed tree")
    }

    pub fn mean_function(&self) -> GridFunction {
        synthesize(&self.means).expect("well-formed tree")
    }

    /// `‖f − f0‖_r` for each index in `rs`, for `reps` posterior draws `f`.
    /// Row `i` holds the losses of draw `i`.
    pub fn losses<R: Rng + ?Sized>(
        &self,
        f0: &GridFunction,
        rs: &[NormIndex],
        reps: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        if f0.level() != self.means.jmax() {
            return invalid(format!(
                "truth is on level {} but the posterior synthesizes to level {}",
                f0.level(),
                self.means.jmax()
            ));
        }
        Ok((0..reps)
            .map(|_| {
                let diff = self.sample(rng).difference(f0);
                rs.iter().map(|&r| lr_norm(&diff, r)).collect()
            })
            .collect())
    }
}

/// Monte Carlo estimate of `Π(‖f − f0‖_r > radius | Y)`.
pub fn contraction_probability<R: Rng + ?Sized>(
    post: &GaussianPosterior,
    f0: &GridFunction,
    radius: f64,
    r: NormIndex,
    reps: usize,
    rng: &mut R,
) -> Result<f64> {
    if reps < 100 {
        return invalid(format!("need at least 100 posterior draws, got {reps}"));
    }
    let losses = post.losses(f0, &[r], reps, rng)?;
    Ok(losses.iter().filter(|l| l[0] > radius).count() as f64 / reps as f64)
}

/// Model tag used for stream derivation and output rows.
pub const MODEL_TAG: &str = "white-noise";

/// A fixed truth together with the prior-truncation rule used at each `n`.
#[derive(Debug, Clone)]
pub struct WhiteNoiseSetup {
    alpha: f64,
    truth: WaveletCoeffs,
    truth_grid: GridFunction,
    c_res: f64,
    /// Prior truncation is `J_n + extra_levels`, capped at the truth's depth.
    extra_levels: u32,
}

impl WhiteNoiseSetup {
    /// `truth` fixes the basis, the coarse level (>= 1) and the evaluation grid.
    pub fn new(truth: WaveletCoeffs, alpha: f64, c_res: f64, extra_levels: u32) -> Result<Self> {
        if truth.j0() == 0 {
            return invalid("the diagonal Gaussian prior needs a coarse level >= 1");
        }
        // validates alpha against the basis
        DiagGaussianPrior::new(truth.basis(), truth.j0(), alpha, truth.jmax())?;
        let truth_grid = synthesize(&truth)?;
        Ok(Self {
            alpha,
            truth,
            truth_grid,
            c_res,
            extra_levels,
        })
    }

    pub fn truth(&self) -> &WaveletCoeffs {
        &self.truth
    }

    pub fn truth_grid(&self) -> &GridFunction {
        &self.truth_grid
    }

    /// Prior truncation level at sample size `n`.
    pub fn truncation(&self, n: u64) -> Result<u32> {
        let j_n = RateSchedule::new(self.alpha, NormIndex::Infinity, n, 0.0, self.c_res)?.j_n;
        Ok((j_n + self.extra_levels).clamp(self.truth.j0() + 1, self.truth.jmax()))
    }

    pub fn prior(&self, n: u64) -> Result<DiagGaussianPrior> {
        DiagGaussianPrior::new(
            self.truth.basis(),
            self.truth.j0(),
            self.alpha,
            self.truncation(n)?,
        )
    }

    /// One replicate: observe, form the posterior, draw once, measure `L^r` losses.
    pub fn replicate<R: Rng + ?Sized>(
        &self,
        n: u64,
        rs: &[NormIndex],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let mu = self.prior(n)?.variances_on(self.truth.jmax());
        let post = posterior(&mu, &observe(&self.truth, n, rng)?)?;
        Ok(post.losses(&self.truth_grid, rs, 1, rng)?.remove(0))
    }
}

/// Contraction curve of the Gaussian posterior around the setup's truth. The
/// radius at `n` is `M ε_n`.
pub fn contraction_curve(
    setup: &WhiteNoiseSetup,
    settings: &CurveSettings,
) -> Result<Vec<ContractionPoint>> {
    settings.validate()?;
    let per_n = run_cells(&settings.n_list, settings.reps, |n, rep| {
        let mut rng = stream(settings.seed, MODEL_TAG, n, rep as u64);
        setup.replicate(n, &settings.rs, &mut rng)
    })?;
    collect_points(
        settings,
        per_n,
        |n| setup.truncation(n).unwrap_or(0),
        |n, _| Ok(settings.radius_multiplier * epsilon_n(setup.alpha, n)?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::DiagGaussianPrior;
    use crate::stats::{mean, variance};
    use crate::wavelet::Basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat_variances(j0: u32, jmax: u32, mu: f64) -> PriorVariances {
        PriorVariances {
            j0,
            scaling: mu,
            levels: vec![mu; (jmax - j0) as usize],
        }
    }

    fn tree_with(value: f64) -> WaveletCoeffs {
        WaveletCoeffs::zeros(Basis::haar(), 0, 3).map(|_| value)
    }

    #[test]
    fn conjugate_formulas() {
        let y = NoisyCoeffs {
            n: 1,
            y: tree_with(2.0),
        };
        let post = posterior(&flat_variances(0, 3, 1.0), &y).unwrap();
        assert!(post.means.iter().all(|m| (m - 1.0).abs() < 1e-15));
        assert!(post.variances.iter().all(|v| (v - 0.5).abs() < 1e-15));

        let post = posterior(&flat_variances(0, 3, 0.0), &y).unwrap();
        assert!(post.means.iter().all(|m| m == 0.0));
        assert!(post.variances.iter().all(|v| v == 0.0));

        let big = NoisyCoeffs {
            n: 1 << 40,
            y: tree_with(2.0),
        };
        let post = posterior(&flat_variances(0, 3, 1.0), &big).unwrap();
        assert!(post.means.iter().all(|m| (m - 2.0).abs() < 1e-9));
        assert!(post.variances.iter().all(|v| v < 1e-12));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let y = NoisyCoeffs {
            n: 4,
            y: tree_with(1.0),
        };
        assert!(posterior(&flat_variances(0, 4, 1.0), &y).is_err());
        assert!(posterior(&flat_variances(1, 3, 1.0), &y).is_err());
    }

    #[test]
    fn variance_bound_and_shrinkage() {
        let prior = DiagGaussianPrior::new(Basis::haar(), 1, 0.5, 9).unwrap();
        let f0 = WaveletCoeffs::zeros(Basis::haar(), 1, 9).map(|_| 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1u64, 64, 4096] {
            let obs = observe(&f0, n, &mut rng).unwrap();
            let mu = prior.variances();
            let post = posterior(&mu, &obs).unwrap();
            let cap = 1.0 / n as f64;
            for l in 1..9 {
                let v = post.variances.level(l)[0];
                assert!(v > 0.0 && v <= mu.level(l).min(cap) * (1.0 + 1e-12));
                for (m, y) in post.means.level(l).iter().zip(obs.y.level(l)) {
                    assert!(m.abs() <= y.abs() && m * y >= 0.0);
                }
            }
        }
    }

    #[test]
    fn observation_noise_moments() {
        let f0 = tree_with(0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 50;
        let draws: Vec<f64> = (0..10_000)
            .map(|_| observe(&f0, n, &mut rng).unwrap().y.level(2)[1])
            .collect();
        let var = 1.0 / n as f64;
        assert!((mean(&draws) - 0.7).abs() < 3.0 * (var / 1e4).sqrt());
        assert!((variance(&draws) - var).abs() < 3.0 * var * (2.0 / 9999.0f64).sqrt());

        let huge = observe(&f0, 1_000_000_000_000, &mut rng).unwrap();
        assert!(huge.y.iter().all(|v| (v - 0.7).abs() < 1e-5));
        assert!(observe(&f0, 0, &mut rng).is_err());
    }

    #[test]
    fn posterior_sampling_moments() {
        let y = NoisyCoeffs {
            n: 3,
            y: tree_with(1.0),
        };
        let post = posterior(&flat_variances(0, 3, 0.5), &y).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| post.sample_coeffs(&mut rng).level(1)[1])
            .collect();
        let m = post.means.level(1)[1];
        let v = post.variances.level(1)[1];
        assert!((mean(&draws) - m).abs() < 3.0 * (v / 1e4).sqrt());
        assert!((variance(&draws) - v).abs() < 3.0 * v * (2.0 / 9999.0f64).sqrt());
    }

    #[test]
    fn zero_variance_sample_is_mean() {
        let y = NoisyCoeffs {
            n: 3,
            y: tree_with(1.0),
        };
        let post = posterior(&flat_variances(0, 3, 0.0), &y).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(post.sample(&mut rng), post.mean_function());
    }

    #[test]
    fn contraction_probability_edges_and_monotonicity() {
        let b = Basis::haar();
        let prior = DiagGaussianPrior::new(b, 1, 0.5, 7).unwrap();
        let truth = WaveletCoeffs::zeros(b, 1, 7);
        let f0 = synthesize(&truth).unwrap();
        let obs = observe(&truth, 256, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let post = posterior(&prior.variances(), &obs).unwrap();
        let r = NormIndex::Infinity;
        let at = |radius: f64| {
            contraction_probability(
                &post,
                &f0,
                radius,
                r,
                200,
                &mut ChaCha8Rng::seed_from_u64(6),
            )
            .unwrap()
        };
        assert_eq!(at(0.0), 1.0);
        assert_eq!(at(1e9), 0.0);
        let mut last = 1.0;
        for radius in [0.05, 0.1, 0.2, 0.4] {
            let p = at(radius);
            assert!(p <= last);
            last = p;
        }
        assert!(
            contraction_probability(&post, &f0, 0.1, r, 99, &mut ChaCha8Rng::seed_from_u64(6))
                .is_err()
        );
    }

    #[test]
    fn curve_losses_shrink_with_n() {
        let truth = crate::space::TestFunction::new(0.75, 1.0, crate::space::TestProfile::Dense)
            .unwrap()
            .coeffs(Basis::haar(), 1, 10)
            .unwrap();
        let setup = WhiteNoiseSetup::new(truth, 0.75, 1.0, 2).unwrap();
        assert!(setup.truncation(1 << 10).unwrap() <= 10);
        let settings = CurveSettings {
            n_list: vec![1 << 8, 1 << 12, 1 << 16],
            rs: vec![NormIndex::Finite(2.0), NormIndex::Infinity],
            reps: 20,
            seed: 1,
            radius_multiplier: 1.0,
        };
        let pts = contraction_curve(&setup, &settings).unwrap();
        assert_eq!(pts.len(), 6);
        for r in &settings.rs {
            let med: Vec<f64> = pts
                .iter()
                .filter(|p| p.r == *r)
                .map(|p| p.loss_median)
                .collect();
            assert!(med.windows(2).all(|w| w[1] < w[0]), "{med:?}");
        }
        let again = contraction_curve(&setup, &settings).unwrap();
        assert_eq!(pts, again);
    }
}
