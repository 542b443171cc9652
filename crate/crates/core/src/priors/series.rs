use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::normalize_exp;
use crate::error::{invalid, Result};
use crate::wavelet::{synthesize, Basis, GridFunction, WaveletCoeffs};

fn check_levels(j0: u32, jmax: u32) -> Result<()> {
    if jmax <= j0 {
        return invalid(format!(
            "truncation level {jmax} must exceed coarse level {j0}"
        ));
    }
    if jmax > crate::wavelet::MAX_LEVEL {
        return invalid(format!("truncation level {jmax} too large"));
    }
    Ok(())
}

/// Wavelet series with i.i.d. `U(-B, B)` coefficients scaled by `2^{-l(α+1/2)}`,
/// exponentiated and normalized into a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSeriesPrior {
    basis: Basis,
    j0: u32,
    alpha: f64,
    bound: f64,
    jmax: u32,
}

impl UniformSeriesPrior {
    pub fn new(basis: Basis, j0: u32, alpha: f64, bound: f64, jmax: u32) -> Result<Self> {
        if !(alpha > 0.0) {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        if alpha >= basis.smoothness_ceiling() {
            return invalid(format!(
                "alpha = {alpha} needs a smoother basis than {basis} (ceiling {})",
                basis.smoothness_ceiling()
            ));
        }
        if !(bound > 0.0) || !bound.is_finite() {
            return invalid(format!("bound must be positive, got {bound}"));
        }
        check_levels(j0, jmax)?;
        Ok(Self {
            basis,
            j0,
            alpha,
            bound,
            jmax,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn j0(&self) -> u32 {
        self.j0
    }

    pub fn jmax(&self) -> u32 {
        self.jmax
    }

    /// Coefficients of the random series `U_α`.
    pub fn sample_coeffs<R: Rng + ?Sized>(&self, rng: &mut R) -> WaveletCoeffs {
        let u = Uniform::new_inclusive(-self.bound, self.bound).expect("bound is positive");
        let mut c = WaveletCoeffs::zeros(self.basis, self.j0, self.jmax);
        c.scaling_mut().iter_mut().for_each(|a| *a = u.sample(rng));
        for l in self.j0..self.jmax {
            let w = (-(l as f64) * (self.alpha + 0.5)).exp2();
            c.level_mut(l)
                .iter_mut()
                .for_each(|b| *b = w * u.sample(rng));
        }
        c
    }

    /// A draw of `U_α` on the grid of level `jmax`.
    pub fn sample_log_density<R: Rng + ?Sized>(&self, rng: &mut R) -> GridFunction {
        synthesize(&self.sample_coeffs(rng)).expect("well-formed tree")
    }

    /// A draw of the density `e^{U_α} / ∫ e^{U_α}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GridFunction {
        normalize_exp(&self.sample_log_density(rng))
    }
}

/// Per-level prior variances of a diagonal Gaussian wavelet prior. The scaling
/// block has its own variance; detail level `l` has `levels[l - j0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVariances {
    pub j0: u32,
    pub scaling: f64,
    pub levels: Vec<f64>,
}

impl PriorVariances {
    pub fn jmax(&self) -> u32 {
        self.j0 + self.levels.len() as u32
    }

    pub fn level(&self, l: u32) -> f64 {
        self.levels[(l - self.j0) as usize]
    }
}

/// Diagonal Gaussian prior: `N(0,1)` scaling coefficients and detail
/// coefficients `N(0, μ_l)` with `μ_l = l^{-1} 2^{-l(2α+1)}`, truncated at `jmax`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagGaussianPrior {
    basis: Basis,
    j0: u32,
    alpha: f64,
    jmax: u32,
}

impl DiagGaussianPrior {
    pub fn new(basis: Basis, j0: u32, alpha: f64, jmax: u32) -> Result<Self> {
        if !(alpha > 0.0) {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        if alpha >= basis.smoothness_ceiling() {
            return invalid(format!(
                "alpha = {alpha} needs a smoother basis than {basis} (ceiling {})",
                basis.smoothness_ceiling()
            ));
        }
        if j0 == 0 {
            return invalid("the level variance l^-1 2^{-l(2α+1)} needs a coarse level >= 1");
        }
        check_levels(j0, jmax)?;
        Ok(Self {
            basis,
            j0,
            alpha,
            jmax,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn j0(&self) -> u32 {
        self.j0
    }

    pub fn jmax(&self) -> u32 {
        self.jmax
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `μ_l = l^{-1} 2^{-l(2α+1)}`.
    pub fn level_variance(&self, l: u32) -> f64 {
        let l = l as f64;
        (-l * (2.0 * self.alpha + 1.0)).exp2() / l
    }

    pub fn variances(&self) -> PriorVariances {
        self.variances_on(self.jmax)
    }

    /// Variances on a tree extending to `tree_jmax`; levels at or beyond the
    /// prior's truncation get variance zero.
    pub fn variances_on(&self, tree_jmax: u32) -> PriorVariances {
        PriorVariances {
            j0: self.j0,
            scaling: 1.0,
            levels: (self.j0..tree_jmax)
                .map(|l| {
                    if l < self.jmax {
                        self.level_variance(l)
                    } else {
                        0.0
                    }
                })
                .collect(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WaveletCoeffs {
        let mut c = WaveletCoeffs::zeros(self.basis, self.j0, self.jmax);
        c.scaling_mut()
            .iter_mut()
            .for_each(|a| *a = rng.sample(StandardNormal));
        for l in self.j0..self.jmax {
            let sd = self.level_variance(l).sqrt();
            c.level_mut(l)
                .iter_mut()
                .for_each(|b| *b = sd * rng.sample::<f64, _>(StandardNormal));
        }
        c
    }
}
