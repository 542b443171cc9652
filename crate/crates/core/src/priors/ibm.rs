use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::stats::Proportion;
use crate::wavelet::{GridFunction, MAX_LEVEL};

/// Rejection attempts per block when conditioning on `‖B̄_α‖_∞ ≤ c`.
pub const TRIAL_BLOCK: u64 = 10_000;

/// Acceptance rate below which conditioning is reported as infeasible.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Integrated Brownian motion `B_α` with `α = m + 1/2`, optionally released at
/// zero by an independent polynomial `Σ_{k≤m} Z_k t^k / k!`, sampled on the
/// left endpoints of a dyadic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReleasedIbm {
    folds: u32,
    grid_level: u32,
    released: bool,
}

impl ReleasedIbm {
    /// `alpha` must be a half-integer `>= 1/2`; `grid_level >= 8`.
    pub fn new(alpha: f64, grid_level: u32, released: bool) -> Result<Self> {
        let m = alpha - 0.5;
        if !(m >= 0.0) || m.fract() != 0.0 || m > 16.0 {
            return invalid(format!(
                "alpha must be one of 1/2, 3/2, 5/2, ..., got {alpha}"
            ));
        }
        if !(8..=MAX_LEVEL).contains(&grid_level) {
            return invalid(format!(
                "grid level must be in 8..={MAX_LEVEL}, got {grid_level}"
            ));
        }
        Ok(Self {
            folds: m as u32,
            grid_level,
            released,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.folds as f64 + 0.5
    }

    /// Number of integrations `[α]` applied to Brownian motion.
    pub fn folds(&self) -> u32 {
        self.folds
    }

    pub fn grid_level(&self) -> u32 {
        self.grid_level
    }

    pub fn released(&self) -> bool {
        self.released
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GridFunction {
        let mut path = PathStepper::new(self, rng);
        let n = 1usize << self.grid_level;
        let mut values = Vec::with_capacity(n);
        values.push(path.value());
        for _ in 1..n {
            path.advance(rng);
            values.push(path.value());
        }
        GridFunction::from_raw(self.grid_level, values)
    }

    /// Draw from `B̄_α` conditioned on `‖B̄_α‖_∞ ≤ c` by rejection. Returns the
    /// path and the number of attempts used.
    pub fn sample_conditioned<R: Rng + ?Sized>(
        &self,
        c: f64,
        rng: &mut R,
    ) -> Result<(GridFunction, u64)> {
        if !(c > 0.0) {
            return invalid(format!("conditioning radius must be positive, got {c}"));
        }
        for attempts in 1..=TRIAL_BLOCK {
            let path = self.sample(rng);
            if path.max_abs() <= c {
                return Ok((path, attempts));
            }
        }
        // a whole block without acceptance means the rate is below 1/TRIAL_BLOCK
        Err(Error::ConditioningInfeasible { c, acceptance: 0.0 })
    }

    /// Empirical acceptance rate of the conditioning event over `trials` draws.
    pub fn acceptance<R: Rng + ?Sized>(
        &self,
        c: f64,
        trials: u64,
        rng: &mut R,
    ) -> Result<Proportion> {
        if trials == 0 {
            return invalid("need at least one trial");
        }
        let hits = (0..trials)
            .filter(|_| self.sample(rng).max_abs() <= c)
            .count() as u64;
        Ok(Proportion::new(hits, trials))
    }

    /// Check that conditioning at radius `c` is workable; errors when the
    /// acceptance over one trial block is below [`MIN_ACCEPTANCE`].
    pub fn check_conditioning<R: Rng + ?Sized>(&self, c: f64, rng: &mut R) -> Result<Proportion> {
        let p = self.acceptance(c, TRIAL_BLOCK, rng)?;
        if p.estimate < MIN_ACCEPTANCE {
            return Err(Error::ConditioningInfeasible {
                c,
                acceptance: p.estimate,
            });
        }
        Ok(p)
    }
}

/// Incremental path state: Brownian motion, its `m` trapezoidal integrals and
/// the release coefficients. Advancing one grid step costs `O(m)`.
#[derive(Debug, Clone)]
pub(crate) struct PathStepper {
    h: f64,
    t: f64,
    // integrals[0] = B, integrals[k] = k-fold integral
    integrals: Vec<f64>,
    release: Vec<f64>,
}

impl PathStepper {
    pub(crate) fn new<R: Rng + ?Sized>(process: &ReleasedIbm, rng: &mut R) -> Self {
        let m = process.folds as usize;
        let release = if process.released {
            let mut fact = 1.0;
            (0..=m)
                .map(|k| {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    rng.sample::<f64, _>(StandardNormal) / fact
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            h: (-(process.grid_level as f64)).exp2(),
            t: 0.0,
            integrals: vec![0.0; m + 1],
            release,
        }
    }

    pub(crate) fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let step = self.h.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let mut prev_old = self.integrals[0];
        self.integrals[0] += step;
        for k in 1..self.integrals.len() {
            let old = self.integrals[k];
            self.integrals[k] += 0.5 * self.h * (prev_old + self.integrals[k - 1]);
            prev_old = old;
        }
        self.t += self.h;
    }

    pub(crate) fn value(&self) -> f64 {
        let base = *self.integrals.last().expect("at least Brownian motion");
        // Horner on Σ c_k t^k with c_k = Z_k / k!
        base + self
            .release
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * self.t + c)
    }
}

/// The exponential link `w ↦ e^w / ∫ e^w`.
pub fn normalize_exp(w: &GridFunction) -> GridFunction {
    let top = w.max();
    let e = w.map(|v| (v - top).exp());
    let z = e.integral();
    e.map(|v| v / z)
}
