//! L^r norms on [0,1], Besov norms in coefficient form, and test functions of
//! prescribed Hölder regularity.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::wavelet::{synthesize, Basis, GridFunction, WaveletCoeffs};

/// An integrability index in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum NormIndex {
    Finite(f64),
    Infinity,
}

impl NormIndex {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return invalid(format!("norm index must be >= 1, got {p}"));
        }
        if p.is_infinite() {
            return Ok(Self::Infinity);
        }
        Ok(Self::Finite(p))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(&self) -> f64 {
        match self {
            Self::Finite(p) => 1.0 / p,
            Self::Infinity => 0.0,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Self::Finite(p) => *p,
            Self::Infinity => f64::INFINITY,
        }
    }

    /// `max(2, r)`.
    pub fn bar(&self) -> Self {
        match self {
            Self::Finite(p) if *p < 2.0 => Self::Finite(2.0),
            other => *other,
        }
    }

    /// `‖x‖_p` of a finite sequence.
    pub fn seq_norm(&self, xs: &[f64]) -> f64 {
        match self {
            Self::Infinity => xs.iter().fold(0.0, |m, v| m.max(v.abs())),
            Self::Finite(p) if *p == 1.0 => xs.iter().map(|v| v.abs()).sum(),
            Self::Finite(p) if *p == 2.0 => xs.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Self::Finite(p) => xs
                .iter()
                .map(|v| v.abs().powf(*p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for NormIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            other => match other.parse::<f64>() {
                Ok(p) => Self::finite(p),
                Err(_) => invalid(format!("cannot parse norm index `{s}`")),
            },
        }
    }
}

impl Serialize for NormIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Discrete L^r norm: `(sum |f_k|^r 2^-J)^{1/r}`, or the grid maximum for `r = inf`.
///
/// For `r = inf` the grid maximum is a lower bound on the continuum sup-norm
/// unless `f` is piecewise constant at its own resolution.
pub fn lr_norm(f: &GridFunction, r: NormIndex) -> f64 {
    match r {
        NormIndex::Infinity => f.max_abs(),
        NormIndex::Finite(p) => r.seq_norm(f.values()) * f.step().powf(1.0 / p),
    }
}

/// Checked variant taking a raw exponent; `r < 1` is rejected.
pub fn lr_norm_checked(f: &GridFunction, r: f64) -> Result<f64> {
    Ok(lr_norm(f, NormIndex::finite(r)?))
}

/// Besov index `(s, p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: NormIndex,
    pub q: NormIndex,
}

impl BesovIndex {
    pub fn new(s: f64, p: NormIndex, q: NormIndex) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return invalid(format!("smoothness must be finite and >= 0, got {s}"));
        }
        Ok(Self { s, p, q })
    }

    /// The Hölder-Zygmund index `(s, inf, inf)`.
    pub fn holder(s: f64) -> Result<Self> {
        Self::new(s, NormIndex::Infinity, NormIndex::Infinity)
    }
}

/// The two halves of a Besov norm: the scaling-block `l^p` norm and the
/// weighted `l^q` sum over detail levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovTerms {
    pub scaling: f64,
    pub details: f64,
}

impl BesovTerms {
    pub fn total(&self) -> f64 {
        self.scaling + self.details
    }
}

pub fn besov_terms(c: &WaveletCoeffs, idx: BesovIndex) -> BesovTerms {
    let inv_p = idx.p.reciprocal();
    let weighted: Vec<f64> = c
        .levels()
        .map(|(l, betas)| (l as f64 * (idx.s + 0.5 - inv_p)).exp2() * idx.p.seq_norm(betas))
        .collect();
    BesovTerms {
        scaling: idx.p.seq_norm(c.scaling()),
        details: idx.q.seq_norm(&weighted),
    }
}

/// `‖α‖_p + (Σ_l (2^{l(s+1/2-1/p)} ‖β_l‖_p)^q)^{1/q}` over the levels present in `c`.
pub fn besov_norm(c: &WaveletCoeffs, idx: BesovIndex) -> f64 {
    besov_terms(c, idx).total()
}

/// Radius of the smallest Hölder ball (coefficient form) containing `c`.
pub fn holder_coeff_radius(c: &WaveletCoeffs, alpha: f64) -> Result<f64> {
    Ok(besov_norm(c, BesovIndex::holder(alpha)?))
}

/// Sign pattern of the detail coefficients of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestProfile {
    /// One coefficient per level, nested around the point 1/3 (a Hölder cusp).
    SingleBump,
    /// Every coefficient present with positive sign.
    Dense,
    /// Every coefficient present with signs drawn from the given seed.
    SeededRandom(u64),
}

impl FromStr for TestProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "single-bump" => Ok(Self::SingleBump),
            "dense" => Ok(Self::Dense),
            _ => match s.strip_prefix("seeded-random") {
                Some("") => Ok(Self::SeededRandom(0)),
                Some(rest) => rest
                    .trim_start_matches([':', '-'])
                    .parse()
                    .map(Self::SeededRandom)
                    .map_err(|_| Error::InvalidArgument(format!("bad profile seed in `{s}`"))),
                None => invalid(format!("unknown test profile `{s}`")),
            },
        }
    }
}

impl fmt::Display for TestProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingleBump => write!(f, "single-bump"),
            Self::Dense => write!(f, "dense"),
            Self::SeededRandom(s) => write!(f, "seeded-random:{s}"),
        }
    }
}

const BUMP_CENTER: f64 = 1.0 / 3.0;
const MIN_TEST_LEVEL: u32 = 4;

/// A function with `|β_{lk}| = B 2^{-l(α+1/2)}` on a chosen support pattern and
/// vanishing scaling coefficients, so its Hölder radius is exactly `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub alpha: f64,
    pub bound: f64,
    pub profile: TestProfile,
}

impl TestFunction {
    pub fn new(alpha: f64, bound: f64, profile: TestProfile) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        if !(bound > 0.0) || !bound.is_finite() {
            return invalid(format!("bound must be positive, got {bound}"));
        }
        Ok(Self {
            alpha,
            bound,
            profile,
        })
    }

    pub fn coeffs(&self, basis: Basis, j0: u32, jmax: u32) -> Result<WaveletCoeffs> {
        if jmax < MIN_TEST_LEVEL {
            return invalid(format!(
                "test functions need jmax >= {MIN_TEST_LEVEL}, got {jmax}"
            ));
        }
        if j0 >= jmax {
            return invalid(format!("coarse level {j0} must be below jmax {jmax}"));
        }
        let mut c = WaveletCoeffs::zeros(basis, j0, jmax);
        let mut signs = match self.profile {
            TestProfile::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        for l in j0..jmax {
            let mag = self.bound * (-(l as f64) * (self.alpha + 0.5)).exp2();
            let betas = c.level_mut(l);
            match self.profile {
                TestProfile::SingleBump => {
                    let k = (BUMP_CENTER * (1u64 << l) as f64).floor() as usize;
                    betas[k] = mag;
                }
                TestProfile::Dense => betas.iter_mut().for_each(|b| *b = mag),
                TestProfile::SeededRandom(_) => {
                    let rng = signs.as_mut().expect("seeded profile has a stream");
                    for b in betas.iter_mut() {
                        *b = if rng.random::<bool>() { mag } else { -mag };
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn grid(&self, basis: Basis, j0: u32, jmax: u32) -> Result<GridFunction> {
        synthesize(&self.coeffs(basis, j0, jmax)?)
    }

    /// Density variant `(f - min f + 0.1) / ∫(f - min f + 0.1)`.
    pub fn density(&self, basis: Basis, j0: u32, jmax: u32) -> Result<GridFunction> {
        Ok(to_density(&self.grid(basis, j0, jmax)?))
    }
}

/// Shifts and rescales a function into a strictly positive density with integral 1.
pub fn to_density(f: &GridFunction) -> GridFunction {
    let min = f.min();
    let shifted = f.map(|v| v - min + 0.1);
    let mass = shifted.integral();
    shifted.map(|v| v / mass)
}

/// Test function on the grid of level `jmax`, coarse level taken from the basis.
pub fn make_test_function(
    alpha: f64,
    bound: f64,
    jmax: u32,
    profile: TestProfile,
    basis: Basis,
) -> Result<GridFunction> {
    TestFunction::new(alpha, bound, profile)?.grid(basis, basis.default_coarse_level(), jmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{analyze, project};

    fn inf() -> NormIndex {
        NormIndex::Infinity
    }

    #[test]
    fn norm_index_parsing() {
        assert_eq!("inf".parse::<NormIndex>().unwrap(), inf());
        assert_eq!("2".parse::<NormIndex>().unwrap(), NormIndex::Finite(2.0));
        assert!("0.5".parse::<NormIndex>().is_err());
        assert!(NormIndex::finite(0.9).is_err());
        assert_eq!(NormIndex::Finite(1.0).bar(), NormIndex::Finite(2.0));
        assert_eq!(NormIndex::Finite(4.0).bar(), NormIndex::Finite(4.0));
    }

    #[test]
    fn lr_norm_of_constants() {
        let one = GridFunction::constant(6, 1.0);
        for r in [1.0, 1.5, 2.0, 7.0] {
            assert!((lr_norm(&one, NormIndex::Finite(r)) - 1.0).abs() < 1e-12);
        }
        assert_eq!(lr_norm(&GridFunction::constant(3, -2.5), inf()), 2.5);
        assert!(lr_norm_checked(&one, 0.5).is_err());
    }

    #[test]
    fn lr_norm_of_haar_wavelet() {
        // oracle: direct summation of |psi_{lk}|^3 over the cells of its support
        let l = 5u32;
        let mut c = WaveletCoeffs::zeros(Basis::haar(), 0, 12);
        c.level_mut(l)[7] = 1.0;
        let f = synthesize(&c).unwrap();
        let amp = (l as f64 / 2.0).exp2();
        let support_cells = 1usize << (12 - l);
        let direct = (support_cells as f64 * amp.powi(3) / 4096.0).cbrt();
        let want = (l as f64 * (0.5 - 1.0 / 3.0)).exp2();
        assert!((direct - want).abs() < 1e-12);
        assert!((lr_norm(&f, NormIndex::Finite(3.0)) - want).abs() < 1e-6);
    }

    #[test]
    fn besov_single_coefficient() {
        let mut c = WaveletCoeffs::zeros(Basis::haar(), 0, 8);
        c.level_mut(4)[3] = 1.0;
        for (s, p, q) in [(0.5, 1.0, 2.0), (1.0, 2.0, 1.0), (0.0, 3.0, 3.0)] {
            let idx = BesovIndex::new(s, NormIndex::Finite(p), NormIndex::Finite(q)).unwrap();
            let want = (4.0 * (s + 0.5 - 1.0 / p)).exp2();
            assert!((besov_norm(&c, idx) - want).abs() < 1e-12);
        }
        let idx = BesovIndex::holder(0.75).unwrap();
        assert!((besov_norm(&c, idx) - (4.0f64 * 1.25).exp2()).abs() < 1e-12);
        assert_eq!(
            besov_norm(&WaveletCoeffs::zeros(Basis::haar(), 0, 5), idx),
            0.0
        );
    }

    #[test]
    fn besov_l2_matches_parseval() {
        let f =
            make_test_function(0.75, 1.0, 10, TestProfile::SeededRandom(4), Basis::haar()).unwrap();
        let c = analyze(&f, Basis::haar(), 0).unwrap();
        let idx = BesovIndex::new(0.0, NormIndex::Finite(2.0), NormIndex::Finite(2.0)).unwrap();
        let t = besov_terms(&c, idx);
        let parseval = (t.scaling.powi(2) + t.details.powi(2)).sqrt();
        let l2 = lr_norm(&f, NormIndex::Finite(2.0));
        assert!((parseval - l2).abs() / l2 < 0.02);
        assert!(t.total() >= l2 - 1e-12);
    }

    #[test]
    fn dense_profile_magnitudes() {
        let tf = TestFunction::new(1.0, 1.0, TestProfile::Dense).unwrap();
        let c = tf.coeffs(Basis::haar(), 0, 10).unwrap();
        for (l, betas) in c.levels() {
            let want = (-1.5 * l as f64).exp2();
            assert!(betas.iter().all(|b| (b.abs() - want).abs() < 1e-15));
        }
    }

    #[test]
    fn test_function_radius_is_bound() {
        for profile in [
            TestProfile::Dense,
            TestProfile::SingleBump,
            TestProfile::SeededRandom(7),
        ] {
            for basis in [Basis::haar(), Basis::daubechies(4).unwrap()] {
                let f = make_test_function(0.75, 1.0, 10, profile, basis).unwrap();
                let c = analyze(&f, basis, basis.default_coarse_level()).unwrap();
                let r = holder_coeff_radius(&c, 0.75).unwrap();
                assert!((0.5..=1.0 + 1e-9).contains(&r), "{profile} {basis}: {r}");
            }
        }
        assert!(make_test_function(0.75, 1.0, 3, TestProfile::Dense, Basis::haar()).is_err());
        assert!(make_test_function(-1.0, 1.0, 8, TestProfile::Dense, Basis::haar()).is_err());
    }

    #[test]
    fn single_bump_support() {
        let tf = TestFunction::new(0.5, 1.0, TestProfile::SingleBump).unwrap();
        let c = tf.coeffs(Basis::haar(), 0, 9).unwrap();
        for (l, betas) in c.levels() {
            assert_eq!(betas.iter().filter(|b| **b != 0.0).count(), 1, "level {l}");
            let k = betas.iter().position(|b| *b != 0.0).unwrap();
            let lo = k as f64 / (1u64 << l) as f64;
            let hi = (k + 1) as f64 / (1u64 << l) as f64;
            assert!(lo <= BUMP_CENTER && BUMP_CENTER < hi);
        }
    }

    #[test]
    fn density_variant_is_normalized() {
        let tf = TestFunction::new(0.75, 2.0, TestProfile::SeededRandom(1)).unwrap();
        let p = tf.density(Basis::haar(), 0, 11).unwrap();
        assert!((p.integral() - 1.0).abs() < 1e-9);
        assert!(p.min() > 0.0);
    }

    #[test]
    fn projection_does_not_increase_holder_radius() {
        let f =
            make_test_function(0.6, 1.0, 10, TestProfile::SeededRandom(2), Basis::haar()).unwrap();
        let r = holder_coeff_radius(&analyze(&f, Basis::haar(), 0).unwrap(), 0.6).unwrap();
        for j in 0..=10 {
            let p = project(&f, Basis::haar(), j).unwrap();
            let rp = holder_coeff_radius(&analyze(&p, Basis::haar(), 0).unwrap(), 0.6).unwrap();
            assert!(rp <= r + 1e-12);
        }
    }

    #[test]
    fn profile_parsing() {
        assert_eq!("dense".parse::<TestProfile>().unwrap(), TestProfile::Dense);
        assert_eq!(
            "seeded-random:9".parse::<TestProfile>().unwrap(),
            TestProfile::SeededRandom(9)
        );
        assert_eq!(
            "single-bump".parse::<TestProfile>().unwrap(),
            TestProfile::SingleBump
        );
        assert!("bumpy".parse::<TestProfile>().is_err());
    }
}
