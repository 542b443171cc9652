//! Rate arithmetic: `ε_n`, `δ_n`, resolution levels `J_n`, and contraction exponents.
//!
//! All logarithms are natural logarithms.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::space::NormIndex;

/// `ε_n = (n / log n)^{-α/(2α+1)}`.
pub fn epsilon_n(alpha: f64, n: u64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return invalid(format!("alpha must be positive, got {alpha}"));
    }
    if n < 2 {
        return invalid(format!("sample size must be >= 2, got {n}"));
    }
    let n = n as f64;
    Ok((n / n.ln()).powf(-alpha / (2.0 * alpha + 1.0)))
}

/// Which of the two general rate formulas to use for `δ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaForm {
    /// `δ_n = ε_n (n ε_n²)^{1/2 - 1/(2r)} γ_n`, any `1 <= r <= inf`.
    General,
    /// `δ_n = ε_n (n ε_n²)^{1/2 - 1/r̄} γ_n`, bounded densities, `1 < r < inf`.
    Bounded,
}

/// Rate quantities for one `(α, r, n)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct RateSchedule {
    pub alpha: f64,
    pub r: NormIndex,
    pub n: u64,
    pub gamma_log_power: f64,
    pub eps_n: f64,
    pub gamma_n: f64,
    pub delta_n: f64,
    pub j_n: u32,
    pub c_res: f64,
    pub r_bar: NormIndex,
}

/// Boolean checks of the side conditions of the bounded-density rate, taken
/// with constant 1 in place of the `O(·)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    /// `1 < r < 2` and `ε_n <= γ_n (n ε_n²)^{1/r - 1}`; `None` outside that range.
    pub condition_a: Option<bool>,
    /// `2 <= r < inf` and `ε_n² <= γ_n / √n`; `None` outside that range.
    pub condition_b: Option<bool>,
    /// `√n ε_n > 1`.
    pub undersmoothed: bool,
}

impl RateSchedule {
    /// Builds the schedule with `δ_n` from the general formula.
    pub fn new(alpha: f64, r: NormIndex, n: u64, gamma_log_power: f64, c_res: f64) -> Result<Self> {
        if !(gamma_log_power >= 0.0) {
            return invalid(format!(
                "gamma log power must be >= 0, got {gamma_log_power}"
            ));
        }
        if !(c_res > 0.0) || !c_res.is_finite() {
            return invalid(format!("resolution constant must be positive, got {c_res}"));
        }
        let eps_n = epsilon_n(alpha, n)?;
        let nf = n as f64;
        let gamma_n = nf.ln().powf(gamma_log_power);
        let budget = c_res * nf * eps_n * eps_n;
        // largest J with 2^J <= c n eps^2
        let j_n = if budget >= 1.0 {
            budget.log2().floor() as u32
        } else {
            0
        };
        let j_n = if (j_n as f64).exp2() > budget && j_n > 0 {
            j_n - 1
        } else {
            j_n
        };
        let mut s = Self {
            alpha,
            r,
            n,
            gamma_log_power,
            eps_n,
            gamma_n,
            delta_n: 0.0,
            j_n,
            c_res,
            r_bar: r.bar(),
        };
        s.delta_n = s.delta(DeltaForm::General)?;
        Ok(s)
    }

    /// `δ_n` under the chosen formula.
    pub fn delta(&self, form: DeltaForm) -> Result<f64> {
        let size = self.n as f64 * self.eps_n * self.eps_n;
        let exponent = match form {
            DeltaForm::General => 0.5 - 0.5 * self.r.reciprocal(),
            DeltaForm::Bounded => {
                match self.r {
                    NormIndex::Finite(p) if p > 1.0 => {}
                    _ => {
                        return invalid(format!(
                            "bounded-density rate needs 1 < r < inf, got r = {}",
                            self.r
                        ))
                    }
                }
                0.5 - self.r_bar.reciprocal()
            }
        };
        Ok(self.eps_n * size.powf(exponent) * self.gamma_n)
    }

    pub fn feasibility(&self) -> Feasibility {
        let nf = self.n as f64;
        let size = nf * self.eps_n * self.eps_n;
        let (condition_a, condition_b) = match self.r {
            NormIndex::Finite(p) if p > 1.0 && p < 2.0 => (
                Some(self.eps_n <= self.gamma_n * size.powf(1.0 / p - 1.0)),
                None,
            ),
            NormIndex::Finite(p) if p >= 2.0 => (
                None,
                Some(self.eps_n * self.eps_n <= self.gamma_n / nf.sqrt()),
            ),
            _ => (None, None),
        };
        Feasibility {
            condition_a,
            condition_b,
            undersmoothed: nf.sqrt() * self.eps_n > 1.0,
        }
    }
}

/// Convenience wrapper for [`RateSchedule::delta`].
pub fn delta_n(sched: &RateSchedule, form: DeltaForm) -> Result<f64> {
    sched.delta(form)
}

/// `(α - 1/2 + 1/r̄) / (2α + 1)` with `r̄ = max(2, r)`.
pub fn contraction_exponent(alpha: f64, r: NormIndex) -> f64 {
    (alpha - 0.5 + r.bar().reciprocal()) / (2.0 * alpha + 1.0)
}

/// The minimax exponent `α / (2α + 1)`.
pub fn minimax_exponent(alpha: f64) -> f64 {
    alpha / (2.0 * alpha + 1.0)
}

/// Exact contraction exponent for rational `α` and `r` (`None` meaning `r = inf`).
pub fn contraction_exponent_exact(alpha: Ratio<i64>, r: Option<Ratio<i64>>) -> Result<Ratio<i64>> {
    let zero = Ratio::from_integer(0);
    let one = Ratio::from_integer(1);
    let two = Ratio::from_integer(2);
    if alpha <= zero {
        return invalid(format!("alpha must be positive, got {alpha}"));
    }
    let inv_rbar = match r {
        None => zero,
        Some(r) if r < one => return invalid(format!("r must be >= 1, got {r}")),
        Some(r) if r < two => one / two,
        Some(r) => one / r,
    };
    Ok((alpha - one / two + inv_rbar) / (two * alpha + one))
}

/// Parses a decimal or fraction string (`"0.75"`, `"3/4"`, `"1"`) as an exact rational.
pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad_rational(s))?;
        let den: i64 = den.trim().parse().map_err(|_| bad_rational(s))?;
        if den == 0 {
            return Err(bad_rational(s));
        }
        return Ok(Ratio::new(num, den));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad_rational(s));
    }
    let negative = int.starts_with('-');
    let int_val: i64 = if int.is_empty() || int == "-" {
        0
    } else {
        int.parse().map_err(|_| bad_rational(s))?
    };
    let den = 10i64.pow(frac.len() as u32);
    let frac_val: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad_rational(s))?
    };
    let magnitude = int_val.abs() * den + frac_val;
    Ok(Ratio::new(
        if negative { -magnitude } else { magnitude },
        den,
    ))
}

fn bad_rational(s: &str) -> crate::error::Error {
    crate::error::Error::InvalidArgument(format!("cannot parse `{s}` as a rational number"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(p: f64) -> NormIndex {
        NormIndex::Finite(p)
    }

    #[test]
    fn epsilon_formula() {
        let want = (3.0f64 / 3.0f64.ln()).powf(-1.0 / 3.0);
        assert!((epsilon_n(1.0, 3).unwrap() - want).abs() < 1e-15);
        assert!(epsilon_n(1.0, 1).is_err());
        assert!(epsilon_n(0.0, 10).is_err());
    }

    #[test]
    fn epsilon_large_alpha() {
        let n = 1u64 << 20;
        let m = n as f64 / (n as f64).ln();
        let want = m.powf(-0.5) * m.powf(1.0 / (2.0 * 101.0));
        let got = epsilon_n(50.0, n).unwrap();
        assert!((got / want - 1.0).abs() < 0.05);
    }

    #[test]
    fn epsilon_decreasing_and_root_n_growing() {
        for alpha in [0.25, 0.75, 1.0, 3.0] {
            let mut prev_root = 0.0;
            for k in 8..=24 {
                let n = 1u64 << k;
                assert!(epsilon_n(alpha, 2 * n).unwrap() < epsilon_n(alpha, n).unwrap());
                let root = (n as f64).sqrt() * epsilon_n(alpha, n).unwrap();
                assert!(root > prev_root);
                prev_root = root;
            }
        }
    }

    #[test]
    fn delta_special_cases() {
        let s = RateSchedule::new(1.0, fin(1.0), 1 << 12, 0.5, 1.0).unwrap();
        assert!((s.delta(DeltaForm::General).unwrap() - s.eps_n * s.gamma_n).abs() < 1e-15);
        let s = RateSchedule::new(1.0, NormIndex::Infinity, 1 << 12, 0.0, 1.0).unwrap();
        let want = (s.n as f64).sqrt() * s.eps_n * s.eps_n;
        assert!((s.delta_n - want).abs() < 1e-12);
        let s = RateSchedule::new(0.8, fin(2.0), 1 << 12, 1.0, 1.0).unwrap();
        assert!((s.delta(DeltaForm::Bounded).unwrap() - s.eps_n * s.gamma_n).abs() < 1e-15);
        assert!(RateSchedule::new(1.0, fin(1.0), 100, 0.0, 1.0)
            .unwrap()
            .delta(DeltaForm::Bounded)
            .is_err());
        assert!(RateSchedule::new(1.0, NormIndex::Infinity, 100, 0.0, 1.0)
            .unwrap()
            .delta(DeltaForm::Bounded)
            .is_err());
    }

    #[test]
    fn schedule_invariants() {
        for alpha in [0.5, 0.75, 1.0, 2.0] {
            for k in 2..=24 {
                let n = 1u64 << k;
                let s = RateSchedule::new(alpha, fin(3.0), n, 1.0, 1.0).unwrap();
                let budget = n as f64 * s.eps_n * s.eps_n;
                assert!((s.j_n as f64).exp2() <= budget.max(1.0));
                assert!(((s.j_n + 1) as f64).exp2() > budget / 2.0);
                assert_eq!(s.r_bar, fin(3.0));
                if n >= 3 {
                    assert!(s.gamma_n >= 1.0);
                }
            }
        }
    }

    #[test]
    fn general_rate_is_slower_than_bounded_for_small_r() {
        for r in [1.1, 1.5, 1.9, 2.0] {
            assert!(0.5 - 0.5 / r >= 0.5 - 1.0 / fin(r).bar().as_f64() - 1e-15);
            let s = RateSchedule::new(1.0, fin(r), 1 << 16, 0.0, 1.0).unwrap();
            assert!(
                s.delta(DeltaForm::General).unwrap()
                    >= s.delta(DeltaForm::Bounded).unwrap() - 1e-15
            );
        }
    }

    #[test]
    fn exponent_values() {
        assert!((contraction_exponent(1.0, fin(2.0)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((contraction_exponent(1.0, NormIndex::Infinity) - 1.0 / 6.0).abs() < 1e-15);
        assert!((contraction_exponent(0.75, fin(1.0)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn exponent_shape() {
        for alpha in [0.3, 0.75, 1.0, 4.0] {
            for r in [1.0, 1.3, 2.0] {
                assert_eq!(contraction_exponent(alpha, fin(r)), minimax_exponent(alpha));
            }
            let mut prev = contraction_exponent(alpha, fin(2.0));
            for r in [2.5, 4.0, 10.0] {
                let e = contraction_exponent(alpha, fin(r));
                assert!(e < prev);
                prev = e;
            }
            assert!(contraction_exponent(alpha, NormIndex::Infinity) < prev);
            assert!(
                contraction_exponent(alpha + 0.1, fin(5.0)) > contraction_exponent(alpha, fin(5.0))
            );
        }
        let ratio = contraction_exponent(100.0, NormIndex::Infinity)
            / contraction_exponent(100.0, fin(2.0));
        assert!(ratio > 0.99);
    }

    #[test]
    fn exact_exponents() {
        let one = Ratio::from_integer(1);
        assert_eq!(
            contraction_exponent_exact(one, Some(Ratio::from_integer(2))).unwrap(),
            Ratio::new(1, 3)
        );
        assert_eq!(
            contraction_exponent_exact(one, Some(one)).unwrap(),
            Ratio::new(1, 3)
        );
        assert_eq!(
            contraction_exponent_exact(one, Some(Ratio::from_integer(4))).unwrap(),
            Ratio::new(1, 4)
        );
        assert_eq!(
            contraction_exponent_exact(one, None).unwrap(),
            Ratio::new(1, 6)
        );
        assert_eq!(
            contraction_exponent_exact(Ratio::new(3, 4), Some(one)).unwrap(),
            Ratio::new(3, 10)
        );
        assert!(contraction_exponent_exact(Ratio::from_integer(0), None).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("0.75").unwrap(), Ratio::new(3, 4));
        assert_eq!(parse_rational("3/4").unwrap(), Ratio::new(3, 4));
        assert_eq!(parse_rational("1").unwrap(), Ratio::from_integer(1));
        assert_eq!(parse_rational("-1.5").unwrap(), Ratio::new(-3, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn feasibility_flags() {
        let s = RateSchedule::new(1.0, fin(1.5), 1 << 14, 0.0, 1.0).unwrap();
        assert!(s.feasibility().condition_a.is_some());
        assert!(s.feasibility().condition_b.is_none());
        let s = RateSchedule::new(1.0, fin(3.0), 1 << 14, 0.0, 1.0).unwrap();
        assert!(s.feasibility().condition_b.is_some());
        assert!(s.feasibility().undersmoothed);
    }
}
