//! Contraction of the Gaussian series posterior in the white-noise model.

use contractlab::contraction::CurveSettings;
use contractlab::fit::fit_curve;
use contractlab::rates::minimax_exponent;
use contractlab::space::{NormIndex, TestFunction, TestProfile};
use contractlab::wavelet::Basis;
use contractlab::white_noise::{contraction_curve, WhiteNoiseSetup};

fn main() -> contractlab::Result<()> {
    let alpha = 1.0;
    let basis = Basis::daubechies(4)?;
    let j0 = basis.default_coarse_level().max(1);
    let truth = TestFunction::new(alpha, 1.0, TestProfile::Dense)?.coeffs(basis, j0, 14)?;
    let setup = WhiteNoiseSetup::new(truth, alpha, 1.0, 2)?;
    let rs = vec![
        NormIndex::Finite(1.0),
        NormIndex::Finite(2.0),
        NormIndex::Infinity,
    ];
    let settings = CurveSettings {
        n_list: (10..=20).step_by(2).map(|k| 1u64 << k).collect(),
        rs: rs.clone(),
        reps: 100,
        seed: 1,
        radius_multiplier: 1.0,
    };
    let points = contraction_curve(&setup, &settings)?;
    for p in &points {
        println!(
            "r={:<3} n={:<8} level {:>2}  median loss {:.4}  q90 {:.4}  P(loss > eps_n) {:.2}",
            p.r.to_string(),
            p.n,
            p.level,
            p.loss_median,
            p.loss_q90,
            p.posterior_prob
        );
    }
    for r in rs {
        let fit = fit_curve(&points, r)?;
        println!(
            "r={r}: slope {:.3} (R^2 {:.4}), expected {:.3}",
            fit.slope,
            fit.r_squared,
            -minimax_exponent(alpha)
        );
    }
    Ok(())
}
