//! Dirichlet histogram posterior for density estimation.

use contractlab::contraction::CurveSettings;
use contractlab::fit::fit_curve;
use contractlab::histogram::{
    contraction_curve, histogram_level, DensitySampler, DirichletHistogram,
};
use contractlab::rates::contraction_exponent;
use contractlab::seed::stream;
use contractlab::space::{lr_norm, NormIndex, TestFunction, TestProfile};
use contractlab::wavelet::Basis;

fn main() -> contractlab::Result<()> {
    let alpha = 0.75;
    let p0 = TestFunction::new(alpha, 1.0, TestProfile::Dense)?.density(Basis::haar(), 0, 12)?;

    let n = 1u64 << 14;
    let j = histogram_level(alpha, n)?;
    let mut rng = stream(1, "example", n, 0);
    let counts = DensitySampler::new(&p0)?.bin_counts(j, n, &mut rng)?;
    let post = DirichletHistogram::from_counts(j, &counts)?;
    let err = post.mean_density().refine(p0.level())?.difference(&p0);
    println!(
        "n={n}, level {j}: posterior mean L1 error {:.4}",
        lr_norm(&err, NormIndex::Finite(1.0))
    );

    let rs = vec![
        NormIndex::Finite(1.0),
        NormIndex::Finite(2.0),
        NormIndex::Infinity,
    ];
    let settings = CurveSettings {
        n_list: (10..=20).step_by(2).map(|k| 1u64 << k).collect(),
        rs: rs.clone(),
        reps: 100,
        seed: 7,
        radius_multiplier: 1.0,
    };
    let points = contraction_curve(&p0, alpha, &settings)?;
    for r in rs {
        let fit = fit_curve(&points, r)?;
        println!(
            "r={r}: slope {:.3} (R^2 {:.4}), exponent {:.3}",
            fit.slope,
            fit.r_squared,
            contraction_exponent(alpha, r)
        );
    }
    Ok(())
}
