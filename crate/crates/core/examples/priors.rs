//! Draws from each prior, conditioning acceptance, and small-ball estimates.

use contractlab::priors::{
    small_ball_prob, small_ball_splitting, DiagGaussianPrior, PriorSpec, ReleasedIbm,
    UniformSeriesPrior,
};
use contractlab::seed::stream;
use contractlab::space::holder_coeff_radius;
use contractlab::wavelet::{Basis, GridFunction};

fn main() -> contractlab::Result<()> {
    let specs = [
        PriorSpec::UniformSeries(UniformSeriesPrior::new(Basis::haar(), 0, 0.75, 1.0, 10)?),
        PriorSpec::DiagGaussian(DiagGaussianPrior::new(Basis::daubechies(4)?, 3, 1.0, 10)?),
        PriorSpec::DirichletHistogram { level: 5 },
        PriorSpec::ReleasedIbm {
            process: ReleasedIbm::new(1.5, 10, true)?,
            c: Some(3.0),
        },
    ];
    for spec in &specs {
        let mut rng = stream(1, spec.name(), 0, 0);
        let draw = spec.sample(&mut rng)?;
        let radius = match &draw.coeffs {
            Some(c) => format!("{:.3}", holder_coeff_radius(c, 0.75)?),
            None => "-".into(),
        };
        println!(
            "{:<20} sup {:.3}  min {:+.3}  max {:+.3}  Holder(0.75) {radius}  attempts {}",
            spec.name(),
            draw.function.max_abs(),
            draw.function.min(),
            draw.function.max(),
            draw.attempts
        );
    }

    let ibm = ReleasedIbm::new(1.5, 10, true)?;
    for c in [1.0, 2.0, 4.0] {
        let acc = ibm.acceptance(c, 2000, &mut stream(2, "acceptance", 0, 0))?;
        println!(
            "P(|W|_inf <= {c}) ~ {:.3} [{:.3}, {:.3}]",
            acc.estimate, acc.lower, acc.upper
        );
    }

    let bm = ReleasedIbm::new(0.5, 8, true)?;
    let zero = GridFunction::zeros(8);
    for eps in [0.5, 0.35, 0.25] {
        let crude = small_ball_prob(&bm, &zero, eps, 10_000, &mut stream(3, "crude", 0, 0))?;
        let split = small_ball_splitting(&bm, &zero, eps, 10_000, &mut stream(3, "split", 0, 0))?;
        println!(
            "eps {eps}: crude {:.2e} (upper {:.2e})  splitting {:.3e} +/- {:.3} in log",
            crude.proportion.estimate, crude.proportion.upper, split.estimate, split.log_std_error
        );
    }
    Ok(())
}
