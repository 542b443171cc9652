//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use contractlab::contraction::CurveSettings;
use contractlab::density_tests::{
    bump_alternative, calibrate_m0, error_rates, moment_ratio_check, KernelKind,
};
use contractlab::fit::fit_curve;
use contractlab::histogram::{self, bin_of, DirichletHistogram};
use contractlab::priors::{small_ball_prob, small_ball_splitting, PriorVariances, ReleasedIbm};
use contractlab::rates::{contraction_exponent, RateSchedule};
use contractlab::space::{NormIndex, TestFunction, TestProfile};
use contractlab::stats::least_squares;
use contractlab::wavelet::{analyze, synthesize, Basis, GridFunction, WaveletCoeffs};
use contractlab::white_noise::{self, posterior, NoisyCoeffs, WhiteNoiseSetup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RS: [NormIndex; 3] = [
    NormIndex::Finite(1.0),
    NormIndex::Finite(2.0),
    NormIndex::Infinity,
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn powers(a: u32, b: u32, step: usize) -> Vec<u64> {
    (a..=b).step_by(step).map(|k| 1u64 << k).collect()
}

fn white_noise_slopes(basis: Basis, alpha: f64) -> Outcome {
    let j0 = basis.default_coarse_level().max(1);
    let truth = TestFunction::new(alpha, 1.0, TestProfile::Dense)
        .unwrap()
        .coeffs(basis, j0, 14)
        .unwrap();
    let setup = WhiteNoiseSetup::new(truth, alpha, 1.0, 2).unwrap();
    let settings = CurveSettings {
        n_list: powers(10, 22, 2),
        rs: RS.to_vec(),
        reps: 200,
        seed: 20240611,
        radius_multiplier: 1.0,
    };
    let points = white_noise::contraction_curve(&setup, &settings).unwrap();
    let target = -alpha / (2.0 * alpha + 1.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for r in RS {
        let slope = fit_curve(&points, r).unwrap().slope;
        pass &= (slope - target).abs() <= 0.07;
        parts.push(format!("r={r} {slope:.3}"));
    }
    outcome(
        pass,
        format!(
            "{basis} alpha={alpha}: {} (target {target:.3} +/- 0.07)",
            parts.join(", ")
        ),
    )
}

fn white_noise_slope_check() -> Outcome {
    let haar = white_noise_slopes(Basis::haar(), 0.75);
    let db4 = white_noise_slopes(Basis::daubechies(4).unwrap(), 1.0);
    outcome(
        haar.pass && db4.pass,
        format!("{}; {}", haar.detail, db4.detail),
    )
}

fn posterior_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples = 10_000;
    let mut worst: f64 = 0.0;
    let mut exact_err: f64 = 0.0;
    for _ in 0..20 {
        let (j0, jmax) = (1, 4);
        let n = 1u64 << rng.random_range(0..12);
        let mut draw_mu = || 10f64.powf(rng.random_range(-4.0..0.0));
        let mu = PriorVariances {
            j0,
            scaling: draw_mu(),
            levels: (j0..jmax).map(|_| draw_mu()).collect(),
        };
        let y = WaveletCoeffs::zeros(Basis::haar(), j0, jmax).map(|_| rng.random_range(-2.0..2.0));
        let post = posterior(&mu, &NoisyCoeffs { n, y: y.clone() }).unwrap();

        // prior variance of each coefficient, in iteration order
        let mut prior_var = vec![mu.scaling; y.scaling().len()];
        for l in j0..jmax {
            prior_var.extend(std::iter::repeat_n(mu.level(l), 1 << l));
        }
        let precision = n as f64;
        let oracle: Vec<(f64, f64)> = prior_var
            .iter()
            .zip(y.iter())
            .map(|(&m, yk)| {
                let v = 1.0 / (1.0 / m + precision);
                (v * precision * yk, v)
            })
            .collect();

        let draws: Vec<Vec<f64>> = (0..samples)
            .map(|_| post.sample_coeffs(&mut rng).iter().collect())
            .collect();
        for (k, ((m, v), (pm, pv))) in oracle
            .iter()
            .zip(post.means.iter().zip(post.variances.iter()))
            .enumerate()
        {
            exact_err = exact_err
                .max((m - pm).abs() / (m.abs() + v.sqrt()))
                .max((v - pv).abs() / v);
            let xs: Vec<f64> = draws.iter().map(|d| d[k]).collect();
            let mean = xs.iter().sum::<f64>() / samples as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            let se_mean = (v / samples as f64).sqrt();
            let se_var = v * (2.0 / (samples - 1) as f64).sqrt();
            worst = worst
                .max((mean - m).abs() / se_mean)
                .max((var - v).abs() / se_var);
        }
    }
    outcome(
        worst <= 4.0 && exact_err < 1e-10,
        format!("20 configs x 16 coefficients: max deviation {worst:.2} SE, closed-form rel. error {exact_err:.1e}"),
    )
}

fn dwt_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bases = [
        Basis::haar(),
        Basis::daubechies(2).unwrap(),
        Basis::daubechies(4).unwrap(),
        Basis::daubechies(8).unwrap(),
    ];
    let (mut recon, mut parseval): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let basis = bases[i % bases.len()];
        let level = rng.random_range(basis.default_coarse_level().max(1)..=14);
        let j0 = rng.random_range(basis.default_coarse_level()..=level);
        let f = GridFunction::new(
            level,
            (0..1usize << level)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        )
        .unwrap();
        let c = analyze(&f, basis, j0).unwrap();
        let back = synthesize(&c).unwrap();
        recon = recon.max(back.difference(&f).max_abs());
        let l2 = f.values().iter().map(|v| v * v).sum::<f64>() * f.step();
        parseval = parseval.max((c.energy() - l2).abs());
    }
    outcome(
        recon <= 1e-10 && parseval <= 1e-8,
        format!("100 signals: max reconstruction error {recon:.1e}, Parseval error {parseval:.1e}"),
    )
}

fn histogram_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 400_000;
    let mut worst: f64 = 0.0;
    for (j, n) in [(1u32, 1usize), (1, 4), (2, 2), (2, 3), (2, 4)] {
        let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let conj = DirichletHistogram::posterior_update(j, &data)
            .unwrap()
            .mean_weights();
        let bins = 1usize << j;
        // flat Dirichlet draws as normalized exponentials
        let (mut acc, mut total) = (vec![0.0; bins], 0.0);
        for _ in 0..draws {
            let e: Vec<f64> = (0..bins)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let s: f64 = e.iter().sum();
            let w: Vec<f64> = e.iter().map(|x| x / s).collect();
            let lik: f64 = data
                .iter()
                .map(|&x| bins as f64 * w[bin_of(x, j).unwrap()])
                .product();
            total += lik;
            acc.iter_mut().zip(&w).for_each(|(a, wk)| *a += lik * wk);
        }
        for (a, m) in acc.iter().zip(&conj) {
            worst = worst.max((a / total - m).abs() / m);
        }
    }
    outcome(
        worst < 0.02,
        format!(
            "5 (j, n) configs: max relative deviation {:.2}%",
            100.0 * worst
        ),
    )
}

fn histogram_slope() -> Outcome {
    let alpha = 0.75;
    let p0 = TestFunction::new(alpha, 1.0, TestProfile::Dense)
        .unwrap()
        .density(Basis::haar(), 0, 12)
        .unwrap();
    let settings = CurveSettings {
        n_list: powers(10, 20, 2),
        rs: vec![NormIndex::Finite(1.0)],
        reps: 200,
        seed: 7,
        radius_multiplier: 1.0,
    };
    let points = histogram::contraction_curve(&p0, alpha, &settings).unwrap();
    let slope = fit_curve(&points, NormIndex::Finite(1.0)).unwrap().slope;
    let target = -contraction_exponent(alpha, NormIndex::Finite(1.0));
    outcome(
        (slope + 0.3).abs() <= 0.1,
        format!("r=1 slope {slope:.3} (target -0.3 +/- 0.1; exponent {target:.3})"),
    )
}

fn moment_ratios() -> Outcome {
    let p0 = GridFunction::constant(10, 1.0);
    let js: Vec<u32> = (2..=8).collect();
    let ns = powers(8, 14, 1);
    let mut pass = true;
    let mut parts = Vec::new();
    for r in RS {
        let rows =
            moment_ratio_check(&p0, r, KernelKind::HaarProjection, &js, &ns, 500, 1).unwrap();
        let ratios: Vec<f64> = rows.iter().filter_map(|row| row.ratio).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        pass &= hi / lo <= 4.0;
        parts.push(format!(
            "r={r} {} cells spread {:.2}",
            ratios.len(),
            hi / lo
        ));
    }
    outcome(pass, format!("{} (bound 4)", parts.join(", ")))
}

fn test_power() -> Outcome {
    let p0 = GridFunction::constant(10, 1.0);
    let r = NormIndex::Infinity;
    let kind = KernelKind::HaarProjection;
    let first = RateSchedule::new(1.0, r, 1 << 10, 0.0, 1.0).unwrap();
    let m0 = calibrate_m0(&p0, r, &first, kind, 1000, 0.99, 3).unwrap();
    let mut type_i = Vec::new();
    let mut type_ii = Vec::new();
    for n in powers(10, 14, 2) {
        let s = RateSchedule::new(1.0, r, n, 0.0, 1.0).unwrap();
        let alt = bump_alternative(&p0, 10.0 * s.delta_n, s.j_n, (1usize << s.j_n) / 3).unwrap();
        let rep = error_rates(&p0, &alt, r, &s, kind, m0, 200, 3).unwrap();
        type_i.push(rep.type_i.estimate);
        type_ii.push(rep.type_ii.estimate);
    }
    let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    let last = type_i.len() - 1;
    outcome(
        type_i[last] <= 0.05
            && type_ii[last] <= 0.05
            && nonincreasing(&type_i)
            && nonincreasing(&type_ii),
        format!("M0 {m0:.3}; type I {type_i:?}, type II {type_ii:?} over n = 2^10, 2^12, 2^14"),
    )
}

fn exponent_table() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_contractlab"))
        .args(["exponents", "--alpha", "1", "--r", "1", "2", "4", "inf"])
        .output()
        .expect("run contractlab");
    let text = String::from_utf8_lossy(&out.stdout);
    let got: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.next()?.to_string(), it.next()?.to_string()))
        })
        .collect();
    let want = [("1", "1/3"), ("2", "1/3"), ("4", "1/4"), ("inf", "1/6")];
    let pass = out.status.success()
        && got.len() == want.len()
        && got
            .iter()
            .zip(want)
            .all(|((r, e), (wr, we))| r == wr && e == we);
    let shown: Vec<String> = got.iter().map(|(r, e)| format!("r={r}: {e}")).collect();
    outcome(pass, format!("alpha=1 -> {}", shown.join(", ")))
}

fn small_ball_shape() -> Outcome {
    let process = ReleasedIbm::new(0.5, 8, true).unwrap();
    let center = GridFunction::zeros(8);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut parts = Vec::new();
    for (i, eps) in [0.5, 0.35, 0.25].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let split = small_ball_splitting(&process, &center, eps, 10_000, &mut rng).unwrap();
        let crude = small_ball_prob(&process, &center, eps, 10_000, &mut rng).unwrap();
        parts.push(format!(
            "eps={eps}: {:.2e} (crude {:.1e})",
            split.estimate, crude.proportion.estimate
        ));
        if !split.degenerate {
            x.push(eps.powi(-2));
            y.push(-split.log_estimate);
        }
    }
    match least_squares(&x, &y) {
        Ok(fit) => outcome(
            x.len() == 3 && fit.slope > 0.0 && fit.r_squared > 0.8,
            format!(
                "{}; slope {:.3}, R^2 {:.4}",
                parts.join(", "),
                fit.slope,
                fit.r_squared
            ),
        ),
        Err(e) => outcome(false, format!("{}; no fit: {e}", parts.join(", "))),
    }
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 9] = [
        ("white-noise contraction slopes", white_noise_slope_check),
        ("Gaussian posterior oracle", posterior_oracle),
        ("wavelet transform exactness", dwt_exactness),
        ("histogram posterior oracle", histogram_oracle),
        ("histogram contraction slope", histogram_slope),
        ("kernel moment ratios bounded", moment_ratios),
        ("plug-in test power", test_power),
        ("exact exponent table", exponent_table),
        ("small-ball exponent shape", small_ball_shape),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
