//! Rate schedules and exact contraction exponents.

use contractlab::rates::{contraction_exponent_exact, parse_rational, DeltaForm, RateSchedule};
use contractlab::space::NormIndex;

fn main() -> contractlab::Result<()> {
    let alpha = 1.0;
    println!(
        "{:>4} {:>8} {:>9} {:>9} {:>9} {:>4}  undersmoothed",
        "r", "n", "eps_n", "delta_n", "bounded", "J_n"
    );
    for r in [
        NormIndex::Finite(1.5),
        NormIndex::Finite(2.0),
        NormIndex::Finite(4.0),
        NormIndex::Infinity,
    ] {
        for k in [10, 14, 18] {
            let s = RateSchedule::new(alpha, r, 1 << k, 0.0, 1.0)?;
            let bounded = s
                .delta(DeltaForm::Bounded)
                .map(|d| format!("{d:.4}"))
                .unwrap_or_else(|_| "-".into());
            println!(
                "{:>4} {:>8} {:>9.4} {:>9.4} {:>9} {:>4}  {}",
                r.to_string(),
                s.n,
                s.eps_n,
                s.delta_n,
                bounded,
                s.j_n,
                s.feasibility().undersmoothed
            );
        }
    }

    for a in ["1/2", "3/4", "1", "2"] {
        let exps: Vec<String> = [Some("1"), Some("2"), Some("4"), None]
            .into_iter()
            .map(|r| {
                let r = r.map(parse_rational).transpose()?;
                Ok(contraction_exponent_exact(parse_rational(a)?, r)?.to_string())
            })
            .collect::<contractlab::Result<_>>()?;
        println!("alpha = {a}: r = 1, 2, 4, inf -> {}", exps.join(", "));
    }
    Ok(())
}
