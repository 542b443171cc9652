//! Analyze a test function, check reconstruction, and look at its norms.

use contractlab::space::{
    besov_norm, holder_coeff_radius, lr_norm, BesovIndex, NormIndex, TestFunction, TestProfile,
};
use contractlab::wavelet::{analyze, project, synthesize, Basis};

fn main() -> contractlab::Result<()> {
    let alpha = 0.75;
    let f = TestFunction::new(alpha, 1.0, TestProfile::SingleBump)?;
    for basis in [Basis::haar(), Basis::daubechies(4)?] {
        let j0 = basis.default_coarse_level();
        let grid = f.grid(basis, j0, 12)?;
        let coeffs = analyze(&grid, basis, j0)?;
        let back = synthesize(&coeffs)?;
        println!(
            "{basis}: {} coefficients, reconstruction error {:.1e}",
            coeffs.count(),
            back.difference(&grid).max_abs()
        );
        println!(
            "  Holder radius at alpha={alpha}: {:.4}",
            holder_coeff_radius(&coeffs, alpha)?
        );
        let b = BesovIndex::new(0.5, NormIndex::Finite(2.0), NormIndex::Finite(2.0))?;
        println!("  B^0.5_22 norm: {:.4}", besov_norm(&coeffs, b));
        for j in [2, 4, 6, 8] {
            let err = project(&grid, basis, j)?.difference(&grid);
            println!(
                "  j={j}: |f - K_j f|_1 = {:.2e}  |.|_2 = {:.2e}  |.|_inf = {:.2e}",
                lr_norm(&err, NormIndex::Finite(1.0)),
                lr_norm(&err, NormIndex::Finite(2.0)),
                lr_norm(&err, NormIndex::Infinity)
            );
        }
    }
    Ok(())
}
