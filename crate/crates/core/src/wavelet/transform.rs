use super::basis::Basis;
use super::grid::GridFunction;
use crate::error::{invalid, Result};

/// Wavelet coefficients of a function on [0,1]: `2^j0` scaling coefficients at
/// the coarse level and detail arrays for every level `j0 <= l < jmax`.
///
/// Coefficients are continuum-normalized, i.e. `alpha_k ~ int phi_{j0,k} f` and
/// `beta_{lk} ~ int psi_{lk} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeffs {
    basis: Basis,
    j0: u32,
    scaling: Vec<f64>,
    details: Vec<Vec<f64>>,
}

impl WaveletCoeffs {
    pub fn new(basis: Basis, j0: u32, scaling: Vec<f64>, details: Vec<Vec<f64>>) -> Result<Self> {
        let c = Self {
            basis,
            j0,
            scaling,
            details,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn zeros(basis: Basis, j0: u32, jmax: u32) -> Self {
        assert!(jmax >= j0, "jmax {jmax} below j0 {j0}");
        Self {
            basis,
            j0,
            scaling: vec![0.0; 1 << j0],
            details: (j0..jmax).map(|l| vec![0.0; 1 << l]).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.scaling.len() != 1usize << self.j0 {
            return invalid(format!(
                "scaling array has {} entries, expected 2^{} = {}",
                self.scaling.len(),
                self.j0,
                1usize << self.j0
            ));
        }
        for (i, d) in self.details.iter().enumerate() {
            let level = self.j0 as usize + i;
            if d.len() != 1usize << level {
                return invalid(format!(
                    "detail level {level} has {} entries, expected {}",
                    d.len(),
                    1usize << level
                ));
            }
        }
        let finite = self
            .scaling
            .iter()
            .chain(self.details.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return invalid("non-finite wavelet coefficient");
        }
        Ok(())
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn j0(&self) -> u32 {
        self.j0
    }

    pub fn jmax(&self) -> u32 {
        self.j0 + self.details.len() as u32
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut [f64] {
        &mut self.scaling
    }

    /// All detail levels, coarsest first.
    pub fn details(&self) -> &[Vec<f64>] {
        &self.details
    }

    /// Detail coefficients `beta_{level, .}`.
    pub fn level(&self, level: u32) -> &[f64] {
        &self.details[(level - self.j0) as usize]
    }

    pub fn level_mut(&mut self, level: u32) -> &mut [f64] {
        &mut self.details[(level - self.j0) as usize]
    }

    /// Iterator over `(level, betas)` pairs.
    pub fn levels(&self) -> impl Iterator<Item = (u32, &[f64])> {
        self.details
            .iter()
            .enumerate()
            .map(move |(i, d)| (self.j0 + i as u32, d.as_slice()))
    }

    pub fn count(&self) -> usize {
        self.scaling.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    pub fn same_shape(&self, other: &WaveletCoeffs) -> bool {
        self.j0 == other.j0 && self.details.len() == other.details.len()
    }

    /// Every coefficient, scaling block first.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.scaling
            .iter()
            .chain(self.details.iter().flatten())
            .copied()
    }

    /// Applies `f` to every coefficient in [`iter`](Self::iter) order.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            basis: self.basis,
            j0: self.j0,
            scaling: self.scaling.iter().map(|&v| f(v)).collect(),
            details: self
                .details
                .iter()
                .map(|d| d.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    /// Coefficient-wise combination of two trees of identical shape.
    pub fn zip_with(
        &self,
        other: &WaveletCoeffs,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        if !self.same_shape(other) {
            return invalid("coefficient trees have different shapes");
        }
        Ok(Self {
            basis: self.basis,
            j0: self.j0,
            scaling: self
                .scaling
                .iter()
                .zip(&other.scaling)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            details: self
                .details
                .iter()
                .zip(&other.details)
                .map(|(x, y)| x.iter().zip(y).map(|(&a, &b)| f(a, b)).collect())
                .collect(),
        })
    }

    pub fn scale(&self, t: f64) -> Self {
        self.map(|v| t * v)
    }

    /// Zeroes every detail level `>= level`.
    pub fn truncate_from(&mut self, level: u32) {
        for (l, d) in self.details.iter_mut().enumerate() {
            if self.j0 + l as u32 >= level {
                d.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    /// Sum of squares of all coefficients.
    pub fn energy(&self) -> f64 {
        self.iter().map(|v| v * v).sum()
    }
}

fn analysis_step(low: &[f64], high: &[f64], input: &[f64], approx: &mut [f64], detail: &mut [f64]) {
    let len = input.len();
    for k in 0..len / 2 {
        let (mut a, mut d) = (0.0, 0.0);
        for (n, (&h, &g)) in low.iter().zip(high).enumerate() {
            let x = input[(2 * k + n) % len];
            a += h * x;
            d += g * x;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

fn synthesis_step(low: &[f64], high: &[f64], approx: &[f64], detail: &[f64], out: &mut [f64]) {
    let len = out.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..approx.len() {
        for (n, (&h, &g)) in low.iter().zip(high).enumerate() {
            out[(2 * k + n) % len] += h * approx[k] + g * detail[k];
        }
    }
}

/// Forward transform of `f` down to coarse level `j0`.
///
/// Grid samples are scaled by `2^{-J/2}` so the finest-level scaling coefficients
/// equal `int phi_{J,k} f` for the piecewise-constant interpolant; for Haar every
/// returned coefficient is then the exact continuum integral.
pub fn analyze(f: &GridFunction, basis: Basis, j0: u32) -> Result<WaveletCoeffs> {
    if f.level() < j0 {
        return invalid(format!(
            "grid level {} is below coarse level {j0}",
            f.level()
        ));
    }
    if let Some(k) = f.values().iter().position(|v| !v.is_finite()) {
        return invalid(format!("non-finite value at grid index {k}"));
    }
    let low = basis.filter();
    let high = basis.high_pass();
    let norm = (-(f.level() as f64) / 2.0).exp2();
    let mut current: Vec<f64> = f.values().iter().map(|v| v * norm).collect();
    let mut details = Vec::with_capacity((f.level() - j0) as usize);
    for _ in j0..f.level() {
        let half = current.len() / 2;
        let mut approx = vec![0.0; half];
        let mut detail = vec![0.0; half];
        analysis_step(low, &high, &current, &mut approx, &mut detail);
        details.push(detail);
        current = approx;
    }
    details.reverse();
    Ok(WaveletCoeffs {
        basis,
        j0,
        scaling: current,
        details,
    })
}

/// Inverse transform onto the grid at level `c.jmax()`.
pub fn synthesize(c: &WaveletCoeffs) -> Result<GridFunction> {
    c.validate()?;
    let low = c.basis.filter();
    let high = c.basis.high_pass();
    let mut current = c.scaling.clone();
    for detail in &c.details {
        let mut out = vec![0.0; 2 * current.len()];
        synthesis_step(low, &high, &current, detail, &mut out);
        current = out;
    }
    let norm = (c.jmax() as f64 / 2.0).exp2();
    current.iter_mut().for_each(|v| *v *= norm);
    Ok(GridFunction::from_raw(c.jmax(), current))
}

/// Projection `K_j f` onto `V_j`: all detail levels `>= j` are dropped.
pub fn project(f: &GridFunction, basis: Basis, j: u32) -> Result<GridFunction> {
    if j > f.level() {
        return invalid(format!(
            "projection level {j} exceeds grid level {}",
            f.level()
        ));
    }
    let mut c = analyze(f, basis, j)?;
    c.truncate_from(j);
    synthesize(&c)
}
