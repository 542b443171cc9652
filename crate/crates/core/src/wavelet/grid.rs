use crate::error::{invalid, Result};

/// Largest dyadic resolution accepted for a grid function.
pub const MAX_LEVEL: u32 = 24;

/// A real function on [0,1] sampled at the `2^level` left endpoints `k / 2^level`.
///
/// The sample at index `k` is read as the value of the function on the dyadic
/// cell `[k 2^-level, (k+1) 2^-level)`; integrals are Riemann sums over cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    level: u32,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(level: u32, values: Vec<f64>) -> Result<Self> {
        if level > MAX_LEVEL {
            return invalid(format!("grid level {level} exceeds {MAX_LEVEL}"));
        }
        if values.len() != 1usize << level {
            return invalid(format!(
                "grid level {level} needs {} values, got {}",
                1usize << level,
                values.len()
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite value at grid index {k}"));
        }
        Ok(Self { level, values })
    }

    pub fn constant(level: u32, c: f64) -> Self {
        Self {
            level,
            values: vec![c; 1usize << level],
        }
    }

    pub fn zeros(level: u32) -> Self {
        Self::constant(level, 0.0)
    }

    /// Samples `f` at the left endpoints of the grid.
    pub fn from_fn(level: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (-(level as f64)).exp2();
        Self::new(
            level,
            (0..1usize << level).map(|k| f(k as f64 * h)).collect(),
        )
    }

    pub(crate) fn from_raw(level: u32, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), 1usize << level);
        Self { level, values }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Cell width `2^-level`.
    pub fn step(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Riemann-sum integral over [0,1].
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Piecewise-constant upsampling to a finer level.
    pub fn refine(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return invalid(format!(
                "cannot refine level {} down to {level}",
                self.level
            ));
        }
        let rep = 1usize << (level - self.level);
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, rep))
            .collect();
        Ok(Self { level, values })
    }

    /// Cell averages at a coarser level (the Haar projection onto `V_level`).
    pub fn coarsen(&self, level: u32) -> Result<Self> {
        if level > self.level {
            return invalid(format!("cannot coarsen level {} up to {level}", self.level));
        }
        let block = 1usize << (self.level - level);
        let values = self
            .values
            .chunks_exact(block)
            .map(|c| c.iter().sum::<f64>() / block as f64)
            .collect();
        Ok(Self { level, values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            level: self.level,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self - other`, evaluated at the finer of the two resolutions.
    pub fn difference(&self, other: &GridFunction) -> GridFunction {
        let level = self.level.max(other.level);
        let a = self.refine(level).expect("refine to finer level");
        let b = other.refine(level).expect("refine to finer level");
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        Self { level, values }
    }
}
