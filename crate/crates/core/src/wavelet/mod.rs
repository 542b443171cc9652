//! Dyadic wavelet analysis and synthesis on [0,1].
//!
//! Two families are provided: Haar, which is exact on the interval, and
//! periodized Daubechies of orders 2 to 8 for smooth periodic functions. The
//! projection kernel `K_j` is realized by truncating the expansion at level `j`.

mod basis;
mod grid;
mod transform;

pub use basis::{Basis, Family};
pub use grid::{GridFunction, MAX_LEVEL};
pub use transform::{analyze, project, synthesize, WaveletCoeffs};
