// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod contraction;
pub mod error;
pub mod fit;
pub mod harness;
pub mod histogram;
pub mod priors;
pub mod rates;
pub mod seed;
pub mod space;
pub mod stats;
pub mod wavelet;
pub mod white_noise;

pub use error::{Error, Result};
