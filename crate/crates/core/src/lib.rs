//! Numerics for fractional cohomological equations over SL(2,R) Fourier models,
//! root-system exponent bookkeeping and the higher-order mixing scheduler.

// Range checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod decay;
pub mod directint;
pub mod error;
pub mod fracsolve;
pub mod mixsched;
pub mod rootsys;
pub mod selftest;
pub mod sl2model;

pub use error::{Error, Result};
pub use num_complex::Complex64;
