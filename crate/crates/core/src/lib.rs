//! Instrumented AdaGrad-Norm and RMSProp with pathwise stability diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod optimizers;
pub mod problems;
pub mod stream;
pub mod vector;

pub use error::{Error, Result};
pub use stream::{split_stream, RandomStream, SeedSpec};
pub use vector::Vector;
