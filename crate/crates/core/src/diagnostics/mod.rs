//! Instrumented quantities, constants and pathwise checks.

mod checks;
mod constants;
mod ddouble;
mod mds;
mod record;
mod stopping;

pub use checks::*;
pub use constants::*;
pub use mds::*;
pub use record::*;
pub use stopping::*;
