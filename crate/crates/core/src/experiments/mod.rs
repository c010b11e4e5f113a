//! Seeded Monte Carlo batches: configuration, execution, estimators and output files.

mod assumptions;
mod config;
mod estimators;
mod persist;
mod runner;
mod summary;

pub use assumptions::*;
pub use config::*;
pub use estimators::*;
pub use persist::*;
pub use runner::*;
pub use summary::*;
