//! Batch front end: load system-definition files and run symbolic checks,
//! simulations and indistinguishability experiments on them.

pub mod app;
pub mod sysfile;

pub use app::run;
pub use sysfile::{load, parse_system, LoadError, SystemFile};
