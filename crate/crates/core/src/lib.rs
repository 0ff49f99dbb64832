//! Verification of generalized symmetries of 1+1-dimensional PDE systems
//! with boundary conditions, and the non-observability certificates they
//! yield.

pub mod symbolic;
pub mod fields;
pub mod reduction;
pub mod analysis;
pub mod numeric;
