pub mod cofinite;
pub mod error;
pub mod reduce;
pub mod exact;
pub mod fusion;
pub mod ode;
pub mod voa;

pub use error::{Error, Result};
