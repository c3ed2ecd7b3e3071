pub mod error;
pub mod dataset;
pub mod quadrature;
pub mod transport;
pub mod ml;
pub mod eval;

pub use error::{Error, Result};
