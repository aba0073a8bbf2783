//! emlab: a strong-convergence laboratory for one-dimensional SDEs with
//! irregular coefficients.

pub mod coefficients;
pub mod error;
mod numerics;

pub use error::{EmlabError, Result};
