//! Exact solutions of the single-impurity Hatano-Nelson ring and the
//! non-reciprocal SSH ring, with a dense brute-force backend for checking
//! them, localization observables, critical impurity strengths, and
//! spectral-winding response tools.

pub mod characteristic;
pub mod dense;
pub mod error;
pub mod model;
pub mod observables;
pub mod roots;
pub mod secular;
pub mod ssh;
pub mod winding;

pub use error::{Error, Result};
pub use num_complex::Complex64;
