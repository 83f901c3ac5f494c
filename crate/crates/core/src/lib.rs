//! Normal-form coefficients for periodically forced delay differential
//! equations.

pub mod charmatrix;
pub mod error;
pub mod integrator;
pub mod model;
pub mod normal_form;
pub mod periodic;
pub mod series;
pub mod wright;

pub use error::{Error, Result};
