//! Exact Gromov-Hausdorff distances between finite metric spaces.

pub mod cone;
pub mod correspondence;
pub mod embed;
pub mod error;
pub mod generic;
pub mod ghdist;
pub mod io;
pub mod metricspace;
pub mod stability;

pub use error::{GhError, Result};
