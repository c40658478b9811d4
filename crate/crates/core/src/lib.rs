pub mod cli;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod model;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
