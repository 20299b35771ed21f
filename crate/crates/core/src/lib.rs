pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod hankel;
pub mod heatkernel;
pub mod hormander;
pub mod impower;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
