pub mod error;
pub mod model;
pub mod dressing;
pub mod excitations;
pub mod specfun;
pub mod amplitudes;
pub mod asymptote;
pub mod fflab;
pub mod cli;
mod quad;

pub use error::{Error, Result, SaddleError};
