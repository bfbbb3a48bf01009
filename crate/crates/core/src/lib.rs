pub mod classifier;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod linalg;
pub mod symplectic;
pub mod tfa;
pub mod weights;

pub use error::{Error, Result};
