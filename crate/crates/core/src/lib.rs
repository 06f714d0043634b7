//! Averaging operators on finite metric measure spaces.

pub mod cli;
pub mod compactness;
pub mod counterexample;
pub mod error;
pub mod operator;
pub mod regularity;
pub mod report;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
