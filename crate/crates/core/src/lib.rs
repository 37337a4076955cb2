pub mod cli;
pub mod closed_form;
pub mod coulomb;
pub mod error;
pub mod fock;
pub mod pattern;
pub mod physics;

pub use error::{Error, Result};
