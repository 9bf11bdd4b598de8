pub mod blossom;
pub mod chain;
pub mod cli;
pub mod code;
pub mod decoder;
pub mod error;
pub mod gf2;
pub mod matching;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
