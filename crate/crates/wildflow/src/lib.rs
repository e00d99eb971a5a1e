pub mod ansatz;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod profiles;
pub mod quad;
pub mod scheme;
pub mod verify;
pub mod waves;

pub use error::{parse_json, Error, Result};
