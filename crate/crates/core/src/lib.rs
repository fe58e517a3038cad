pub mod cli;
pub mod error;
pub mod homalg;
pub mod mult;
pub mod orbitmodel;
pub mod pathindex;
pub mod recurrence;
pub mod shdim;
pub mod symlin;

pub use error::{Error, Result};
