pub mod classical;
pub mod cli;
pub mod energy;
pub mod error;
pub mod operator;
pub mod payoff;
pub mod solver;
pub mod specfile;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
