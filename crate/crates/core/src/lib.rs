pub mod dop;
pub mod error;
pub mod game;
pub mod identify;
pub mod numerics;
pub mod par;
pub mod partition;
pub mod probabilities;

pub use error::{Error, Result};
