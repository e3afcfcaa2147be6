pub mod bargmann;
pub mod epsiloncs;
pub mod error;
pub mod polyfock;
pub mod quad;
pub mod sampled;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
