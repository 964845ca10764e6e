pub mod classical;
pub mod error;
pub mod inequalities;
pub mod quantum;
pub mod scenario;
pub mod sdp;
pub mod sweeps;
pub mod tensor;

pub use error::{Error, Result};
