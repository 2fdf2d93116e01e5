pub mod bloch;
pub mod entangle;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod model;
pub mod redfield;
pub(crate) mod rk;
pub mod scalar;
pub mod sparse;

pub use error::{KerrError, Result};
pub use scalar::Scalar;
