//! Numerical workbench for locally conformally Kähler structures on Hopf
//! manifolds.

pub mod chart;
pub mod error;
pub mod jet;
pub mod sampling;
pub mod hermitian;
pub mod hopf;
pub mod tensor;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use jet::Jet;
