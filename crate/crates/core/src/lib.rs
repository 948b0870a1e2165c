pub mod artifacts;
pub mod assembly;
pub mod direct;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod laguerre;
pub mod mesh;
pub mod preconditioner;
pub mod quadrature;
pub mod scalar;
pub mod sparse;
pub mod testbed;

pub use error::{Error, Result};
pub use scalar::{Scalar, C64};
