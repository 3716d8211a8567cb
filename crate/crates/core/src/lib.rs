#![allow(clippy::needless_range_loop)]

pub mod clifford;
pub mod error;
pub mod functionals;
pub mod jets;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod parallel;
pub mod symbol;
pub mod tensor;
pub mod verify;
pub mod wres;

pub use error::{Error, Result};
