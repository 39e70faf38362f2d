//! Construction and exact verification of main-effect plans that are
//! orthogonal through a set of other factors, in particular through the block
//! factor.

pub mod anova;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod field;
pub mod generators;
pub mod linalg;
pub mod optimality;
pub mod orthogonality;
pub mod plan;
pub mod report;

pub use error::{Error, Result};
