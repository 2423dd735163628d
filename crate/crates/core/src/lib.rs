//! Exact computations for Deligne-Lusztig series of finite reductive groups.

pub mod error;
pub mod exec;
pub mod lattice;
pub mod oracle;
pub mod root_datum;
pub mod series;
pub mod sweep;
pub mod charsheaf;
pub mod endoscopy;
pub mod weyl;

pub use error::{Error, Result};
pub use exec::Exec;
