//! Independent brute-force checks: class censuses of small matrix groups and
//! character counts of torus-by-finite groups.

pub mod census;
pub mod compare;
pub mod field;
pub mod torus_group;

pub use census::{census, ClassCensus, MatrixFamily, MatrixGroupSpec};
pub use compare::{compare, ComparisonReport};
pub use torus_group::{finite_group_series_check, TorusSeriesCheck};
