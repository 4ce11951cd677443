//! Interpretable constrained clustering with decision trees, compiled to
//! weighted partial MaxSAT.
//!
//! The pipeline is: load a [`data::Dataset`], draw or load a
//! [`data::ConstraintSet`], group pair distances into classes
//! ([`pairs::build_distance_classes`]), prune redundant pair clauses
//! ([`pairs::smart_pairs`]), encode ([`encoding::encode_tree`] or
//! [`encoding::encode_cc`]), solve ([`solver::Backend`]), then
//! [`decode::decode`] and [`decode::verify`] the model. The
//! [`harness`] module runs that pipeline over seeds and parameter grids;
//! [`oracle`] holds exhaustive reference solvers for small instances.

pub mod data;
pub mod decode;
pub mod encoding;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod pairs;
pub mod solver;

pub use error::{Error, Result};
