//! Sign-test estimation for fixed-design nonparametric regression.
//!
//! The crate is organised around the data model ([`model`]), the sign
//! statistic and its supremum oracles ([`sign`]), estimators built on top of
//! them ([`estimators`]), deterministic approximation constructions
//! ([`approx`]), a combinatorial lab for level-set VC bounds ([`vc`]), risk
//! bound formulas ([`bounds`]), a Monte-Carlo harness ([`sim`]) and
//! randomised oracle cross-checks ([`selftest`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod bounds;
pub mod curves;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod io;
pub mod model;
pub mod quad;
pub mod sign;
pub mod selftest;
pub mod sim;
pub mod vc;

pub use error::{Error, Result};
pub use model::{Data, Design, IndexData, IndexDesign, Partition};
pub use sign::ShapeClass;
