//! High-girth matrices from polarization of conditional ranks.
//!
//! - [`fields`]: exact linear algebra over GF(2), GF(p) and the rationals.
//! - [`polarize`]: the COR branching process, row selection and
//!   Bhattacharyya profiles.
//! - [`cor`]: the Sierpinski matrix, its fast transform, COR matrices and
//!   Monte Carlo girth checks.
//! - [`channels`]: erasure and binary symmetric channels.
//! - [`codec`]: linear codes, erasure and ML decoding, weight enumerators
//!   and union bounds.
//! - [`sparse`]: spark certificates and exhaustive l0 recovery.
//! - [`sim`] and [`report`]: the seeded trial harness and JSON reports.

pub mod channels;
pub mod codec;
pub mod cor;
pub mod error;
pub mod fields;
pub mod polarize;
pub mod report;
pub mod sim;
pub mod sparse;

pub use error::{Error, Result};
