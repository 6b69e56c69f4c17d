//! Torsion of elliptic curves over quadratic fields, decided through
//! quadratic twists of modular curves.

pub mod arith;
pub mod curve;
pub mod jacobian;
pub mod search;
pub mod error;
pub mod filters;
pub mod granville;
pub mod lseries;
pub mod mwsieve;
pub mod pipeline;

pub use error::{Error, Result};
