//! Exact arithmetic: big integers and rationals, finite fields, polynomials.

pub mod field;
pub mod fpoly;
pub mod nt;
pub mod poly;

pub use field::{Fq, Fqe};
pub use fpoly::FPoly;
pub use nt::{kronecker, kronecker_i64, squarefree_part, squarefree_sieve};
pub use poly::{Poly, QPoly, ZPoly};

pub type Int = num_bigint::BigInt;
pub type Rat = num_rational::BigRational;
