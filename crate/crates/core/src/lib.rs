//! Certified computations behind the classification of repdigits in
//! k-generalized Pell sequences.

pub mod algebraic;
pub mod ball;
pub mod bigseq;
pub mod error;
pub mod heights;
pub mod poly;
pub mod reduction;
pub mod roots;
pub mod search;

pub use ball::{CertifiedReal, ComplexBall, DecimalBall, PrecisionPolicy};
pub use error::{Error, Result};
