//! Integer-valued polynomial monoids: finite polynomially dense sets,
//! fixed divisors, membership certificates and divisor homomorphisms.

pub mod arith;
pub mod density;
pub mod divisor_hom;
pub mod error;
pub mod factor;
pub mod feasibility;
mod modp;
pub mod monoid;
pub mod oracle;
pub mod poly;
pub mod problem;
pub mod set_model;
pub mod suite;

pub use arith::{vp, Rational, ValInt};
pub use density::{dense_set, DenseSet, ValVector};
pub use error::{Error, Result};
pub use factor::{factor_over_q, primitive_scaling, FactoredPoly};
pub use poly::Poly;
pub use set_model::{Ball, SetSpec};
