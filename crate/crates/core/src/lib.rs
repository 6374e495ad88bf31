//! Symbolic and numeric computation with differential worms: the k-fold
//! differential graded-commutative algebras of functions on the map space
//! `Hom(R^{0|k}, X)`.

pub mod berezin;
pub mod chart;
pub mod cohomology;
pub mod derivation;
pub mod dgca;
pub mod dsl;
pub mod error;
pub mod expr;
pub mod grassmann;
pub mod lifts;
pub mod linalg;
pub mod num;
pub mod pseudo;
pub mod pullback;
pub mod quadrature;
pub mod riemann;
pub mod worm;

pub use chart::Chart;
pub use error::{Result, WormError};
pub use expr::{expr_equal, Func, ScalarExpr};
pub use num::{Field, Real};
pub use worm::{Generator, IndexSet, Monomial, Multidegree, Parity, Worm};

/// Exact scalar type for symbolic coefficients and linear algebra.
pub type Rational = num_rational::BigRational;

/// Default floating type for quadrature and numeric evaluation.
pub type Float = f64;
