//! Exact scalars, Laurent polynomials and row reduction over the rationals.

mod laurent;
mod matrix;
pub(crate) mod rational;

pub use laurent::LaurentPoly;
pub use matrix::{solve_membership, Matrix, Membership, RowEchelon, SPARSE_DENSITY_THRESHOLD};
pub use laurent::LaurentTerm;
pub use rational::{
    binomial, parse_rational, rational_from_i64, rational_parts, serialize_rational, serialize_rationals, Rational,
};
