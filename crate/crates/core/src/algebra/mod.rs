//! Exact polynomial arithmetic over Q(i), heights, ball arithmetic and
//! fraction-free determinants.

pub mod ball;
pub mod det;
pub mod eval;
pub mod gaussian;
pub mod height;
pub mod linalg;
pub mod monomial;
pub mod parse;
pub mod polynomial;
pub mod series;
pub mod univariate;

pub use ball::{CBall, Float};
pub use det::det_poly_matrix;
pub use eval::{evaluate, Point, Value};
pub use gaussian::{rat, rat_int, GaussianRational, Rational};
pub use height::{height, l2_norm};
pub use monomial::Monomial;
pub use parse::{parse_default, parse_polynomial, parse_rational_function};
pub use polynomial::Polynomial;
pub use series::Series;
pub use univariate::{UPoly, URat};
