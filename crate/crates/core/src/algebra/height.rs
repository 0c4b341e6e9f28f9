//! Logarithmic heights, L2 norms and evaluation bounds.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::gaussian::{GaussianRational, Rational};
use super::polynomial::Polynomial;
use crate::constants;
use crate::error::{Error, Result};

/// Natural log of a positive big integer.
pub fn log_bigint(n: &BigInt) -> f64 {
    let n = n.abs();
    assert!(!n.is_zero(), "log of zero");
    let bits = n.bits() as i64;
    let shift = (bits - 60).max(0);
    let top: f64 = num_traits::ToPrimitive::to_f64(&(&n >> (shift as usize))).unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn log_rational(q: &Rational) -> f64 {
    assert!(q.is_positive(), "log of nonpositive rational");
    log_bigint(q.numer()) - log_bigint(q.denom())
}

/// `log |g|` for nonzero g.
pub fn log_abs(g: &GaussianRational) -> f64 {
    0.5 * log_rational(&g.norm_sqr())
}

/// Logarithmic height `h(P) = log max |c|` of the lcm-cleared representative.
pub fn height(p: &Polynomial) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::Domain("height of the zero polynomial".into()));
    }
    let cleared = p.clear_denominators();
    Ok(0.5 * log_rational(&cleared.max_coeff_norm_sqr()))
}

/// L2 norm of the coefficient vector in the monomial basis.
pub fn l2_norm(p: &Polynomial) -> f64 {
    let s = p.l2_norm_sqr();
    if s.is_zero() {
        0.0
    } else {
        (0.5 * log_rational(&s)).exp()
    }
}

/// `log` of the L2 norm; `-inf` for zero.
pub fn log_l2_norm(p: &Polynomial) -> f64 {
    let s = p.l2_norm_sqr();
    if s.is_zero() {
        f64::NEG_INFINITY
    } else {
        0.5 * log_rational(&s)
    }
}

/// Hermitian norm of a point.
pub fn point_norm(p: &[GaussianRational]) -> f64 {
    let s: Rational = p.iter().fold(Rational::zero(), |a, c| a + c.norm_sqr());
    if s.is_zero() {
        0.0
    } else {
        (0.5 * log_rational(&s)).exp()
    }
}

pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// Right-hand side of the evaluation bound in log form:
/// `n log d + h(P) + d log+ ||p|| + C_eval`.
///
/// The additive constant absorbs the monomial count for small `d`, and
/// `log+` replaces `log` so the bound also covers points inside the unit ball.
pub fn eval_log_bound(p: &Polynomial, point_norm: f64) -> Result<f64> {
    let d = p.degree();
    let n = p.nvars() as f64;
    let h = height(p)?;
    let dn = if d == 0 { 0.0 } else { n * (d as f64).ln() };
    Ok(dn + h + d as f64 * log_plus(point_norm) + constants::POLY_EVAL_C.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_default;

    #[test]
    fn height_examples() {
        let p = parse_default("3*x1^2 - 2", 1).unwrap();
        assert!((height(&p).unwrap() - 3f64.ln()).abs() < 1e-12);
        let q = parse_default("x1/2 + 1/3", 1).unwrap();
        assert!((height(&q).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!(height(&Polynomial::zero(2)).is_err());
        let g = parse_default("(3 + 4*i)*x1 + 1", 1).unwrap();
        assert!((height(&g).unwrap() - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn l2_examples() {
        assert_eq!(l2_norm(&Polynomial::zero(1)), 0.0);
        let p = parse_default("3*x1 + 4", 1).unwrap();
        assert!((l2_norm(&p) - 5.0).abs() < 1e-12);
        let c = GaussianRational::new(crate::algebra::gaussian::rat(-2, 3), crate::algebra::gaussian::rat(1, 5));
        let q = parse_default("x1^2 - 7*x2 + 1/9", 2).unwrap();
        let lhs = l2_norm(&q.scale(&c));
        assert!((lhs - c.abs_f64() * l2_norm(&q)).abs() < 1e-12);
    }

    #[test]
    fn log_of_huge_integers() {
        let n = BigInt::from(10).pow(500);
        assert!((log_bigint(&n) - 500.0 * 10f64.ln()).abs() < 1e-9);
    }
}
