//! Truncated univariate power series with exact coefficients.

use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// `sum_{k < len} c_k z^k + O(z^len)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub coeffs: Vec<GaussianRational>,
}

impl Series {
    pub fn new(coeffs: Vec<GaussianRational>) -> Self {
        Series { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        Series { coeffs: vec![GaussianRational::zero(); len] }
    }

    pub fn constant(c: GaussianRational, len: usize) -> Self {
        let mut s = Series::zero(len);
        if len > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    /// The identity series `z`.
    pub fn z(len: usize) -> Self {
        let mut s = Series::zero(len);
        if len > 1 {
            s.coeffs[1] = GaussianRational::one();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn truncate(&self, len: usize) -> Series {
        Series { coeffs: self.coeffs.iter().take(len).cloned().collect() }
    }

    /// Index of the first nonzero coefficient, if any within the known terms.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero_to_order(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn add(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series { coeffs: (0..n).map(|k| &self.coeffs[k] + &o.coeffs[k]).collect() }
    }

    pub fn sub(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series { coeffs: (0..n).map(|k| &self.coeffs[k] - &o.coeffs[k]).collect() }
    }

    pub fn neg(&self) -> Series {
        Series { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &GaussianRational) -> Series {
        Series { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        let mut out = vec![GaussianRational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    out[i + j] += &(a * b);
                }
            }
        }
        Series { coeffs: out }
    }

    pub fn pow(&self, e: u32) -> Series {
        let mut acc = Series::constant(GaussianRational::one(), self.len());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inv(&self) -> Result<Series> {
        let n = self.len();
        let c0 = self.coeff(0);
        let inv0 = c0.inv().map_err(|_| Error::Domain("series inverse needs a nonzero constant term".into()))?;
        let mut out = vec![GaussianRational::zero(); n];
        if n == 0 {
            return Ok(Series { coeffs: out });
        }
        out[0] = inv0.clone();
        for k in 1..n {
            let mut s = GaussianRational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    s += &(&self.coeffs[j] * &out[k - j]);
                }
            }
            out[k] = -&(&s * &inv0);
        }
        Ok(Series { coeffs: out })
    }

    pub fn div(&self, o: &Series) -> Result<Series> {
        Ok(self.mul(&o.inv()?))
    }

    /// Formal derivative; the result is one term shorter.
    pub fn derivative(&self) -> Series {
        Series {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &GaussianRational::from_int(k as i64))
                .collect(),
        }
    }

    /// Formal antiderivative with zero constant; one term longer.
    pub fn integral(&self) -> Series {
        let mut coeffs = vec![GaussianRational::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.scale(&crate::algebra::gaussian::rat(1, k as i64 + 1)));
        }
        Series { coeffs }
    }

    /// `self(g(z))` for `g(0) = 0`, truncated to `min(len)`.
    pub fn compose(&self, g: &Series) -> Result<Series> {
        if !g.coeff(0).is_zero() {
            return Err(Error::Domain("composition needs g(0) = 0".into()));
        }
        let n = self.len().min(g.len());
        let mut acc = Series::zero(n);
        let gt = g.truncate(n);
        // Horner from the top
        for k in (0..n).rev() {
            acc = acc.mul(&gt);
            acc.coeffs[0] += &self.coeffs[k];
        }
        Ok(acc)
    }

    /// Compositional inverse `w` with `self(w(s)) = s`; needs `c_0 = 0`, `c_1 != 0`.
    pub fn revert(&self) -> Result<Series> {
        let n = self.len();
        if n < 2 || !self.coeff(0).is_zero() || self.coeff(1).is_zero() {
            return Err(Error::Domain("reversion needs c0 = 0 and c1 != 0".into()));
        }
        let inv1 = self.coeff(1).inv()?;
        let mut w = Series::zero(n);
        w.coeffs[1] = inv1.clone();
        // each pass fixes the next coefficient
        for k in 2..n {
            let r = self.compose(&w)?;
            let c = &r.coeff(k) * &inv1;
            w.coeffs[k] -= &c;
        }
        Ok(w)
    }

    /// Substitute series into a polynomial.
    pub fn eval_polynomial(p: &Polynomial, xs: &[Series]) -> Series {
        let n = xs.iter().map(Series::len).min().unwrap_or(0);
        let mut powers: Vec<Vec<Series>> = Vec::with_capacity(xs.len());
        for (i, x) in xs.iter().enumerate() {
            let max = p.degree_in(i) as usize;
            let mut v = vec![Series::constant(GaussianRational::one(), n)];
            for k in 1..=max {
                let next = v[k - 1].mul(x);
                v.push(next);
            }
            powers.push(v);
        }
        let mut acc = Series::zero(n);
        for (m, c) in p.terms() {
            let mut t = Series::constant(c.clone(), n);
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::from_terms(
            1,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (crate::algebra::monomial::Monomial(vec![k as u32]), c.clone())),
        )
    }
}
