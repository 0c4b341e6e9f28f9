//! Dense univariate polynomials over Q(i), coefficients in ascending order.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::gaussian::{GaussianRational, Rational};
use super::monomial::Monomial;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UPoly {
    coeffs: Vec<GaussianRational>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| GaussianRational::from_int(v)).collect())
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::new(vec![c])
    }

    /// `t - a`.
    pub fn linear(a: &GaussianRational) -> Self {
        Self::new(vec![-a, GaussianRational::one()])
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `deg 0 = -1` reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> GaussianRational {
        self.coeffs.last().cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Lowest index with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::new(self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![GaussianRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn div_rem(&self, o: &Self) -> Result<(Self, Self)> {
        let Some(dq) = o.degree() else {
            return Err(Error::Domain("division by the zero polynomial".into()));
        };
        let inv = o.lead().inv()?;
        let mut r = self.coeffs.clone();
        let mut q = vec![GaussianRational::zero(); r.len().saturating_sub(dq)];
        while r.len() > dq && !r.is_empty() {
            let k = r.len() - 1 - dq;
            let c = &r[r.len() - 1] * &inv;
            for (j, b) in o.coeffs.iter().enumerate() {
                r[k + j] -= &(&c * b);
            }
            q[k] = c;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Ok((Self::new(q), Self::new(r)))
    }

    /// Quotient when the division is exact.
    pub fn div_exact(&self, o: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(o).ok()?;
        r.is_zero().then_some(q)
    }

    pub fn monic(&self) -> Self {
        match self.lead().inv() {
            Ok(inv) if !self.is_zero() => self.scale(&inv),
            _ => self.clone(),
        }
    }

    /// Monic gcd (zero when both inputs are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * &GaussianRational::from_int(k as i64)).collect(),
        )
    }

    pub fn eval(&self, x: &GaussianRational) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            let (re, im) = c.to_f64_pair();
            acc = acc * z + Complex64::new(re, im);
        }
        acc
    }

    /// `self(g)`.
    pub fn compose(&self, g: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g).add(&Self::constant(c.clone()));
        }
        acc
    }

    /// Square-free part `p / gcd(p, p')`, monic.
    pub fn squarefree(&self) -> Self {
        let g = self.gcd(&self.derivative());
        self.div_exact(&g).expect("gcd divides").monic()
    }

    /// Order of vanishing at `a`.
    pub fn order_at(&self, a: &GaussianRational) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let lin = Self::linear(a);
        let mut p = self.clone();
        let mut k = 0;
        while let Some(q) = p.div_exact(&lin) {
            p = q;
            k += 1;
        }
        k
    }

    /// All distinct roots in Q(i), provided every root lies there; `None` otherwise.
    pub fn gaussian_roots(&self) -> Option<Vec<GaussianRational>> {
        let (roots, complete) = self.gaussian_roots_partial()?;
        complete.then_some(roots)
    }

    /// Distinct roots lying in Q(i), and whether they exhaust all roots.
    /// Roots are located numerically on the square-free part, rounded onto the
    /// lattice `Z[i] / N(a_n)` forced by Gauss's lemma, and confirmed by exact
    /// division.
    pub fn gaussian_roots_partial(&self) -> Option<(Vec<GaussianRational>, bool)> {
        if self.is_zero() {
            return None;
        }
        let sf = self.squarefree();
        if sf.degree()? == 0 {
            return Some((Vec::new(), true));
        }
        // sf is monic: clearing denominators leaves lead l, so N(lead) = l^2
        let l = sf.coeffs.iter().fold(BigInt::one(), |a, c| num_integer::Integer::lcm(&a, &c.denom_lcm()));
        let norm = &l * &l;
        let nf = norm.to_f64()?;
        let mut rest = sf.clone();
        let mut roots = Vec::new();
        for z in aberth(&sf) {
            let snap = |x: f64| -> Option<Rational> {
                let v = (x * nf).round();
                (v.is_finite() && v.abs() < 1e30).then(|| Rational::new(BigInt::from(v as i128), norm.clone()))
            };
            let (Some(re), Some(im)) = (snap(z.re), snap(z.im)) else { continue };
            let cand = GaussianRational::new(re, im);
            if roots.contains(&cand) {
                continue;
            }
            if let Some(q) = rest.div_exact(&Self::linear(&cand)) {
                rest = q;
                roots.push(cand);
            }
        }
        Some((roots, rest.degree() == Some(0)))
    }

    pub fn to_polynomial(&self, nvars: usize, var: usize) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut e = vec![0u32; nvars];
            e[var] = k as u32;
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// Reads a polynomial in the single variable `var`; other variables must not occur.
    pub fn from_polynomial(p: &Polynomial, var: usize) -> Result<Self> {
        let mut coeffs = vec![GaussianRational::zero(); p.degree_in(var) as usize + 1];
        for (m, c) in p.terms() {
            if m.0.iter().enumerate().any(|(i, &e)| i != var && e > 0) {
                return Err(Error::Domain("polynomial is not univariate".into()));
            }
            coeffs[m.0[var] as usize] = c.clone();
        }
        Ok(Self::new(coeffs))
    }

    pub fn display<'a>(&'a self, var: &'a str) -> UDisplay<'a> {
        UDisplay { p: self, var }
    }
}

/// Simultaneous root iteration on a square-free polynomial.
fn aberth(p: &UPoly) -> Vec<Complex64> {
    let n = p.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    let dp = p.derivative();
    let (lr, li) = p.lead().to_f64_pair();
    let lead = Complex64::new(lr, li);
    // Cauchy-type root radius
    let bound = 1.0
        + p.coeffs[..n]
            .iter()
            .map(|c| {
                let (re, im) = c.to_f64_pair();
                Complex64::new(re, im).norm() / lead.norm()
            })
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(bound * 0.7, 0.4 + std::f64::consts::TAU * k as f64 / n as f64)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let f = p.eval_c64(z[i]);
            let df = dp.eval_c64(z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / df;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

pub struct UDisplay<'a> {
    p: &'a UPoly,
    var: &'a str,
}

/// Ascending order, e.g. `1 - t - t^2`.
impl fmt::Display for UDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.p.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let negative = (c.im.is_zero() && c.re.is_negative()) || (c.re.is_zero() && c.im.is_negative());
            let mag = if negative { -c.clone() } else { c.clone() };
            let both = !mag.re.is_zero() && !mag.im.is_zero();
            match (first, negative) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let mono = match k {
                0 => String::new(),
                1 => self.var.to_string(),
                _ => format!("{}^{}", self.var, k),
            };
            let coeff = if both { format!("({mag})") } else { mag.to_string() };
            if mono.is_empty() {
                write!(f, "{coeff}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{coeff}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display("t").fmt(f)
    }
}

/// `num / den` in lowest terms with monic `den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct URat {
    num: UPoly,
    den: UPoly,
}

impl URat {
    pub fn new(num: UPoly, den: UPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(Self::from_poly(UPoly::zero()));
        }
        let g = num.gcd(&den);
        let (n, d) = (num.div_exact(&g).expect("gcd"), den.div_exact(&g).expect("gcd"));
        let inv = d.lead().inv()?;
        Ok(Self { num: n.scale(&inv), den: d.scale(&inv) })
    }

    pub fn from_poly(p: UPoly) -> Self {
        Self { num: p, den: UPoly::one() }
    }

    pub fn num(&self) -> &UPoly {
        &self.num
    }

    pub fn den(&self) -> &UPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn is_constant(&self) -> bool {
        self.is_polynomial() && self.num.degree().unwrap_or(0) == 0
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.scale(&-GaussianRational::one()), den: self.den.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn pow(&self, e: u32) -> Self {
        Self { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative())),
            self.den.mul(&self.den),
        )
        .expect("nonzero")
    }

    /// Order at `a`: positive for zeros, negative for poles (`i64::MAX` for 0).
    pub fn order_at(&self, a: &GaussianRational) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        self.num.order_at(a) as i64 - self.den.order_at(a) as i64
    }

    /// Distinct poles, each with its order; `None` if some pole is not in Q(i).
    pub fn poles(&self) -> Option<Vec<(GaussianRational, usize)>> {
        let roots = self.den.gaussian_roots()?;
        Some(roots.into_iter().map(|a| { let k = self.den.order_at(&a); (a, k) }).collect())
    }
}

impl fmt::Display for URat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
