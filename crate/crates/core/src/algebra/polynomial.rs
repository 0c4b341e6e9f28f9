use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::gaussian::{GaussianRational, Rational};
use super::monomial::Monomial;
use crate::error::{check_dim, Result};

/// Sparse multivariate polynomial over Q(i). Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, GaussianRational::one())
    }

    pub fn constant(nvars: usize, c: GaussianRational) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), GaussianRational::one())
    }

    pub fn term(m: Monomial, c: GaussianRational) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { nvars, terms }
    }

    pub fn from_terms<I>(nvars: usize, it: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, GaussianRational)>,
    {
        let mut p = Self::zero(nvars);
        for (m, c) in it {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            p.add_term(m, &c);
        }
        p
    }

    /// Integer-coefficient convenience constructor: `(coeff, exponents)` pairs.
    pub fn from_int_terms(nvars: usize, it: &[(i64, &[u32])]) -> Self {
        Self::from_terms(
            nvars,
            it.iter()
                .map(|(c, e)| (Monomial(e.to_vec()), GaussianRational::from_int(*c))),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending deglex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    pub fn support(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn constant_value(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn add_term(&mut self, m: Monomial, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial_derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[var] -= 1;
            out.terms.insert(dm, c * &GaussianRational::from_int(e as i64));
        }
        out
    }

    /// Exact evaluation at a point with Gaussian-rational coordinates.
    pub fn eval(&self, point: &[GaussianRational]) -> Result<GaussianRational> {
        check_dim(self.nvars, point.len())?;
        let mut powers: Vec<Vec<GaussianRational>> = vec![vec![GaussianRational::one()]; self.nvars];
        for (i, p) in powers.iter_mut().enumerate() {
            let max = self.degree_in(i) as usize;
            for k in 1..=max {
                let next = &p[k - 1] * &point[i];
                p.push(next);
            }
        }
        let mut acc = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Substitute polynomials (all in the same ring) for the variables.
    pub fn substitute(&self, vals: &[Polynomial]) -> Result<Polynomial> {
        check_dim(self.nvars, vals.len())?;
        let target = vals.first().map(|v| v.nvars).unwrap_or(0);
        let mut cache: Vec<Vec<Polynomial>> = vals.iter().map(|v| vec![Polynomial::one(v.nvars), v.clone()]).collect();
        let mut acc = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = &cache[i][cache[i].len() - 1] * &vals[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][e as usize];
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    pub fn map_coeffs(&self, f: impl Fn(&GaussianRational) -> GaussianRational) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Re-embed in a ring with more variables; `map[i]` is the new index of variable `i`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        Self::from_terms(
            nvars,
            self.terms.iter().map(|(m, c)| {
                let mut e = vec![0; nvars];
                for (i, &k) in m.0.iter().enumerate() {
                    e[map[i]] += k;
                }
                (Monomial(e), c.clone())
            }),
        )
    }

    /// Lowest common multiple of all coefficient denominators (real and imaginary parts).
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(&c.denom_lcm()))
    }

    /// The Z[i]-coefficient representative obtained by multiplying by the lcm of denominators.
    pub fn clear_denominators(&self) -> Polynomial {
        let l = Rational::from_integer(self.denominator_lcm());
        self.map_coeffs(|c| c.scale(&l))
    }

    /// Coefficient with the largest modulus (exact comparison via squared norms).
    pub fn max_coeff_norm_sqr(&self) -> Rational {
        self.terms.values().map(|c| c.norm_sqr()).max().unwrap_or_else(Rational::zero)
    }

    /// Sum of squared coefficient moduli.
    pub fn l2_norm_sqr(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    /// Make the leading coefficient 1.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = c.inv().expect("nonzero");
                self.scale(&inv)
            }
        }
    }

    pub fn sign_normalized_primitive(&self) -> Polynomial {
        // scale to integer coefficients with positive leading coefficient when real
        let cleared = self.clear_denominators();
        if !cleared.is_real() {
            return cleared;
        }
        let g = cleared
            .terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c.re.numer()));
        let lead_neg = cleared.leading_term().map(|(_, c)| c.re.is_negative()).unwrap_or(false);
        let mut s = Rational::new(BigInt::one(), if g.is_zero() { BigInt::one() } else { g });
        if lead_neg {
            s = -s;
        }
        cleared.map_coeffs(|c| c.scale(&s))
    }

    /// Display with the given variable names (default `x1..xn` when empty).
    pub fn display<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        self.display(names).to_string()
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

pub struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.poly;
        if p.is_zero() {
            return write!(f, "0");
        }
        let defaults;
        let names: &[String] = if self.names.is_empty() {
            defaults = default_names(p.nvars);
            &defaults
        } else {
            self.names
        };
        for (idx, (m, c)) in p.terms.iter().rev().enumerate() {
            let mono: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
                .collect();
            // pull a leading minus out of real and pure-imaginary coefficients
            let negative = (c.im.is_zero() && c.re.is_negative()) || (c.re.is_zero() && c.im.is_negative());
            let mag = if negative { -c.clone() } else { c.clone() };
            let coeff = mag.to_string();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mono.is_empty() {
                write!(f, "{coeff}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", coeff, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(&[]).fmt(f)
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, o.nvars, "ring mismatch");
        let (mut big, small) = if self.terms.len() >= o.terms.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c);
        }
        big
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, o.nvars, "ring mismatch");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), &-c);
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, o.nvars, "ring mismatch");
        let mut acc: std::collections::HashMap<Monomial, GaussianRational> = std::collections::HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let prod = c1 * c2;
                let e = acc.entry(m1.mul(m2)).or_insert_with(GaussianRational::zero);
                *e += &prod;
            }
        }
        Polynomial {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_poly {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, o: Polynomial) -> Polynomial {
                (&self).$m(&o)
            }
        }
    };
}
forward_poly!(Add, add);
forward_poly!(Sub, sub);
forward_poly!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Polynomial {
        Polynomial::var(2, 0)
    }
    fn y() -> Polynomial {
        Polynomial::var(2, 1)
    }

    #[test]
    fn arithmetic_and_leading_term() {
        let p = &(&x() * &x()) - &y();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.leading_monomial(), Some(&Monomial(vec![2, 0])));
        let q = &p - &p;
        assert!(q.is_zero());
        let sq = &(&x() + &y()) * &(&x() - &y());
        assert_eq!(sq.to_string(), "x1^2 - x2^2");
    }

    #[test]
    fn derivative_and_eval() {
        let p = Polynomial::from_int_terms(2, &[(3, &[2, 1]), (-1, &[0, 0])]);
        assert_eq!(p.partial_derivative(0).to_string(), "6*x1*x2");
        let v = p
            .eval(&[GaussianRational::from_int(2), GaussianRational::from_int(5)])
            .unwrap();
        assert_eq!(v, GaussianRational::from_int(59));
        assert!(p.eval(&[GaussianRational::from_int(1)]).is_err());
    }

    #[test]
    fn substitute_composes() {
        // (x + y)^2 with x -> t, y -> t^2 in one variable
        let p = (&x() + &y()).pow(2);
        let t = Polynomial::var(1, 0);
        let r = p.substitute(&[t.clone(), &t * &t]).unwrap();
        assert_eq!(r.to_string(), "x1^4 + 2*x1^3 + x1^2");
    }

    #[test]
    fn clearing_denominators() {
        let p = Polynomial::from_terms(
            1,
            [
                (Monomial(vec![1]), GaussianRational::from_rational(super::super::gaussian::rat(1, 2))),
                (Monomial(vec![0]), GaussianRational::from_rational(super::super::gaussian::rat(1, 3))),
            ],
        );
        assert_eq!(p.clear_denominators().to_string(), "3*x1 + 2");
    }
}
