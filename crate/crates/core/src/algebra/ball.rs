//! Complex midpoint-radius arithmetic.
//!
//! Midpoints are binary floating-point numbers with a `BigInt` mantissa rounded
//! to an explicit number of bits; radii are `f64` values rounded upwards. Every
//! operation returns a ball containing the exact result of the operation applied
//! to any points of the input balls.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use super::gaussian::{GaussianRational, Rational};

/// `man * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Float {
    man: BigInt,
    exp: i64,
}

fn up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        x.next_up()
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    up(a + b)
}

fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    up(a * b)
}

/// `v * 2^e` without intermediate overflow; `v` finite and nonnegative.
fn scale2(v: f64, e: i64) -> f64 {
    let mut v = v;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return 0.0;
        }
    }
    v * 2f64.powi(e as i32)
}

impl Float {
    pub fn zero() -> Self {
        Float { man: BigInt::zero(), exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn from_int(n: i64) -> Self {
        Float { man: BigInt::from(n), exp: 0 }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 || !x.is_finite() {
            return Float::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        Float { man: BigInt::from(m) * sign, exp: ex }
    }

    /// Round to `prec` bits; returns the rounding error bound (absolute).
    fn round(man: BigInt, exp: i64, prec: u32) -> (Float, f64) {
        let bits = man.bits() as i64;
        if bits <= prec as i64 {
            return (Float { man, exp }, 0.0);
        }
        let shift = bits - prec as i64;
        let neg = man.sign() == Sign::Minus;
        let mag = if neg { -man } else { man };
        let t = mag >> (shift as usize);
        let t = if neg { -t } else { t };
        let err = up(scale2(1.0, exp + shift));
        (Float { man: t, exp: exp + shift }, err)
    }

    pub fn from_rational(q: &Rational, prec: u32) -> (Float, f64) {
        if q.is_zero() {
            return (Float::zero(), 0.0);
        }
        let (n, d) = (q.numer(), q.denom());
        if d == &BigInt::from(1) {
            return Float::round(n.clone(), 0, prec);
        }
        // choose k so that the quotient carries about prec + 2 bits
        let k = prec as i64 + 2 - n.bits() as i64 + d.bits() as i64;
        let num = if k >= 0 { n << (k as usize) } else { n >> ((-k) as usize) };
        let quo = &num / d;
        // truncation of the division (and of a right shift) costs at most 2 ulps of 2^-k
        let (f, e) = Float::round(quo, -k, prec);
        (f, add_up(e, up(scale2(2.0, -k))))
    }

    pub fn to_f64(&self) -> f64 {
        if self.man.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits() as i64;
        let shift = (bits - 62).max(0);
        let m = (&self.man >> (shift as usize)).to_f64().unwrap_or(0.0);
        let s = m.signum();
        s * scale2(m.abs(), self.exp + shift)
    }

    /// Upper bound of `|self|` as an `f64`.
    pub fn abs_upper(&self) -> f64 {
        if self.man.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits() as i64;
        let shift = (bits - 62).max(0);
        let m = (self.man.abs() >> (shift as usize)).to_f64().unwrap_or(f64::INFINITY);
        // +1 for the truncated bits, if any; m < 2^62 converts exactly otherwise
        let m = if shift > 0 { up(m + 1.0) } else { m };
        up(scale2(m, self.exp + shift))
    }

    /// Lower bound of `|self|` as an `f64`.
    pub fn abs_lower(&self) -> f64 {
        if self.man.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits() as i64;
        let shift = (bits - 62).max(0);
        let m = (self.man.abs() >> (shift as usize)).to_f64().unwrap_or(0.0);
        let v = scale2(m.next_down().max(0.0), self.exp + shift);
        v.next_down().max(0.0)
    }

    pub fn neg(&self) -> Float {
        Float { man: -self.man.clone(), exp: self.exp }
    }

    pub fn add(&self, o: &Float, prec: u32) -> (Float, f64) {
        if self.man.is_zero() {
            return Float::round(o.man.clone(), o.exp, prec);
        }
        if o.man.is_zero() {
            return Float::round(self.man.clone(), self.exp, prec);
        }
        // Skip exact alignment when one operand is far below the other's precision.
        let (hi, lo) = if self.top() >= o.top() { (self, o) } else { (o, self) };
        if hi.top() - lo.top() > prec as i64 + 4 {
            let (r, e) = Float::round(hi.man.clone(), hi.exp, prec);
            return (r, add_up(e, lo.abs_upper()));
        }
        let e = self.exp.min(o.exp);
        let a = &self.man << ((self.exp - e) as usize);
        let b = &o.man << ((o.exp - e) as usize);
        Float::round(a + b, e, prec)
    }

    pub fn sub(&self, o: &Float, prec: u32) -> (Float, f64) {
        self.add(&o.neg(), prec)
    }

    pub fn mul(&self, o: &Float, prec: u32) -> (Float, f64) {
        Float::round(&self.man * &o.man, self.exp + o.exp, prec)
    }

    /// `self / o` for `o != 0`.
    pub fn div(&self, o: &Float, prec: u32) -> (Float, f64) {
        assert!(!o.man.is_zero(), "float division by zero");
        if self.man.is_zero() {
            return (Float::zero(), 0.0);
        }
        let k = prec as i64 + 2 + o.man.bits() as i64 - self.man.bits() as i64;
        let k = k.max(0);
        let num = &self.man << (k as usize);
        let q = &num / &o.man;
        let exp = self.exp - o.exp - k;
        let (f, e) = Float::round(q, exp, prec);
        (f, add_up(e, up(scale2(1.0, exp))))
    }

    /// Exponent of the leading bit, i.e. `floor(log2 |x|)`; very negative for zero.
    fn top(&self) -> i64 {
        if self.man.is_zero() {
            i64::MIN / 4
        } else {
            self.exp + self.man.bits() as i64 - 1
        }
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.man << (self.exp as usize))
        } else {
            Rational::new(self.man.clone(), BigInt::from(1) << ((-self.exp) as usize))
        }
    }

    pub fn cmp_value(&self, o: &Float) -> Ordering {
        self.to_rational().cmp(&o.to_rational())
    }
}

/// Closed disc `{ z : |z - mid| <= rad }` in the complex plane.
#[derive(Clone, Debug)]
pub struct CBall {
    pub re: Float,
    pub im: Float,
    pub rad: f64,
}

impl CBall {
    pub fn zero() -> Self {
        CBall { re: Float::zero(), im: Float::zero(), rad: 0.0 }
    }

    pub fn exact_int(n: i64) -> Self {
        CBall { re: Float::from_int(n), im: Float::zero(), rad: 0.0 }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        CBall { re: Float::from_f64(re), im: Float::from_f64(im), rad: 0.0 }
    }

    pub fn from_gaussian(g: &GaussianRational, prec: u32) -> Self {
        let (re, e1) = Float::from_rational(&g.re, prec);
        let (im, e2) = Float::from_rational(&g.im, prec);
        CBall { re, im, rad: add_up(e1, e2) }
    }

    pub fn with_radius(mut self, extra: f64) -> Self {
        self.rad = add_up(self.rad, extra);
        self
    }

    pub fn mid_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn mid_complex(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Upper bound of `|mid|`.
    pub fn mid_abs_upper(&self) -> f64 {
        let a = self.re.abs_upper();
        let b = self.im.abs_upper();
        up(a.hypot(b))
    }

    /// Lower bound of `|mid|`.
    pub fn mid_abs_lower(&self) -> f64 {
        let a = self.re.abs_lower();
        let b = self.im.abs_lower();
        a.hypot(b).next_down().max(0.0)
    }

    /// Upper bound of `|z|` over the ball.
    pub fn abs_upper(&self) -> f64 {
        add_up(self.mid_abs_upper(), self.rad)
    }

    /// Lower bound of `|z|` over the ball (0 when the ball meets the origin).
    pub fn abs_lower(&self) -> f64 {
        let v = self.mid_abs_lower() - self.rad;
        if v > 0.0 {
            v.next_down().max(0.0)
        } else {
            0.0
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.abs_lower() <= 0.0
    }

    pub fn neg(&self) -> CBall {
        CBall { re: self.re.neg(), im: self.im.neg(), rad: self.rad }
    }

    pub fn add(&self, o: &CBall, prec: u32) -> CBall {
        let (re, e1) = self.re.add(&o.re, prec);
        let (im, e2) = self.im.add(&o.im, prec);
        CBall { re, im, rad: add_up(add_up(self.rad, o.rad), add_up(e1, e2)) }
    }

    pub fn sub(&self, o: &CBall, prec: u32) -> CBall {
        self.add(&o.neg(), prec)
    }

    pub fn mul(&self, o: &CBall, prec: u32) -> CBall {
        let (ac, e1) = self.re.mul(&o.re, prec + 8);
        let (bd, e2) = self.im.mul(&o.im, prec + 8);
        let (ad, e3) = self.re.mul(&o.im, prec + 8);
        let (bc, e4) = self.im.mul(&o.re, prec + 8);
        let (re, e5) = ac.sub(&bd, prec);
        let (im, e6) = ad.add(&bc, prec);
        let round = add_up(add_up(add_up(e1, e2), add_up(e3, e4)), add_up(e5, e6));
        // |x y - x0 y0| <= |x0| ry + |y0| rx + rx ry
        let prop = add_up(
            add_up(mul_up(self.mid_abs_upper(), o.rad), mul_up(o.mid_abs_upper(), self.rad)),
            mul_up(self.rad, o.rad),
        );
        CBall { re, im, rad: add_up(round, prop) }
    }

    pub fn sqr(&self, prec: u32) -> CBall {
        self.mul(self, prec)
    }

    /// Reciprocal; `None` when the ball contains zero.
    pub fn inv(&self, prec: u32) -> Option<CBall> {
        let lo = self.abs_lower();
        if lo <= 0.0 {
            return None;
        }
        let p2 = prec + 8;
        let (a2, e1) = self.re.mul(&self.re, p2);
        let (b2, e2) = self.im.mul(&self.im, p2);
        let (den, e3) = a2.add(&b2, p2);
        if den.is_zero() {
            return None;
        }
        let den_lo = (den.abs_lower() - add_up(add_up(e1, e2), e3)).next_down();
        if den_lo <= 0.0 {
            return None;
        }
        let (re, e4) = self.re.div(&den, prec);
        let (im, e5) = self.im.neg().div(&den, prec);
        // error of using the rounded denominator: |mid| * dden / den^2
        let dden = add_up(add_up(e1, e2), e3);
        let mid_err = mul_up(self.mid_abs_upper(), up(dden / den_lo / den_lo));
        // |1/z - 1/m| <= r / (|m| (|m| - r))
        let m_lo = self.mid_abs_lower();
        let prop = if self.rad == 0.0 { 0.0 } else { up(self.rad / (m_lo * lo).next_down()) };
        Some(CBall { re, im, rad: add_up(add_up(add_up(e4, e5), mid_err), prop) })
    }

    pub fn div(&self, o: &CBall, prec: u32) -> Option<CBall> {
        Some(self.mul(&o.inv(prec)?, prec))
    }

    pub fn mul_f64_exact(&self, x: f64, prec: u32) -> CBall {
        self.mul(&CBall::from_f64(x, 0.0), prec)
    }

    /// Principal argument of the midpoint.
    pub fn arg_mid(&self) -> f64 {
        let (a, b) = self.mid_f64();
        b.atan2(a)
    }

    /// Does the exact Gaussian rational lie in the ball? Conservative in the "no" direction
    /// only up to f64 rounding of the distance, which is inflated.
    pub fn contains_gaussian(&self, g: &GaussianRational) -> bool {
        let dr = g.re.clone() - self.re.to_rational();
        let di = g.im.clone() - self.im.to_rational();
        let d2 = super::gaussian::rational_to_f64(&(&dr * &dr + &di * &di));
        d2.sqrt() <= self.rad * (1.0 + 1e-12) + f64::MIN_POSITIVE
    }

    pub fn mid_gaussian(&self) -> GaussianRational {
        GaussianRational::new(self.re.to_rational(), self.im.to_rational())
    }
}
