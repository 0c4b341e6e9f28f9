//! Certified convergence radii and ball evaluation of trajectory germs.
//!
//! Writing `xi_i(p + y) = sum_a c_{i,a} y^a`, the scalar series `u` solving
//! `u' = g(u)`, `u(0) = 0` with `g(u) = sum_m (max_i sum_{|a| = m} |c_{i,a}|) u^m`
//! majorizes every coordinate of `x(z) - p` coefficient-wise. Its radius is
//! `T = int_0^inf du / g(u)`, and `u(rho) <= v` whenever `int_0^v du/g >= rho`.
//! Cauchy's estimate on `u` then bounds every tail of the germ.

use num_traits::{One, Zero};
use serde::Serialize;

use super::field::VectorField;
use super::trajectory::TrajectoryGerm;
use crate::algebra::ball::CBall;
use crate::algebra::gaussian::{rational_to_f64, GaussianRational, Rational};
use crate::algebra::polynomial::Polynomial;
use crate::algebra::series::Series;
use crate::error::{Error, Result};

fn up(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.next_up()
    }
}

fn down(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.next_down()
    }
}

/// Nonnegative-coefficient majorant `g` of the field at a base point.
#[derive(Clone, Debug, Serialize)]
pub struct Majorant {
    /// Upward-rounded coefficients of `g` by degree.
    pub coeffs: Vec<f64>,
}

impl Majorant {
    pub fn at(field: &VectorField, p: &[GaussianRational]) -> Result<Self> {
        let n = field.dim();
        let shift: Vec<Polynomial> = (0..n)
            .map(|j| &Polynomial::var(n, j) + &Polynomial::constant(n, p[j].clone()))
            .collect();
        let delta = field.delta() as usize;
        let mut coeffs = vec![0.0f64; delta + 1];
        for c in field.components() {
            let shifted = c.substitute(&shift)?;
            let mut by_deg = vec![0.0f64; delta + 1];
            for (m, a) in shifted.terms() {
                let d = m.degree() as usize;
                // |a| rounded up with a relative safety margin for the f64 conversion
                by_deg[d] = up(by_deg[d] + up(a.abs_f64() * (1.0 + 1e-14)));
            }
            for (g, b) in coeffs.iter_mut().zip(by_deg) {
                *g = g.max(b);
            }
        }
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        Ok(Majorant { coeffs })
    }

    fn eval_up(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| up(up(acc * u) + c))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Walk a grid of lower Riemann sums of `int du/g`, calling `stop(u, G)` after each step.
    fn walk(&self, h0: f64, mut stop: impl FnMut(f64, f64) -> bool) -> (f64, f64) {
        let mut u = 0.0f64;
        let mut acc = 0.0f64;
        for _ in 0..2_000_000 {
            let next = (u * (1.0 + 1.0 / 64.0)).max(u + h0);
            if !next.is_finite() {
                break;
            }
            let g = self.eval_up(next);
            let step = down(next - u);
            acc = down(acc + down(step / g));
            u = next;
            if stop(u, acc) {
                break;
            }
        }
        (u, acc)
    }

    /// Certified lower bound on the radius of convergence of `u`; infinite for affine `g`.
    pub fn radius_lower(&self) -> f64 {
        if self.coeffs[0] == 0.0 {
            return 0.0;
        }
        if self.degree() <= 1 {
            return f64::INFINITY;
        }
        let h0 = self.coeffs[0] / 4096.0;
        let (_, t) = self.walk(h0, |u, _| u > 1e30);
        t
    }

    /// Upper bound for `u(rho)`; `None` if `rho` is not certified inside the radius.
    pub fn value_upper(&self, rho: f64) -> Option<f64> {
        if rho <= 0.0 {
            return Some(0.0);
        }
        let h0 = (self.coeffs[0] * rho / 512.0).max(f64::MIN_POSITIVE);
        let (u, acc) = self.walk(h0, |u, acc| acc >= rho || u > 1e300);
        (acc >= rho).then_some(u)
    }

    /// Cauchy data `(q, v)` with `u(r / q) <= v`, for several radii beyond `r`.
    pub fn cauchy_data(&self, r: f64, radius: f64) -> Vec<(f64, f64)> {
        if r == 0.0 {
            return Vec::new();
        }
        let mut candidates: Vec<f64> = (1..=10).map(|j| r * 2f64.powi(j)).collect();
        if radius.is_finite() {
            candidates.retain(|c| *c < radius);
            for f in [0.5, 0.75, 0.875, 0.9375, 0.97] {
                candidates.push(r + (radius - r) * f);
            }
        }
        candidates
            .into_iter()
            .filter(|rp| *rp > r)
            .filter_map(|rp| self.value_upper(rp).map(|v| (up(r / rp), v)))
            .collect()
    }

    /// Bound on `sum_{k > order} u_k r^k`.
    pub fn tail(&self, r: f64, order: usize, radius: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        tail_from(&self.cauchy_data(r, radius), order)
    }
}

fn tail_from(data: &[(f64, f64)], order: usize) -> f64 {
    data.iter()
        .map(|&(q, v)| up(up(v * q.powi(order as i32 + 1)) / down(1.0 - q)))
        .fold(f64::INFINITY, f64::min)
}

/// A germ with a certified radius, optionally rescaled so that
/// `phi_scaled(z) = phi(scale * z)`.
#[derive(Clone, Debug)]
pub struct ParametrizedTrajectory {
    pub germ: TrajectoryGerm,
    pub scale: Rational,
    /// Certified lower bound on the convergence radius, in the rescaled variable.
    pub radius: f64,
    majorant: Option<Majorant>,
}

/// Options for radius certification.
#[derive(Clone, Copy, Debug)]
pub struct RadiusOptions {
    /// When set, rescale `z` so that the certified radius exceeds this value.
    pub want_radius: Option<f64>,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        Self { want_radius: Some(1.5) }
    }
}

/// Is the germ's truncation an exact polynomial solution? Then no tail exists.
fn polynomial_solution(germ: &TrajectoryGerm) -> Option<usize> {
    let order = germ.order();
    let deg = (0..germ.dim())
        .map(|i| germ.coordinate(i).iter().rposition(|c| !c.is_zero()).unwrap_or(0))
        .max()
        .unwrap_or(0);
    if deg + 2 > order {
        return None;
    }
    let polys: Vec<Polynomial> = (0..germ.dim()).map(|i| Series::new(germ.coordinate(i)[..=deg].to_vec()).to_polynomial()).collect();
    for (i, c) in germ.field().components().iter().enumerate() {
        let lhs = c.substitute(&polys).ok()?;
        let rhs = polys[i].partial_derivative(0);
        if lhs != rhs {
            return None;
        }
    }
    Some(deg)
}

/// Certify a convergence radius for the germ; see the module docs for the method.
pub fn certify_radius(germ: &TrajectoryGerm, opts: RadiusOptions) -> Result<ParametrizedTrajectory> {
    if germ.is_constant() {
        return Err(Error::Precondition("germ is constant (singular base point)".into()));
    }
    if let Some(deg) = polynomial_solution(germ) {
        let mut g = germ.clone();
        g.extend(deg.max(1));
        return Ok(ParametrizedTrajectory { germ: g, scale: Rational::one(), radius: f64::INFINITY, majorant: None });
    }
    let maj = Majorant::at(germ.field(), germ.base())?;
    let t = maj.radius_lower();
    if !(t > 0.0) {
        return Err(Error::Certification("no positive radius could be certified".into()));
    }
    let mut scale = Rational::one();
    let mut radius = t;
    if let Some(want) = opts.want_radius {
        if t <= want {
            // choose a dyadic scale s with t / s > want
            let mut s = Rational::one();
            let half = crate::algebra::gaussian::rat(1, 2);
            while t / rational_to_f64(&s) <= want {
                s = &s * &half;
            }
            radius = t / rational_to_f64(&s);
            scale = s;
        }
    }
    Ok(ParametrizedTrajectory { germ: germ.clone(), scale, radius, majorant: Some(maj) })
}

impl ParametrizedTrajectory {
    pub fn dim(&self) -> usize {
        self.germ.dim()
    }

    pub fn field(&self) -> &VectorField {
        self.germ.field()
    }

    pub fn scale_f64(&self) -> f64 {
        rational_to_f64(&self.scale)
    }

    pub fn is_polynomial(&self) -> bool {
        self.majorant.is_none()
    }

    /// Tail bound of the germ at order `order` on the rescaled disc of radius `rho`.
    pub fn tail_bound(&self, rho: f64, order: usize) -> f64 {
        match &self.majorant {
            None => 0.0,
            Some(m) => {
                let s = self.scale_f64();
                m.tail(up(rho * s), order, self.radius * s)
            }
        }
    }

    /// Prepare a ball evaluator valid on the closed disc of radius `rho`, extending the
    /// germ until the tail is below `2^-prec` (or a hard order cap is hit).
    pub fn evaluator(&self, rho: f64, prec: u32) -> Result<TrajectoryEvaluator> {
        if rho >= self.radius {
            return Err(Error::Precondition(format!("evaluation radius {rho} not below certified radius {}", self.radius)));
        }
        let mut germ = self.germ.clone();
        let target = 2f64.powi(-(prec as i32));
        let mut order = germ.order().max(8);
        let tail = match &self.majorant {
            None => 0.0,
            Some(m) => {
                let s = self.scale_f64();
                let data = m.cauchy_data(up(rho * s), self.radius * s);
                // smallest order meeting the target, from the best Cauchy radius
                let need = data
                    .iter()
                    .map(|&(q, v)| ((v / (down(1.0 - q) * target)).ln() / -q.ln()).ceil().max(0.0) as usize)
                    .min()
                    .unwrap_or(MAX_ORDER);
                order = order.max(need).min(MAX_ORDER);
                tail_from(&data, order)
            }
        };
        germ.extend(order);
        let s = GaussianRational::from_rational(self.scale.clone());
        let mut sk = GaussianRational::one();
        let mut coeffs = vec![Vec::with_capacity(order + 1); germ.dim()];
        for k in 0..=germ.order() {
            for (i, c) in coeffs.iter_mut().enumerate() {
                let a = &germ.coordinate(i)[k] * &sk;
                c.push(CBall::from_gaussian(&a, prec + 16));
            }
            sk = &sk * &s;
        }
        if self.is_polynomial() {
            for c in coeffs.iter_mut() {
                while c.len() > 1 && c.last().map(|b| b.re.is_zero() && b.im.is_zero() && b.rad == 0.0).unwrap_or(false) {
                    c.pop();
                }
            }
        }
        Ok(TrajectoryEvaluator { coeffs, tail, rho, prec, scale: self.scale.clone() })
    }
}

const MAX_ORDER: usize = 600;

/// Ball evaluator of a rescaled trajectory on a fixed closed disc.
#[derive(Clone, Debug)]
pub struct TrajectoryEvaluator {
    coeffs: Vec<Vec<CBall>>,
    tail: f64,
    pub rho: f64,
    pub prec: u32,
    pub scale: Rational,
}

impl TrajectoryEvaluator {
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn order(&self) -> usize {
        self.coeffs.first().map_or(0, |c| c.len().saturating_sub(1))
    }

    /// Enclosure of `phi(z)` for a ball `z` inside the closed disc of radius `rho`.
    pub fn eval(&self, z: &CBall) -> Result<Vec<CBall>> {
        if z.abs_upper() > self.rho {
            return Err(Error::Precondition("evaluation point outside the certified disc".into()));
        }
        Ok(self
            .coeffs
            .iter()
            .map(|c| {
                let mut acc = CBall::zero();
                for b in c.iter().rev() {
                    acc = acc.mul(z, self.prec).add(b, self.prec);
                }
                acc.with_radius(self.tail)
            })
            .collect())
    }

    /// Enclosures of `phi(z)` and `phi'(z)`; needs `z` strictly inside the disc.
    /// The derivative of the tail is bounded by Cauchy's estimate `tail / (rho - |z|)`.
    pub fn eval_with_derivative(&self, z: &CBall) -> Result<(Vec<CBall>, Vec<CBall>)> {
        let gap = down(self.rho - z.abs_upper());
        if !(gap > 0.0) {
            return Err(Error::Precondition("derivative needs a point inside the certified disc".into()));
        }
        let dtail = if self.tail == 0.0 { 0.0 } else { up(self.tail / gap) };
        let mut vals = Vec::with_capacity(self.coeffs.len());
        let mut ders = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (mut v, mut dv) = (CBall::zero(), CBall::zero());
            for b in c.iter().rev() {
                dv = dv.mul(z, self.prec).add(&v, self.prec);
                v = v.mul(z, self.prec).add(b, self.prec);
            }
            vals.push(v.with_radius(self.tail));
            ders.push(dv.with_radius(dtail));
        }
        Ok((vals, ders))
    }

    /// Midpoints of the (rescaled) coefficients, for floating searches.
    pub fn mid_coefficients(&self) -> Vec<Vec<num_complex::Complex64>> {
        self.coeffs.iter().map(|c| c.iter().map(CBall::mid_complex).collect()).collect()
    }

    pub fn eval_exact(&self, z: &GaussianRational) -> Result<Vec<CBall>> {
        self.eval(&CBall::from_gaussian(z, self.prec))
    }
}
