//! Certified zero counting of `P o phi` on the closed unit disc.
//!
//! The count is a winding number. The circle is parametrized rationally,
//! `z(s) = c + rho ((1 - s^2) + 2is) / (1 + s^2)` for `s` in `[-1, 1]` and its
//! reflection, so every contour point is an exact Gaussian rational. An arc is
//! accepted once the ball image of a disc covering it stays well away from 0;
//! the argument then varies by less than `pi/6` along the arc and the
//! principal argument of `f(b)/f(a)` is the true increment.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::ball::{CBall, Float};
use crate::algebra::eval::{eval_ball, eval_c64};
use crate::algebra::gaussian::{rat, GaussianRational, Rational};
use crate::algebra::monomial::Monomial;
use crate::algebra::polynomial::Polynomial;
use crate::algebra::series::Series;
use crate::dynamics::{
    certify_radius, multiplicity, multiplicity_cap, trajectory_series, Multiplicity, ParametrizedTrajectory,
    RadiusOptions, TrajectoryEvaluator, VectorField,
};
use crate::error::{check_dim, Error, Result};
use crate::orbit_ideal::{ideal_slice, leading_diagram};

/// `f = P o phi` on a disc of radius `r > 1` inside the certified radius.
#[derive(Clone, Debug)]
pub struct DiscFunction {
    pub trajectory: ParametrizedTrajectory,
    pub poly: Polynomial,
    pub r: f64,
}

impl DiscFunction {
    pub fn new(trajectory: ParametrizedTrajectory, poly: Polynomial) -> Result<Self> {
        check_dim(trajectory.dim(), poly.nvars())?;
        let r = if trajectory.radius.is_infinite() { 2.0 } else { (2.0f64).min((1.0 + trajectory.radius) / 2.0) };
        if !(r > 1.0) {
            return Err(Error::Precondition(format!("certified radius {} does not exceed 1", trajectory.radius)));
        }
        Ok(DiscFunction { trajectory, poly, r })
    }

    /// Trajectory of `field` through `p`, rescaled so the certified radius exceeds 1.5.
    pub fn from_point(field: &VectorField, p: &[GaussianRational], poly: Polynomial) -> Result<Self> {
        let germ = trajectory_series(field, p, 16)?;
        let traj = certify_radius(&germ, RadiusOptions::default())?;
        DiscFunction::new(traj, poly)
    }

    /// Use a different outer radius; it must leave room below the certified radius.
    pub fn with_outer_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 1.0) || !(r * 1.02 < self.trajectory.radius) {
            return Err(Error::Precondition(format!(
                "outer radius {r} must lie in (1, {}/1.02)",
                self.trajectory.radius
            )));
        }
        self.r = r;
        Ok(self)
    }

    /// Taylor coefficients of `f` in the rescaled variable.
    pub fn series(&self, len: usize) -> Result<Series> {
        let mut germ = self.trajectory.germ.clone();
        germ.extend(len.max(1) - 1);
        let s = germ.compose(&self.poly)?;
        let scale = GaussianRational::from_rational(self.trajectory.scale.clone());
        let mut sk = GaussianRational::one();
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            out.push(&s.coeff(k) * &sk);
            sk = &sk * &scale;
        }
        Ok(Series::new(out))
    }

    /// Taylor coefficients of `g o phi` in the rescaled variable, for another `g`.
    pub fn series_of(&self, g: &Polynomial, len: usize) -> Result<Series> {
        DiscFunction { trajectory: self.trajectory.clone(), poly: g.clone(), r: self.r }.series(len)
    }

    /// Errors when `f` vanishes identically (decided by the multiplicity cap).
    pub fn check_nonzero(&self) -> Result<u64> {
        match multiplicity(self.trajectory.field(), self.trajectory.germ.base(), &self.poly)? {
            Multiplicity::Finite { order } => Ok(order),
            Multiplicity::ExceedsCap { cap } => {
                Err(Error::Precondition(format!("P o phi vanishes to order > {cap}, hence identically")))
            }
        }
    }

    pub fn evaluator(&self, rho: f64, prec: u32) -> Result<DiscEvaluator> {
        let traj = self.trajectory.evaluator(rho, prec)?;
        let partials = (0..self.poly.nvars()).map(|i| self.poly.partial_derivative(i)).collect();
        Ok(DiscEvaluator { traj, poly: self.poly.clone(), partials, prec })
    }
}

/// Ball evaluator of `f` on a closed disc.
#[derive(Clone, Debug)]
pub struct DiscEvaluator {
    traj: TrajectoryEvaluator,
    poly: Polynomial,
    partials: Vec<Polynomial>,
    prec: u32,
}

impl DiscEvaluator {
    pub fn rho(&self) -> f64 {
        self.traj.rho
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    /// Same trajectory evaluator, another polynomial.
    pub fn with_poly(&self, poly: Polynomial) -> DiscEvaluator {
        let partials = (0..poly.nvars()).map(|i| poly.partial_derivative(i)).collect();
        DiscEvaluator { traj: self.traj.clone(), poly, partials, prec: self.prec }
    }

    pub fn eval(&self, z: &CBall) -> Result<CBall> {
        let phi = self.traj.eval(z)?;
        eval_ball(&self.poly, &phi, self.prec)
    }

    pub fn eval_exact(&self, z: &GaussianRational) -> Result<CBall> {
        self.eval(&CBall::from_gaussian(z, self.prec))
    }

    /// Enclosure of `f'` over a ball strictly inside the disc.
    pub fn derivative(&self, z: &CBall) -> Result<CBall> {
        Ok(self.value_and_slope(z)?.1)
    }

    /// Enclosures of `f`, `f'` and `phi` over a ball strictly inside the disc,
    /// from a single pass over the trajectory.
    pub fn value_and_slope(&self, z: &CBall) -> Result<(CBall, CBall, Vec<CBall>)> {
        let (phi, dphi) = self.traj.eval_with_derivative(z)?;
        let mut acc = CBall::zero();
        for (p, d) in self.partials.iter().zip(&dphi) {
            acc = acc.add(&eval_ball(p, &phi, self.prec)?.mul(d, self.prec), self.prec);
        }
        Ok((eval_ball(&self.poly, &phi, self.prec)?, acc, phi))
    }

    /// Enclosure of `f` over the disc `|z - center| <= rad`: the tighter of the
    /// direct ball image and the mean-value form `f(center) + f'(disc) * B(0, rad)`.
    pub fn eval_disc(&self, center: &GaussianRational, rad: f64) -> Result<CBall> {
        let c = CBall::from_gaussian(center, self.prec);
        let disc = c.clone().with_radius(rad);
        let direct = self.eval(&disc)?;
        if disc.abs_upper() >= self.traj.rho {
            return Ok(direct);
        }
        let slope = self.derivative(&disc)?.abs_upper();
        let centered = self.eval(&c)?.with_radius(rad * slope * (1.0 + 1e-12));
        Ok(if centered.rad < direct.rad { centered } else { direct })
    }

    pub fn float(&self) -> FloatEvaluator {
        FloatEvaluator { coeffs: self.traj.mid_coefficients(), poly: self.poly.clone(), partials: self.partials.clone() }
    }
}

/// Uncertified double-precision `f` and `f'`, used to seed root searches.
#[derive(Clone, Debug)]
pub struct FloatEvaluator {
    coeffs: Vec<Vec<Complex64>>,
    poly: Polynomial,
    partials: Vec<Polynomial>,
}

impl FloatEvaluator {
    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut x = Vec::with_capacity(self.coeffs.len());
        let mut dx = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (mut v, mut dv) = (zero, zero);
            for a in c.iter().rev() {
                dv = dv * z + v;
                v = v * z + a;
            }
            x.push(v);
            dx.push(dv);
        }
        let f = eval_c64(&self.poly, &x);
        let df = self.partials.iter().zip(&dx).fold(zero, |acc, (p, d)| acc + eval_c64(p, &x) * d);
        (f, df)
    }
}

fn dyadic(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

fn f64_to_rational(x: f64) -> Rational {
    Float::from_f64(x).to_rational()
}

/// A circle `|z - center| = radius` with exact data.
#[derive(Clone, Debug)]
pub struct Circle {
    pub center: GaussianRational,
    pub radius: Rational,
}

impl Circle {
    pub fn unit() -> Self {
        Circle { center: GaussianRational::zero(), radius: Rational::one() }
    }

    /// The contour point for parameter `s` on the right (`sign = 1`) or left half.
    pub(crate) fn point(&self, sign: i8, s: &Rational) -> GaussianRational {
        let s2 = s * s;
        let den = Rational::one() + &s2;
        let re = (Rational::one() - &s2) / &den;
        let im = (s + s) / &den;
        let mut w = GaussianRational::new(re * &self.radius, im * &self.radius);
        if sign < 0 {
            w = -w;
        }
        &self.center + &w
    }

    fn radius_f64(&self) -> f64 {
        crate::algebra::gaussian::rational_to_f64(&self.radius)
    }
}

#[derive(Clone, Debug)]
struct Arc {
    sign: i8,
    sa: Rational,
    sb: Rational,
    fa: CBall,
    fb: CBall,
}

enum ArcStep {
    Done { incr: f64, err: f64 },
    Split(Arc, Arc),
    Fail,
}

/// Image of a disc around `m` covering the arc between `a` and `b`.
fn arc_cover(ev: &DiscEvaluator, za: &GaussianRational, zm: &GaussianRational, zb: &GaussianRational) -> Result<CBall> {
    let d = |u: &GaussianRational| (u - zm).abs_f64();
    let rad = d(za).max(d(zb)) * (1.0 + 1e-9) + 1e-300;
    ev.eval_disc(zm, rad)
}

fn arc_step(ev: &DiscEvaluator, circle: &Circle, arc: Arc, min_width: &Rational) -> Result<ArcStep> {
    let two = Rational::from_integer(BigInt::from(2));
    let sm = (&arc.sa + &arc.sb) / &two;
    let za = circle.point(arc.sign, &arc.sa);
    let zb = circle.point(arc.sign, &arc.sb);
    let zm = circle.point(arc.sign, &sm);
    let cover = arc_cover(ev, &za, &zm, &zb)?;
    if cover.mid_abs_lower() > 2.0 * cover.rad {
        let (ma, mb) = (arc.fa.mid_complex(), arc.fb.mid_complex());
        let incr = (mb * ma.conj()).arg();
        let err = (PI / 2.0) * (arc.fa.rad / arc.fa.mid_abs_lower() + arc.fb.rad / arc.fb.mid_abs_lower()) + 1e-12;
        return Ok(ArcStep::Done { incr, err });
    }
    if &arc.sb - &arc.sa <= *min_width {
        return Ok(ArcStep::Fail);
    }
    let fm = ev.eval_exact(&zm)?;
    if fm.contains_zero() {
        return Ok(ArcStep::Fail);
    }
    let left = Arc { sign: arc.sign, sa: arc.sa, sb: sm.clone(), fa: arc.fa, fb: fm.clone() };
    let right = Arc { sign: arc.sign, sa: sm, sb: arc.sb, fa: fm, fb: arc.fb };
    Ok(ArcStep::Split(left, right))
}

/// Result of one certified winding computation.
#[derive(Clone, Debug)]
pub struct Winding {
    pub winding: i64,
    pub error: f64,
    pub arcs: usize,
}

const MIN_WIDTH_LOG2: u32 = 48;
const MAX_ARCS: usize = 1 << 18;

/// Winding number of `f` around `circle`, or `None` when a zero sits too close
/// to the contour at this precision.
pub fn winding_number(ev: &DiscEvaluator, circle: &Circle) -> Result<Option<Winding>> {
    let per_half = 32i64;
    let mut work = Vec::new();
    for sign in [1i8, -1] {
        let ss: Vec<Rational> = (0..=per_half).map(|k| rat(2 * k - per_half, per_half)).collect();
        let vals: Vec<CBall> =
            ss.par_iter().map(|s| ev.eval_exact(&circle.point(sign, s))).collect::<Result<Vec<_>>>()?;
        if vals.iter().any(CBall::contains_zero) {
            return Ok(None);
        }
        for k in 0..per_half as usize {
            work.push(Arc { sign, sa: ss[k].clone(), sb: ss[k + 1].clone(), fa: vals[k].clone(), fb: vals[k + 1].clone() });
        }
    }
    let min_width = dyadic(MIN_WIDTH_LOG2);
    let (mut total, mut err, mut arcs) = (0.0f64, 0.0f64, 0usize);
    while !work.is_empty() {
        let steps: Vec<ArcStep> =
            work.into_par_iter().map(|a| arc_step(ev, circle, a, &min_width)).collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for st in steps {
            match st {
                ArcStep::Done { incr, err: e } => {
                    total += incr;
                    err += e;
                    arcs += 1;
                }
                ArcStep::Split(a, b) => {
                    next.push(a);
                    next.push(b);
                }
                ArcStep::Fail => return Ok(None),
            }
        }
        if arcs + next.len() > MAX_ARCS {
            return Ok(None);
        }
        work = next;
    }
    if err >= 1.0 {
        return Ok(None);
    }
    let w = total / (2.0 * PI);
    Ok(Some(Winding { winding: w.round() as i64, error: err / (2.0 * PI), arcs }))
}

/// Certified number of zeros, with multiplicity, in the closed disc of `radius`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZeroCount {
    pub count: u64,
    pub certified: bool,
    /// Radius of the counting circle actually used (1 unless dilated).
    pub radius: f64,
    pub radius_exact: String,
    pub precision: u32,
    pub arcs: usize,
    /// Bound on `|computed winding - true winding|`.
    pub error: f64,
}

/// Count zeros of `f` on the closed unit disc.
///
/// Escalates precision up to 4x; if a zero still sits on the contour, dilates the
/// counting circle to `1 + 2^-j` inside `(1, r)` and reports the radius used.
pub fn count_zeros(f: &DiscFunction, prec: u32) -> Result<ZeroCount> {
    f.check_nonzero()?;
    let ev_rho = f.r;
    let mut last = prec;
    for p in [prec, 2 * prec, 4 * prec] {
        last = p;
        let ev = f.evaluator(ev_rho, p)?;
        if let Some(w) = settle(winding_number(&ev, &Circle::unit()))? {
            return finish(w, Rational::one(), p);
        }
    }
    let ev = f.evaluator(ev_rho, last)?;
    for j in [30u32, 24, 20, 16, 12, 10, 8, 6, 5, 4] {
        let rho = Rational::one() + dyadic(j);
        if crate::algebra::gaussian::rational_to_f64(&rho) * 1.1 >= f.r {
            continue;
        }
        let c = Circle { center: GaussianRational::zero(), radius: rho.clone() };
        if let Some(w) = settle(winding_number(&ev, &c))? {
            return finish(w, rho, last);
        }
    }
    Err(Error::Certification("argument principle could not be certified on any admissible contour".into()))
}

/// At low precision the enclosing balls can swell past the certified disc;
/// that is a failure to certify on this contour, not bad input.
fn settle<T>(w: Result<Option<T>>) -> Result<Option<T>> {
    match w {
        Err(Error::Precondition(_)) => Ok(None),
        other => other,
    }
}

fn finish(w: Winding, radius: Rational, prec: u32) -> Result<ZeroCount> {
    if w.winding < 0 {
        return Err(Error::Certification("negative winding number for a holomorphic function".into()));
    }
    Ok(ZeroCount {
        count: w.winding as u64,
        certified: true,
        radius: crate::algebra::gaussian::rational_to_f64(&radius),
        radius_exact: radius.to_string(),
        precision: prec,
        arcs: w.arcs,
        error: w.error,
    })
}

/// `C_r = 1 / log((1 + r) / 2)`.
pub fn jensen_constant(r: f64) -> f64 {
    1.0 / ((1.0 + r) / 2.0).ln()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JensenBound {
    pub r: f64,
    pub constant: f64,
    /// Upper bound for `log max |f|` on the disc of radius `r`.
    pub log_max_outer: f64,
    /// Lower bound for `log max |f|` on the unit disc.
    pub log_max_unit: f64,
    pub bound: f64,
    pub precision: u32,
}

/// `C_r log(M/m)` with `M` bounded above and `m` bounded below, so the value
/// returned is at least the exact expression.
pub fn jensen_bound(f: &DiscFunction, r: f64, prec: u32) -> Result<JensenBound> {
    let f = if r == f.r { f.clone() } else { f.clone().with_outer_radius(r)? };
    for p in [prec, 2 * prec, 4 * prec] {
        let ev = f.evaluator(r * 1.01, p)?;
        let attempt = || -> Result<Option<JensenBound>> {
            let m = unit_max_lower(&ev)?;
            if m <= 0.0 {
                return Ok(None);
            }
            let outer = Circle { center: GaussianRational::zero(), radius: f64_to_rational(r) };
            let big = circle_max_upper(&ev, &outer)?;
            let (lo, hi) = (m.ln(), big.ln());
            let constant = jensen_constant(r);
            Ok(Some(JensenBound {
                r,
                constant,
                log_max_outer: hi,
                log_max_unit: lo,
                bound: (constant * (hi - lo)).max(0.0),
                precision: p,
            }))
        };
        if let Some(b) = settle(attempt())? {
            return Ok(b);
        }
    }
    Err(Error::Certification("could not separate max |f| on the unit disc from 0".into()))
}

/// Largest certified lower bound of `|f|` at exact points of the closed unit disc.
fn unit_max_lower(ev: &DiscEvaluator) -> Result<f64> {
    let unit = Circle::unit();
    let n = 128i64;
    let mut pts = vec![GaussianRational::zero()];
    for sign in [1i8, -1] {
        for k in 0..n {
            pts.push(unit.point(sign, &rat(2 * k - n, n)));
        }
    }
    let vals = pts.par_iter().map(|z| ev.eval_exact(z).map(|b| b.abs_lower())).collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Certified upper bound of `|f|` on a circle (hence on its disc), refined where
/// the cover bound is far above the observed values.
pub(crate) fn circle_max_upper(ev: &DiscEvaluator, circle: &Circle) -> Result<f64> {
    let two = Rational::from_integer(BigInt::from(2));
    let n = 256i64;
    let mut arcs: Vec<(i8, Rational, Rational)> = Vec::new();
    for sign in [1i8, -1] {
        for k in 0..n {
            arcs.push((sign, rat(2 * k - n, n), rat(2 * k + 2 - n, n)));
        }
    }
    let mut best_upper = 0.0f64;
    for round in 0..6 {
        let res: Vec<(f64, f64)> = arcs
            .par_iter()
            .map(|(sign, a, b)| {
                let m = (a + b) / &two;
                let (za, zm, zb) = (circle.point(*sign, a), circle.point(*sign, &m), circle.point(*sign, b));
                let up = arc_cover(ev, &za, &zm, &zb)?.abs_upper();
                let lo = ev.eval_exact(&zm)?.abs_lower();
                Ok((up, lo))
            })
            .collect::<Result<Vec<_>>>()?;
        let lower = res.iter().map(|x| x.1).fold(0.0, f64::max);
        let threshold = lower * 1.01;
        let mut next = Vec::new();
        let mut settled = 0.0f64;
        for ((up, _), arc) in res.into_iter().zip(arcs) {
            if up > threshold && round < 5 {
                let m = (&arc.1 + &arc.2) / &two;
                next.push((arc.0, arc.1, m.clone()));
                next.push((arc.0, m, arc.2));
            } else {
                settled = settled.max(up);
            }
        }
        best_upper = best_upper.max(settled);
        if next.is_empty() {
            break;
        }
        arcs = next;
    }
    Ok(best_upper)
}

/// A disc containing a cluster of zeros, with its certified multiplicity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootCluster {
    pub center: (f64, f64),
    pub radius: f64,
    pub multiplicity: i64,
    pub inside: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootIsolation {
    pub clusters: Vec<RootCluster>,
    /// Do the certified clusters inside the counting disc account for the full count?
    pub consistent: bool,
}

fn newton(fe: &FloatEvaluator, mut z: Complex64, limit: f64) -> Option<Complex64> {
    for _ in 0..80 {
        let (f, df) = fe.eval(z);
        if df.norm() == 0.0 || !f.is_finite() {
            return None;
        }
        let step = f / df;
        z -= step;
        if z.norm() > limit {
            return None;
        }
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    let (f, _) = fe.eval(z);
    (f.norm() < 1e-10).then_some(z)
}

/// Locate the zeros counted by `count` with pairwise disjoint certified discs.
pub fn isolate_roots(f: &DiscFunction, count: &ZeroCount) -> Result<RootIsolation> {
    let ev = f.evaluator(f.r, count.precision)?;
    let fe = ev.float();
    let rho = count.radius;
    let limit = (rho + f.r) / 2.0;
    let mut starts = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=8 {
        let rad = rho * 1.05 * i as f64 / 8.0;
        for j in 0..24 {
            starts.push(Complex64::from_polar(rad, 2.0 * PI * (j as f64 + 0.5 * (i % 2) as f64) / 24.0));
        }
    }
    let found: Vec<Complex64> = starts.par_iter().filter_map(|&z| newton(&fe, z, limit)).collect();
    // single-linkage clusters at 1e-5; multiple zeros converge only to ~sqrt(eps)
    let mut centers: Vec<(Complex64, usize)> = Vec::new();
    for z in found {
        match centers.iter_mut().find(|(c, _)| (*c - z).norm() < 1e-5) {
            Some((c, k)) => {
                *c = (*c * *k as f64 + z) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => centers.push((z, 1)),
        }
    }
    centers.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
    let mut clusters = Vec::new();
    let mut inside_total = 0i64;
    let mut ok = true;
    for (i, (c, _)) in centers.iter().enumerate() {
        let mut lim = 1e-3f64;
        for (j, (o, _)) in centers.iter().enumerate() {
            if i != j {
                lim = lim.min(0.4 * (c - o).norm());
            }
        }
        let edge = (c.norm() - rho).abs();
        if edge > 0.0 {
            lim = lim.min(0.4 * edge);
        }
        if !(lim > 0.0) || c.norm() > rho + 0.5 {
            continue;
        }
        let k = (-lim.log2()).ceil().max(0.0) as u32;
        let circle = Circle { center: GaussianRational::new(f64_to_rational(c.re), f64_to_rational(c.im)), radius: dyadic(k) };
        let radius = circle.radius_f64();
        let inside = c.norm() + radius < rho;
        let mult = match winding_number(&ev, &circle)? {
            Some(w) => w.winding,
            None => {
                ok = false;
                continue;
            }
        };
        if inside {
            inside_total += mult;
            if mult < 1 {
                ok = false;
            }
        }
        if mult > 0 {
            clusters.push(RootCluster { center: (c.re, c.im), radius, multiplicity: mult, inside });
        }
    }
    let consistent = ok && inside_total == count.count as i64;
    Ok(RootIsolation { clusters, consistent })
}

/// One row of the growth table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GrowthRow {
    pub d: u32,
    pub samples: usize,
    #[serde(rename = "maxCount")]
    pub max_count: u64,
    /// Samples whose count could not be certified (excluded from `maxCount`).
    pub failures: usize,
    /// `d^(2 kappa (m+1)) log d`.
    pub envelope: f64,
    /// `2^(n+1) (d + (n-1) delta)^n`.
    #[serde(rename = "multCap")]
    pub mult_cap: u64,
    /// `maxCount / envelope`, for `d >= 2`.
    #[serde(rename = "fittedC")]
    pub fitted_c: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GrowthTable {
    pub field: Vec<String>,
    pub point: Vec<String>,
    pub kappa: usize,
    pub m: usize,
    pub seed: u64,
    pub precision: u32,
    pub rows: Vec<GrowthRow>,
    /// Smallest `C` with `N(d) <= C d^(2 kappa (m+1)) log d` for all `d >= 2`.
    #[serde(rename = "fittedC")]
    pub fitted_c: f64,
}

impl GrowthTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["d", "samples", "maxCount", "failures", "envelope", "multCap", "fittedC"])
            .map_err(|e| Error::Domain(e.to_string()))?;
        for r in &self.rows {
            w.write_record([
                r.d.to_string(),
                r.samples.to_string(),
                r.max_count.to_string(),
                r.failures.to_string(),
                format!("{:e}", r.envelope),
                r.mult_cap.to_string(),
                r.fitted_c.map(|c| format!("{c:e}")).unwrap_or_default(),
            ])
            .map_err(|e| Error::Domain(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Domain(e.to_string()))
    }
}

/// Random `P` of exact degree `d` with integer coefficients in `[-5, 5]`.
///
/// The count is invariant under scaling, so the unit-norm normalization is left implicit.
pub fn random_polynomial(rng: &mut impl Rng, nvars: usize, d: u32) -> Polynomial {
    loop {
        let p = Polynomial::from_terms(
            nvars,
            Monomial::all_up_to_degree(nvars, d)
                .into_iter()
                .map(|m| (m, GaussianRational::from_int(rng.gen_range(-5..=5)))),
        );
        if p.degree() == d && !p.is_zero() {
            return p;
        }
    }
}

fn cell_rng(seed: u64, d: u32, sample: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ((d as u64) << 40) ^ (sample as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `d^(2 kappa (m+1)) log d`.
pub fn main_envelope(d: u32, kappa: usize, m: usize) -> f64 {
    (d as f64).powi((2 * kappa * (m + 1)) as i32) * (d as f64).ln()
}

/// Count zeros of random `P` of each degree along the trajectory through `p`.
pub fn main_theorem_harness(
    field: &VectorField,
    p: &[GaussianRational],
    degrees: &[u32],
    samples: usize,
    seed: u64,
    prec: u32,
) -> Result<GrowthTable> {
    let germ = trajectory_series(field, p, 16)?;
    let traj = certify_radius(&germ, RadiusOptions::default())?;
    let n = field.dim();
    let dmax = degrees.iter().copied().max().unwrap_or(1);
    let kappa = leading_diagram(&ideal_slice(field, p, dmax)?).kappa();
    let cells: Vec<(u32, usize)> = degrees.iter().flat_map(|&d| (0..samples).map(move |s| (d, s))).collect();
    let counts: Vec<(u32, Option<u64>)> = cells
        .par_iter()
        .map(|&(d, s)| {
            let poly = random_polynomial(&mut cell_rng(seed, d, s), n, d);
            let f = DiscFunction::new(traj.clone(), poly)?;
            match count_zeros(&f, prec) {
                Ok(c) => Ok((d, Some(c.count))),
                // uncertified, or P o phi identically zero
                Err(Error::Certification(_) | Error::Precondition(_)) => Ok((d, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut fitted = 0.0f64;
    for &d in degrees {
        let mine: Vec<Option<u64>> = counts.iter().filter(|c| c.0 == d).map(|c| c.1).collect();
        let max_count = mine.iter().flatten().copied().max().unwrap_or(0);
        let envelope = main_envelope(d, kappa, n);
        let fitted_c = (d >= 2).then(|| max_count as f64 / envelope);
        if let Some(c) = fitted_c {
            fitted = fitted.max(c);
        }
        rows.push(GrowthRow {
            d,
            samples,
            max_count,
            failures: mine.iter().filter(|c| c.is_none()).count(),
            envelope,
            mult_cap: multiplicity_cap(n, d, field.delta()),
            fitted_c,
        });
    }
    Ok(GrowthTable {
        field: field.component_strings(),
        point: p.iter().map(ToString::to_string).collect(),
        kappa,
        m: n,
        seed,
        precision: prec,
        rows,
        fitted_c: fitted,
    })
}
