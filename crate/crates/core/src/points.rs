//! Rational points of bounded height on `Phi = (P1 o phi, P2 o phi)`.
//!
//! The census enumerates rationals `q1` of height at most `H` and solves
//! `Phi1(z) = q1` on the closed unit disc. Root counts come from a tube around
//! `Phi1(|z| = 1)`: only arcs whose image meets the real axis matter, and each
//! maximal chain of them crosses the axis inside a known interval with a known
//! net sign. For `q1` outside every such interval the winding number is a
//! suffix sum; the rest go through a full contour count.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::ball::{CBall, Float};
use crate::algebra::eval::eval_ball;
use crate::algebra::gaussian::{rat, rational_to_f64, GaussianRational, Rational};
use crate::algebra::linalg::{kernel, Row};
use crate::algebra::monomial::Monomial;
use crate::algebra::polynomial::Polynomial;
use crate::algebra::series::Series;
use crate::dynamics::{multiplicity, Multiplicity};
use crate::error::{Error, Result};
use crate::orbit_ideal::{ideal_slice, leading_diagram};
use crate::zerocount::{circle_max_upper, winding_number, Circle, DiscEvaluator, DiscFunction, FloatEvaluator};

/// `H(a/b) = max(|a|, |b|)` for the reduced fraction, with `H(0) = 1`.
pub fn height_of(q: &Rational) -> BigInt {
    if q.is_zero() {
        return BigInt::one();
    }
    q.numer().abs().max(q.denom().clone())
}

/// Maximum height over the components.
pub fn height_of_vec(v: &[Rational]) -> BigInt {
    v.iter().map(height_of).max().unwrap_or_else(BigInt::one)
}

/// The rational of least height in `[lo, hi]`: least denominator, and then
/// least numerator in absolute value.
pub fn simplest_in(lo: &Rational, hi: &Rational) -> Rational {
    debug_assert!(lo <= hi);
    if !lo.is_positive() && !hi.is_negative() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_in(&-hi, &-lo);
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    let next = &fl + Rational::one();
    if next <= *hi {
        return next;
    }
    let inner = simplest_in(&(Rational::one() / (hi - &fl)), &(Rational::one() / (lo - &fl)));
    fl + Rational::one() / inner
}

/// Least-height rational in `[lo, hi]` if its height is at most `h`.
///
/// Walks the common continued-fraction prefix of the endpoints; convergents only
/// grow along it, so the walk stops once they pass `h`.
pub fn simplest_in_height(lo: &Rational, hi: &Rational, h: u64) -> Option<Rational> {
    if !lo.is_positive() && !hi.is_negative() {
        return Some(Rational::zero());
    }
    if hi.is_negative() {
        return simplest_in_height(&-hi, &-lo, h).map(|q| -q);
    }
    let hb = BigInt::from(h);
    // endpoints kept as unreduced pairs; reduction dominates otherwise
    let (mut nl, mut dl) = (lo.numer().clone(), lo.denom().clone());
    let (mut nh, mut dh) = (hi.numer().clone(), hi.denom().clone());
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    loop {
        let (fl, rl) = nl.div_mod_floor(&dl);
        let t = if rl.is_zero() {
            Some(fl.clone())
        } else if (&fl + 1u32) * &dh <= nh {
            Some(&fl + 1u32)
        } else {
            None
        };
        let a = t.clone().unwrap_or_else(|| fl.clone());
        let (p2, q2) = (&a * &p1 + &p0, &a * &q1 + &q0);
        if t.is_some() {
            let q = Rational::new(p2, q2);
            return (height_of(&q) <= hb).then_some(q);
        }
        if p2 > hb || q2 > hb {
            return None;
        }
        let rh = &nh - &fl * &dh;
        (nl, dl, nh, dh) = (dh, rh, dl, rl);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
}

fn f64_rat(x: f64) -> Rational {
    Float::from_f64(x).to_rational()
}

/// The real rational of least height inside the ball, if it meets the real axis
/// and that height is at most `h`.
fn real_candidate(b: &CBall, h: u64) -> Option<Rational> {
    if b.im.abs_lower() > b.rad {
        return None;
    }
    let r = f64_rat(b.rad);
    let mid = b.re.to_rational();
    simplest_in_height(&(&mid - &r), &(&mid + &r), h)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CensusPoint {
    /// Center and radius of a disc holding exactly one preimage.
    pub z: [f64; 2],
    pub z_radius: f64,
    /// The exact preimage, when it could be identified.
    pub z_exact: Option<String>,
    pub x: String,
    pub y: String,
    pub height: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct UndecidedPoint {
    pub z: [f64; 2],
    pub z_radius: f64,
    pub x: String,
    /// Least-height rational inside the enclosure of `Phi2`, if any.
    pub y_candidate: Option<String>,
    /// Height of `(x, y_candidate)`.
    pub height: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointCensus {
    #[serde(rename = "H")]
    pub h: u64,
    pub points: Vec<CensusPoint>,
    pub undecided: Vec<UndecidedPoint>,
    pub candidates: usize,
    /// Candidates resolved by a full contour count instead of the tube.
    pub contour_counts: usize,
    pub precision: u32,
    pub method: String,
}

impl PointCensus {
    /// The census for a smaller bound, which is the subset of heights `<= h`.
    pub fn restrict(&self, h: u64) -> PointCensus {
        let h = h.min(self.h);
        PointCensus {
            h,
            points: self.points.iter().filter(|p| p.height <= h).cloned().collect(),
            undecided: self.undecided.iter().filter(|p| p.height <= h).cloned().collect(),
            candidates: self.candidates,
            contour_counts: self.contour_counts,
            precision: self.precision,
            method: self.method.clone(),
        }
    }

    pub fn member_pairs(&self) -> Result<Vec<(Rational, Rational)>> {
        self.points
            .iter()
            .map(|p| Ok((crate::algebra::gaussian::parse_rational(&p.x)?, crate::algebra::gaussian::parse_rational(&p.y)?)))
            .collect()
    }
}

/// A chain of contour arcs whose image crosses the real axis inside `[lo, hi]`
/// with net upward crossing count `sign`.
#[derive(Clone, Debug)]
struct Crossing {
    lo: f64,
    hi: f64,
    sign: i64,
}

#[derive(Clone, Debug)]
struct Tube {
    /// Sorted by `lo`, with suffix sums of `sign`.
    crossings: Vec<Crossing>,
    suffix: Vec<i64>,
    /// Merged union of the crossing intervals.
    union: Vec<(f64, f64)>,
}

impl Tube {
    fn ambiguous(&self, w: f64) -> bool {
        let i = self.union.partition_point(|iv| iv.1 < w);
        i < self.union.len() && self.union[i].0 <= w
    }

    /// Winding number of `Phi1(|z| = 1)` around a real `w` outside every interval.
    fn winding(&self, w: f64) -> i64 {
        let i = self.crossings.partition_point(|c| c.lo <= w);
        self.suffix[i]
    }

    fn range(&self) -> Option<(f64, f64)> {
        Some((self.union.first()?.0, self.union.last()?.1))
    }
}

fn im_sign(b: &CBall) -> i64 {
    if b.im.abs_lower() > b.rad {
        if b.im.to_f64() > 0.0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

fn build_tube(ev: &DiscEvaluator, tau: f64) -> Result<Option<Tube>> {
    let circle = Circle::unit();
    let two = rat(2, 1);
    let n = 64i64;
    // (sign, sa, sb) in cyclic order: right half then left half, each by increasing s
    let mut arcs: Vec<(i8, Rational, Rational)> = Vec::new();
    for sign in [1i8, -1] {
        for k in 0..n {
            arcs.push((sign, rat(2 * k - n, n), rat(2 * k + 2 - n, n)));
        }
    }
    let min_width = Rational::new(BigInt::one(), BigInt::one() << 44);
    // refine arcs whose image meets the axis until the cover is small
    let mut done: Vec<(i8, Rational, Rational, Option<CBall>)> = Vec::new();
    let mut work = arcs;
    while !work.is_empty() {
        let covers: Vec<CBall> = work
            .par_iter()
            .map(|(sg, a, b)| {
                let m = (a + b) / &two;
                circle.cover(ev, *sg, a, &m, b)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for ((sg, a, b), c) in work.into_iter().zip(covers) {
            let meets = c.im.abs_lower() <= c.rad;
            if meets && c.rad > tau && &b - &a > min_width {
                let m = (&a + &b) / &two;
                next.push((sg, a, m.clone()));
                next.push((sg, m, b));
            } else {
                done.push((sg, a, b, meets.then_some(c)));
            }
        }
        work = next;
    }
    done.sort_by(|x, y| (-x.0, &x.1).cmp(&(-y.0, &y.1)));
    // endpoint signs at the start of every arc
    let signs: Vec<i64> = done
        .par_iter()
        .map(|(sg, a, _, _)| ev.eval_exact(&circle.point(*sg, a)).map(|b| im_sign(&b)))
        .collect::<Result<Vec<_>>>()?;
    let Some(start) = signs.iter().position(|&s| s != 0) else {
        return Ok(None);
    };
    let len = done.len();
    let mut crossings = Vec::new();
    let mut i = start;
    let mut first = true;
    while first || i != start {
        first = false;
        let s0 = signs[i];
        let (mut lo, mut hi, mut any) = (f64::INFINITY, f64::NEG_INFINITY, false);
        let mut j = i;
        loop {
            if let Some(c) = &done[j].3 {
                let (m, _) = c.mid_f64();
                let r = c.rad * (1.0 + 1e-9) + m.abs() * 1e-12 + 1e-300;
                lo = lo.min(m - r);
                hi = hi.max(m + r);
                any = true;
            }
            j = (j + 1) % len;
            if signs[j] != 0 {
                break;
            }
        }
        let s1 = signs[j];
        if any {
            crossings.push(Crossing { lo, hi, sign: (s1 - s0) / 2 });
        } else if s0 != s1 {
            return Err(Error::Certification("tube lost a crossing of the real axis".into()));
        }
        i = j;
    }
    if crossings.iter().map(|c| c.sign).sum::<i64>() != 0 {
        return Err(Error::Certification("tube crossings do not close up".into()));
    }
    crossings.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
    let mut suffix = vec![0i64; crossings.len() + 1];
    for k in (0..crossings.len()).rev() {
        suffix[k] = suffix[k + 1] + crossings[k].sign;
    }
    let mut union: Vec<(f64, f64)> = Vec::new();
    for c in &crossings {
        match union.last_mut() {
            Some(last) if c.lo <= last.1 => last.1 = last.1.max(c.hi),
            _ => union.push((c.lo, c.hi)),
        }
    }
    Ok(Some(Tube { crossings, suffix, union }))
}

impl Circle {
    /// Image of a disc covering the arc `[a, b]` on this circle.
    fn cover(&self, ev: &DiscEvaluator, sign: i8, a: &Rational, m: &Rational, b: &Rational) -> Result<CBall> {
        let (za, zm, zb) = (self.point(sign, a), self.point(sign, m), self.point(sign, b));
        let d = |u: &GaussianRational| (u - &zm).abs_f64();
        let rad = d(&za).max(d(&zb)) * (1.0 + 1e-9) + 1e-300;
        ev.eval_disc(&zm, rad)
    }
}

/// Certified root of `f - q` near `z0`, unique in the returned disc, together
/// with an enclosure of `phi` over a disc containing it.
fn krawczyk(ev: &DiscEvaluator, fe: &FloatEvaluator, q: &CBall, z0: Complex64) -> Result<Option<(GaussianRational, f64, Vec<CBall>)>> {
    if !z0.is_finite() {
        return Ok(None);
    }
    let prec = ev.precision();
    let zq = GaussianRational::new(f64_rat(z0.re), f64_rat(z0.im));
    let c = CBall::from_gaussian(&zq, prec);
    if c.abs_upper() >= ev.rho() {
        return Ok(None);
    }
    let g0 = ev.eval(&c)?.sub(q, prec);
    let dp = fe.eval(z0).1;
    if dp.norm() == 0.0 || !dp.is_finite() {
        return Ok(None);
    }
    let y = Complex64::new(1.0, 0.0) / dp;
    let yb = CBall::from_f64(y.re, y.im);
    let yg = yb.mul(&g0, prec).abs_upper();
    let scale = 1.0 + z0.norm();
    for eps in [1e-13, 1e-10, 1e-7, 1e-5] {
        let eps = eps * scale;
        if eps <= 2.0 * yg {
            continue;
        }
        let b = c.clone().with_radius(eps);
        if b.abs_upper() >= ev.rho() {
            return Ok(None);
        }
        let (_, d, phi) = ev.value_and_slope(&b)?;
        let t = CBall::exact_int(1).sub(&yb.mul(&d, prec), prec).abs_upper();
        let k = (yg + t * eps) * (1.0 + 1e-12);
        if k < eps {
            return Ok(Some((zq, k.max(f64::MIN_POSITIVE), phi)));
        }
    }
    Ok(None)
}

/// Exact data for identifying preimages: `phi(0)` is the base point, and
/// polynomial trajectories can be evaluated anywhere.
struct ExactTrajectory {
    base: Vec<GaussianRational>,
    /// Rescaled coefficient lists, when the trajectory is polynomial.
    coeffs: Option<Vec<Vec<GaussianRational>>>,
}

impl ExactTrajectory {
    fn new(f: &DiscFunction) -> Self {
        let t = &f.trajectory;
        let coeffs = t.is_polynomial().then(|| {
            let s = GaussianRational::from_rational(t.scale.clone());
            (0..t.dim())
                .map(|i| {
                    let mut sk = GaussianRational::one();
                    t.germ
                        .coordinate(i)
                        .iter()
                        .map(|a| {
                            let v = a * &sk;
                            sk = &sk * &s;
                            v
                        })
                        .collect()
                })
                .collect()
        });
        ExactTrajectory { base: t.germ.base().to_vec(), coeffs }
    }

    fn at(&self, z: &GaussianRational) -> Option<Vec<GaussianRational>> {
        if z.is_zero() {
            return Some(self.base.clone());
        }
        let cs = self.coeffs.as_ref()?;
        Some(cs.iter().map(|c| c.iter().rev().fold(GaussianRational::zero(), |acc, a| &(&acc * z) + a)).collect())
    }

    /// Exact candidate preimage inside the disc, if one can be named.
    fn candidate(&self, center: &GaussianRational, rad: f64) -> Option<GaussianRational> {
        let r = f64_rat(rad);
        let r2 = &r * &r;
        if center.norm_sqr() <= r2 {
            return Some(GaussianRational::zero());
        }
        self.coeffs.as_ref()?;
        let re = simplest_in(&(&center.re - &r), &(&center.re + &r));
        let im = simplest_in(&(&center.im - &r), &(&center.im + &r));
        let z = GaussianRational::new(re, im);
        ((&z - center).norm_sqr() <= r2).then_some(z)
    }

    /// Order of vanishing of `g o phi` at an exact point, up to `limit`.
    fn order_at(&self, g: &Polynomial, z: &GaussianRational, f: &DiscFunction, limit: usize) -> Result<Option<usize>> {
        if z.is_zero() {
            return Ok(f.series_of(g, limit + 1)?.valuation());
        }
        let Some(cs) = &self.coeffs else { return Ok(None) };
        // Taylor expansion of the polynomial trajectory at z, then compose
        let shifted: Vec<Series> = cs
            .iter()
            .map(|c| {
                let p = Series::new(c.clone()).to_polynomial();
                let mut out = Vec::with_capacity(limit + 1);
                let mut d = p.clone();
                let mut fact = GaussianRational::one();
                for k in 0..=limit {
                    if k > 0 {
                        d = d.partial_derivative(0);
                        fact = &fact * &GaussianRational::from_int(k as i64);
                    }
                    let v = d.eval(std::slice::from_ref(z)).unwrap_or_else(|_| GaussianRational::zero());
                    out.push(&v * &fact.inv().expect("nonzero"));
                }
                Series::new(out)
            })
            .collect();
        Ok(Series::eval_polynomial(g, &shifted).valuation())
    }
}

enum RootKind {
    Simple,
    Cluster(i64),
}

struct Root {
    center: GaussianRational,
    rad: f64,
    kind: RootKind,
    mult: i64,
    /// Enclosure of `phi` over a disc containing the root, when already known.
    phi: Option<Vec<CBall>>,
}

impl Root {
    fn z(&self) -> [f64; 2] {
        let (a, b) = self.center.to_f64_pair();
        [a, b]
    }

    /// 1 inside the circle of radius `rho`, -1 outside, 0 when the disc straddles it.
    fn side(&self, rho: f64) -> i8 {
        let a = self.center.abs_f64();
        if a + self.rad < rho * (1.0 - 1e-15) {
            1
        } else if a - self.rad > rho * (1.0 + 1e-15) {
            -1
        } else {
            0
        }
    }
}

fn newton_from(fe: &FloatEvaluator, q: f64, mut z: Complex64, limit: f64) -> Option<Complex64> {
    for _ in 0..60 {
        let (f, df) = fe.eval(z);
        let f = f - q;
        if df.norm() == 0.0 || !f.is_finite() {
            return None;
        }
        let step = f / df;
        z -= step;
        if !(z.norm() <= limit) {
            return None;
        }
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    let (f, _) = fe.eval(z);
    ((f - q).norm() < 1e-9).then_some(z)
}

fn starts() -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=5 {
        let r = 1.05 * i as f64 / 5.0;
        let m = 4 * i + 4;
        for j in 0..m {
            v.push(Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.5) / m as f64));
        }
    }
    v
}

/// Locate roots of `Phi1 - q1` until their multiplicities inside `rho` add up to `want`.
fn find_roots(ev: &DiscEvaluator, fe: &FloatEvaluator, q1: &Rational, rho: f64, want: i64) -> Result<Option<Vec<Root>>> {
    let q = rational_to_f64(q1);
    let qb = CBall::from_gaussian(&GaussianRational::from_rational(q1.clone()), ev.precision());
    let limit = (rho + ev.rho()) / 2.0;
    let mut roots: Vec<Root> = Vec::new();
    let mut inside = 0i64;
    for s in starts() {
        if inside >= want {
            break;
        }
        let Some(z) = newton_from(fe, q, s, limit) else { continue };
        if roots.iter().any(|r| (Complex64::new(r.z()[0], r.z()[1]) - z).norm() <= r.rad.max(1e-6)) {
            continue;
        }
        let root = match krawczyk(ev, fe, &qb, z)? {
            Some((center, rad, phi)) => Root { center, rad, kind: RootKind::Simple, mult: 1, phi: Some(phi) },
            None => {
                let mut lim = 1e-3f64;
                for r in &roots {
                    lim = lim.min(0.4 * ((Complex64::new(r.z()[0], r.z()[1]) - z).norm() - r.rad));
                }
                let edge = (z.norm() - rho).abs();
                if edge > 0.0 {
                    lim = lim.min(0.4 * edge);
                }
                if !(lim > 1e-12) {
                    return Ok(None);
                }
                let k = (-lim.log2()).ceil() as u32;
                let center = GaussianRational::new(f64_rat(z.re), f64_rat(z.im));
                let circle = Circle { center: center.clone(), radius: Rational::new(BigInt::one(), BigInt::one() << k) };
                let rad = 2f64.powi(-(k as i32));
                let mut g = ev.poly().clone();
                g.add_term(Monomial::one(g.nvars()), &-GaussianRational::from_rational(q1.clone()));
                match winding_number(&ev.with_poly(g), &circle)? {
                    Some(w) if w.winding > 0 => {
                        Root { center, rad, kind: RootKind::Cluster(w.winding), mult: w.winding, phi: None }
                    }
                    _ => continue,
                }
            }
        };
        if root.side(rho) == 1 {
            inside += root.mult;
        } else if root.side(rho) == 0 {
            return Ok(None);
        }
        roots.push(root);
    }
    Ok((inside == want).then_some(roots))
}

/// Verdict on one root of `Phi1 = q1`.
enum RootVerdict {
    Out,
    Member(CensusPoint),
    Undecided(UndecidedPoint),
}

struct CensusContext<'a> {
    f1: &'a DiscFunction,
    ev1: DiscEvaluator,
    ev2: DiscEvaluator,
    fe1: FloatEvaluator,
    exact: ExactTrajectory,
    h: u64,
}

impl CensusContext<'_> {
    fn judge(&self, q1: &Rational, root: &Root) -> Result<RootVerdict> {
        let hq1 = height_of(q1).to_u64().unwrap_or(u64::MAX);
        let x = q1.to_string();
        // exact identification of the preimage
        if let Some(zt) = self.exact.candidate(&root.center, root.rad) {
            if let Some(pt) = self.exact.at(&zt) {
                let mut g = self.f1.poly.clone();
                g.add_term(Monomial::one(g.nvars()), &-GaussianRational::from_rational(q1.clone()));
                let on = g.eval(&pt)? .is_zero();
                let unique = match root.kind {
                    RootKind::Simple => true,
                    RootKind::Cluster(m) => self.exact.order_at(&g, &zt, self.f1, m as usize)? == Some(m as usize),
                };
                if on && unique {
                    if zt.norm_sqr() > Rational::one() {
                        return Ok(RootVerdict::Out);
                    }
                    let y = self.ev2_poly().eval(&pt)?;
                    if !y.im.is_zero() {
                        return Ok(RootVerdict::Out);
                    }
                    let hy = height_of(&y.re).to_u64().unwrap_or(u64::MAX);
                    if hy.max(hq1) > self.h {
                        return Ok(RootVerdict::Out);
                    }
                    return Ok(RootVerdict::Member(CensusPoint {
                        z: root.z(),
                        z_radius: root.rad,
                        z_exact: Some(zt.to_string()),
                        x,
                        y: y.re.to_string(),
                        height: hy.max(hq1),
                    }));
                }
            }
        }
        let yb = match &root.phi {
            Some(phi) => eval_ball(self.ev2.poly(), phi, self.ev2.precision())?,
            None => self.ev2.eval_disc(&root.center, root.rad)?,
        };
        let Some(cand) = real_candidate(&yb, self.h) else { return Ok(RootVerdict::Out) };
        let hy = height_of(&cand).to_u64().unwrap_or(u64::MAX);
        if root.side(1.0) == -1 {
            return Ok(RootVerdict::Out);
        }
        let reason = match (&root.kind, root.side(1.0)) {
            (_, 0) => "preimage on the unit circle up to enclosure".to_string(),
            (RootKind::Cluster(m), _) => format!("cluster of multiplicity {m} not resolved exactly"),
            _ => "value enclosure contains a rational; exactness unprovable".to_string(),
        };
        Ok(RootVerdict::Undecided(UndecidedPoint {
            z: root.z(),
            z_radius: root.rad,
            x,
            y_candidate: Some(cand.to_string()),
            height: hy.max(hq1),
            reason,
        }))
    }

    fn ev2_poly(&self) -> &Polynomial {
        self.ev2.poly()
    }

    fn ev_for(&self, q1: &Rational) -> DiscEvaluator {
        let c = GaussianRational::from_rational(q1.clone());
        let mut p = self.f1.poly.clone();
        p.add_term(Monomial::one(p.nvars()), &-c);
        self.ev1.with_poly(p)
    }

    /// Roots of `Phi1 = q1` on the closed disc by a full contour count, dilating
    /// the circle when a root sits on it.
    fn contour_roots(&self, q1: &Rational) -> Result<std::result::Result<(Vec<Root>, f64), String>> {
        let g = self.ev_for(q1);
        let mut circles = vec![Rational::one()];
        for j in [30u32, 20, 12, 8] {
            circles.push(Rational::one() + Rational::new(BigInt::one(), BigInt::one() << j));
        }
        for rho in circles {
            let circle = Circle { center: GaussianRational::zero(), radius: rho.clone() };
            let Some(w) = winding_number(&g, &circle)? else { continue };
            let rho_f = rational_to_f64(&rho);
            match find_roots(&self.ev1, &self.fe1, q1, rho_f, w.winding)? {
                Some(roots) => return Ok(Ok((roots, rho_f))),
                None => return Ok(Err(format!("could not isolate {} roots", w.winding))),
            }
        }
        Ok(Err("no admissible counting circle".into()))
    }
}

enum CandidateOutcome {
    Verdicts(Vec<RootVerdict>),
    Failed(String),
}

/// Census of `Im Phi` for `Phi = (f1, f2)` on the closed unit disc, up to height `h`.
pub fn census(f1: &DiscFunction, f2: &DiscFunction, h: u64, prec: u32) -> Result<PointCensus> {
    if h == 0 {
        return Err(Error::Domain("height bound must be at least 1".into()));
    }
    same_trajectory(f1, f2)?;
    let mut shifted = f1.poly.clone();
    shifted.add_term(Monomial::one(shifted.nvars()), &-f1.poly.eval(f1.trajectory.germ.base())?);
    if let Multiplicity::ExceedsCap { .. } = multiplicity(f1.trajectory.field(), f1.trajectory.germ.base(), &shifted)? {
        return Err(Error::Precondition("Phi1 is constant".into()));
    }
    let rho = f1.r.min(1.25);
    let ev1 = f1.evaluator(rho, prec)?;
    let ev2 = ev1.with_poly(f2.poly.clone());
    let ctx = CensusContext { f1, fe1: ev1.float(), ev1, ev2, exact: ExactTrajectory::new(f1), h };
    let tube = build_tube(&ctx.ev1, 1e-7)?;
    let range = match &tube {
        Some(t) => t.range(),
        None => {
            let m = circle_max_upper(&ctx.ev1, &Circle::unit())?;
            Some((-m, m))
        }
    };
    let cands = match range {
        Some((lo, hi)) => rationals_in(lo, hi, h),
        None => Vec::new(),
    };
    let outcomes: Vec<(CandidateOutcome, bool)> = cands
        .par_iter()
        .map(|q1| {
            let q = rational_to_f64(q1);
            let fast = tube.as_ref().filter(|t| !t.ambiguous(q)).map(|t| t.winding(q));
            let roots = match fast {
                Some(0) => return Ok((CandidateOutcome::Verdicts(Vec::new()), false)),
                Some(k) => {
                    match find_roots(&ctx.ev1, &ctx.fe1, q1, 1.0, k)? {
                        Some(r) => Ok((r, 1.0)),
                        None => ctx.contour_roots(q1)?,
                    }
                }
                None => ctx.contour_roots(q1)?,
            };
            let used_contour = fast.is_none();
            match roots {
                Ok((roots, _)) => {
                    let v = roots
                        .iter()
                        .filter(|r| r.side(1.0) != -1)
                        .map(|r| ctx.judge(q1, r))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((CandidateOutcome::Verdicts(v), used_contour))
                }
                Err(msg) => Ok((CandidateOutcome::Failed(msg), used_contour)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    let mut undecided = Vec::new();
    let mut contour_counts = 0;
    for (q1, (o, used)) in cands.iter().zip(outcomes) {
        contour_counts += used as usize;
        match o {
            CandidateOutcome::Failed(reason) => undecided.push(UndecidedPoint {
                z: [f64::NAN, f64::NAN],
                z_radius: f64::NAN,
                x: q1.to_string(),
                y_candidate: None,
                height: height_of(q1).to_u64().unwrap_or(u64::MAX),
                reason,
            }),
            CandidateOutcome::Verdicts(vs) => {
                for v in vs {
                    match v {
                        RootVerdict::Out => {}
                        RootVerdict::Member(p) => points.push(p),
                        RootVerdict::Undecided(u) => undecided.push(u),
                    }
                }
            }
        }
    }
    check_disjoint(&points)?;
    Ok(PointCensus {
        h,
        points,
        undecided,
        candidates: cands.len(),
        contour_counts,
        precision: prec,
        method: "real-axis tube winding + Krawczyk roots + exact identification at 0 / polynomial germs".into(),
    })
}

fn check_disjoint(points: &[CensusPoint]) -> Result<()> {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = ((a.z[0] - b.z[0]).powi(2) + (a.z[1] - b.z[1]).powi(2)).sqrt();
            if d <= a.z_radius + b.z_radius {
                return Err(Error::Certification(format!("overlapping enclosures for {} and {}", a.x, b.x)));
            }
        }
    }
    Ok(())
}

fn same_trajectory(f1: &DiscFunction, f2: &DiscFunction) -> Result<()> {
    let (a, b) = (&f1.trajectory, &f2.trajectory);
    if a.germ.base() != b.germ.base()
        || a.scale != b.scale
        || a.field().component_strings() != b.field().component_strings()
    {
        return Err(Error::Precondition("Phi1 and Phi2 must share the trajectory".into()));
    }
    Ok(())
}

/// Reduced fractions `a/b` in `[lo, hi]` with `max(|a|, b) <= h`, sorted by value.
pub fn rationals_in(lo: f64, hi: f64, h: u64) -> Vec<Rational> {
    let h = h as i64;
    let mut out = Vec::new();
    for b in 1..=h {
        let a0 = ((lo * b as f64).floor() as i64).max(-h);
        let a1 = ((hi * b as f64).ceil() as i64).min(h);
        for a in a0..=a1 {
            if a.gcd(&b) == 1 {
                let q = rat(a, b);
                let v = a as f64 / b as f64;
                if v >= lo - 1e-12 && v <= hi + 1e-12 {
                    out.push(q);
                }
            }
        }
    }
    out.sort();
    out
}

/// A curve of least degree through a finite point set.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CurveFit {
    pub degree: u32,
    pub curve: String,
    #[serde(skip)]
    pub poly: Option<Polynomial>,
}

/// Evaluation matrix of the monomials of degree `<= d` at the points.
pub fn monomial_matrix(points: &[(GaussianRational, GaussianRational)], d: u32) -> (Vec<Monomial>, Vec<Row>) {
    let monos = Monomial::all_up_to_degree(2, d);
    let rows = points
        .iter()
        .map(|(x, y)| monos.iter().map(|m| &x.pow(m.0[0]) * &y.pow(m.0[1])).collect())
        .collect();
    (monos, rows)
}

/// Least `d` with a nonzero curve of degree `<= d` through all points, and one such curve.
pub fn minimal_curve_degree(points: &[(GaussianRational, GaussianRational)]) -> Result<CurveFit> {
    if points.is_empty() {
        return Err(Error::Domain("point set is empty".into()));
    }
    for d in 0u32.. {
        let (monos, rows) = monomial_matrix(points, d);
        let ker = kernel(&rows, monos.len());
        if let Some(v) = ker.first() {
            let poly = Polynomial::from_terms(2, monos.iter().cloned().zip(v.iter().cloned())).sign_normalized_primitive();
            let names = vec!["x".to_string(), "y".to_string()];
            return Ok(CurveFit { degree: d, curve: poly.to_string_with(&names), poly: Some(poly) });
        }
    }
    unreachable!("a kernel appears once monomials outnumber points")
}

/// `w(S)` with `w(empty) = 0`.
pub fn curve_degree_of(points: &[(Rational, Rational)]) -> Result<u32> {
    if points.is_empty() {
        return Ok(0);
    }
    let pts: Vec<_> = points
        .iter()
        .map(|(a, b)| (GaussianRational::from_rational(a.clone()), GaussianRational::from_rational(b.clone())))
        .collect();
    Ok(minimal_curve_degree(&pts)?.degree)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MasserRow {
    #[serde(rename = "H")]
    pub h: u64,
    pub members: usize,
    pub undecided: usize,
    pub w: u32,
    pub log_h: f64,
    /// `w / log H`, for `H >= 2`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MasserTable {
    pub rows: Vec<MasserRow>,
    /// Least `c` with `w <= c log H` over the rows with `H >= 2`.
    pub fitted_c: f64,
}

/// `w` of the certified members for each bound, from a census at the largest bound.
pub fn masser_check(full: &PointCensus, hs: &[u64]) -> Result<MasserTable> {
    let mut rows = Vec::new();
    let mut fitted = 0.0f64;
    for &h in hs {
        if h > full.h {
            return Err(Error::Domain(format!("census was run up to H = {}, not {h}", full.h)));
        }
        let c = full.restrict(h);
        let w = curve_degree_of(&c.member_pairs()?)?;
        let log_h = (h as f64).ln();
        let ratio = (h >= 2).then(|| w as f64 / log_h);
        if let Some(r) = ratio {
            fitted = fitted.max(r);
        }
        rows.push(MasserRow { h, members: c.points.len(), undecided: c.undecided.len(), w, log_h, ratio });
    }
    Ok(MasserTable { rows, fitted_c: fitted })
}

/// Does some curve `Q(x, y) = 0` of degree `<= cutoff` contain `Im Phi`?
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Containment {
    /// `Q(P1, P2)` vanishes on the orbit beyond the multiplicity cap.
    Contained { degree: u32, curve: String },
    /// No such curve: the truncated series admit no relation.
    NotContained { cutoff: u32, terms: usize },
}

/// Exact containment test for the image in a curve of degree `<= cutoff`.
pub fn curve_containment(f1: &DiscFunction, f2: &DiscFunction, cutoff: u32) -> Result<Containment> {
    same_trajectory(f1, f2)?;
    let field = f1.trajectory.field();
    let base = f1.trajectory.germ.base();
    let mut used = 0;
    for d in 1..=cutoff {
        let monos = Monomial::all_up_to_degree(2, d);
        let mut len = 2 * monos.len() + 8;
        loop {
            let germ = {
                let mut g = f1.trajectory.germ.clone();
                g.extend(len);
                g
            };
            let s1 = germ.compose(&f1.poly)?;
            let s2 = germ.compose(&f2.poly)?;
            let cols: Vec<Series> = monos.iter().map(|m| s1.pow(m.0[0]).mul(&s2.pow(m.0[1]))).collect();
            let rows: Vec<Row> = (0..len).map(|k| cols.iter().map(|c| c.coeff(k)).collect()).collect();
            used = len;
            let ker = kernel(&rows, monos.len());
            let Some(v) = ker.first() else { break };
            let q = Polynomial::from_terms(2, monos.iter().cloned().zip(v.iter().cloned())).sign_normalized_primitive();
            let composed = q.substitute(&[f1.poly.clone(), f2.poly.clone()])?;
            match multiplicity(field, base, &composed)? {
                Multiplicity::ExceedsCap { .. } => {
                    let names = vec!["x".to_string(), "y".to_string()];
                    return Ok(Containment::Contained { degree: d, curve: q.to_string_with(&names) });
                }
                Multiplicity::Finite { order } => {
                    // the truncation was too short to see the relation fail
                    len = (order as usize + 1).max(2 * len);
                }
            }
        }
    }
    Ok(Containment::NotContained { cutoff, terms: used })
}

/// Number of discs of radius `rho` centered on a hexagonal lattice that meet the closed unit disc.
pub fn hexagonal_cover_count(rho: f64) -> usize {
    let a = rho * 3f64.sqrt();
    let reach = 1.0 + rho;
    let n = (reach / a).ceil() as i64 + 2;
    let mut count = 0;
    for i in -2 * n..=2 * n {
        for j in -2 * n..=2 * n {
            let x = a * (i as f64 + 0.5 * j as f64);
            let y = a * (3f64.sqrt() / 2.0) * j as f64;
            if x.hypot(y) <= reach {
                count += 1;
            }
        }
    }
    count
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DensityRow {
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub undecided: usize,
    /// `log^(2 kappa (m+1)) H * log log H`.
    pub envelope: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DensityTable {
    pub precondition: Containment,
    pub kappa: usize,
    pub m: usize,
    /// Discs of radius `(r - 1)/2` in the hexagonal cover of the unit disc.
    pub cover_discs: usize,
    pub r: f64,
    pub rows: Vec<DensityRow>,
    pub fitted_c: f64,
    /// Does `N <= envelope` hold with constant 1 on every row with `H >= 3`?
    pub holds_with_c1: bool,
}

pub fn density_envelope(h: u64, kappa: usize, m: usize) -> f64 {
    let l = (h as f64).ln();
    l.powi((2 * kappa * (m + 1)) as i32) * l.ln()
}

/// Compare `N(Im Phi, H)` with the polylogarithmic envelope.
pub fn density_check(f1: &DiscFunction, f2: &DiscFunction, full: &PointCensus, hs: &[u64], cutoff: u32) -> Result<DensityTable> {
    let precondition = curve_containment(f1, f2, cutoff)?;
    if let Containment::Contained { degree, curve } = &precondition {
        return Err(Error::Precondition(format!("Im Phi lies on the degree {degree} curve {curve} = 0")));
    }
    let field = f1.trajectory.field();
    let base = f1.trajectory.germ.base();
    let kappa = leading_diagram(&ideal_slice(field, base, 4)?).kappa();
    let m = field.dim();
    let mut rows = Vec::new();
    let mut fitted = 0.0f64;
    let mut holds = true;
    for &h in hs {
        if h > full.h {
            return Err(Error::Domain(format!("census was run up to H = {}, not {h}", full.h)));
        }
        let c = full.restrict(h);
        let envelope = density_envelope(h, kappa, m);
        // log log H is positive only from H = 3 on
        let ratio = (h >= 3).then(|| c.points.len() as f64 / envelope);
        if let Some(r) = ratio {
            fitted = fitted.max(r);
            holds &= r <= 1.0;
        }
        rows.push(DensityRow { h, n: c.points.len(), undecided: c.undecided.len(), envelope, ratio });
    }
    let r = f1.r;
    Ok(DensityTable {
        precondition,
        kappa,
        m,
        cover_discs: hexagonal_cover_count((r - 1.0) / 2.0),
        r,
        rows,
        fitted_c: fitted,
        holds_with_c1: holds,
    })
}
