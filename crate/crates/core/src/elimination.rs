//! mu-elimination matrices, their top minors at a point, and the derivative
//! lower bounds those minors certify. Also an empirical checker for the
//! Diophantine Lojasiewicz inequality.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::ball::CBall;
use crate::algebra::eval::{eval_ball, eval_c64, Point};
use crate::algebra::gaussian::GaussianRational;
use crate::algebra::height::{height, log_abs, log_l2_norm, log_plus, point_norm};
use crate::algebra::linalg::{det, kernel, Row};
use crate::algebra::monomial::Monomial;
use crate::algebra::polynomial::Polynomial;
use crate::algebra::det_poly_matrix;
use crate::constants;
use crate::dynamics::VectorField;
use crate::error::{check_dim, Error, Result};
use crate::orbit_ideal::{ideal_slice, leading_diagram, monomial_jets, nu, staircase_division, MonomialDiagram};

/// Exhaustive minor enumeration is used up to this many column subsets.
pub const EXHAUSTIVE_CAP: u128 = 10_000;

/// Staircase monomials of degree `<= d`, by degree and then deglex-descending.
pub fn staircase_rows(diagram: &MonomialDiagram, d: u32) -> Vec<Monomial> {
    let mut v = diagram.staircase(d);
    v.sort_by(|a, b| a.degree().cmp(&b.degree()).then(b.cmp(a)));
    v
}

/// Shape data shared by the symbolic matrix and its values at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorContext {
    pub rows: Vec<Monomial>,
    pub mu: usize,
    pub degree: u32,
    pub kappa: usize,
}

impl MinorContext {
    pub fn new(diagram: &MonomialDiagram, d: u32, mu: usize) -> Result<Self> {
        let rows = staircase_rows(diagram, d);
        // mu + 1 > rho columns; the worked example uses mu = rho
        if mu < rows.len() {
            return Err(Error::Precondition(format!("mu = {mu} must be at least rho = {}", rows.len())));
        }
        Ok(MinorContext { rows, mu, degree: d, kappa: diagram.kappa() })
    }

    pub fn rho(&self) -> usize {
        self.rows.len()
    }

    /// Coefficient vector of `P` over the staircase rows; `None` when `P` leaves the staircase.
    pub fn coefficients(&self, p: &Polynomial) -> Option<Row> {
        let v: Row = self.rows.iter().map(|m| p.coeff(m)).collect();
        let used = v.iter().filter(|c| !c.is_zero()).count();
        (used == p.num_terms()).then_some(v)
    }
}

/// `rho x (mu + 1)` matrix with entries `xi^k x^alpha`.
#[derive(Clone, Debug)]
pub struct EliminationMatrix {
    pub context: MinorContext,
    pub diagram: MonomialDiagram,
    pub entries: Vec<Vec<Polynomial>>,
}

pub fn build_elimination_matrix(
    field: &VectorField,
    diagram: &MonomialDiagram,
    d: u32,
    mu: usize,
) -> Result<EliminationMatrix> {
    check_dim(field.dim(), diagram.nvars())?;
    let context = MinorContext::new(diagram, d, mu)?;
    let entries = context
        .rows
        .par_iter()
        .map(|m| field.iterated_lie(&Polynomial::term(m.clone(), GaussianRational::one()), mu))
        .collect::<Result<Vec<_>>>()?;
    Ok(EliminationMatrix { context, diagram: diagram.clone(), entries })
}

impl EliminationMatrix {
    pub fn rho(&self) -> usize {
        self.context.rho()
    }

    pub fn mu(&self) -> usize {
        self.context.mu
    }

    /// Largest entry degree and height.
    pub fn entry_profile(&self) -> (u32, f64) {
        let mut deg = 0;
        let mut h = 0f64;
        for e in self.entries.iter().flatten().filter(|e| !e.is_zero()) {
            deg = deg.max(e.degree());
            h = h.max(height(e).expect("nonzero"));
        }
        (deg, h)
    }

    /// The symbolic minor on the given columns.
    pub fn minor(&self, cols: &[usize]) -> Polynomial {
        let sub: Vec<Vec<Polynomial>> = self.entries.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
        det_poly_matrix(&sub)
    }

    pub fn at_point(&self, p: &Point, prec: u32) -> Result<PointMatrix> {
        match p {
            Point::Exact(v) => Ok(PointMatrix::Exact(
                self.entries.iter().map(|r| r.iter().map(|e| e.eval(v)).collect::<Result<Row>>()).collect::<Result<_>>()?,
            )),
            Point::Balls(v) => Ok(PointMatrix::Balls(
                self.entries
                    .iter()
                    .map(|r| r.iter().map(|e| eval_ball(e, v, prec)).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?,
            )),
        }
    }
}

/// Values `xi^k x^alpha (p) = k! [z^k] x^alpha(phi(z))` without forming the symbolic entries.
pub fn point_matrix_from_jets(field: &VectorField, ctx: &MinorContext, p: &[GaussianRational]) -> Result<Vec<Row>> {
    check_dim(field.dim(), p.len())?;
    let jets = monomial_jets(field, p, &ctx.rows, ctx.mu + 1)?;
    let mut fact = vec![GaussianRational::one()];
    for k in 1..=ctx.mu {
        let next = &fact[k - 1] * &GaussianRational::from_int(k as i64);
        fact.push(next);
    }
    Ok(jets.iter().map(|s| (0..=ctx.mu).map(|k| &s.coeff(k) * &fact[k]).collect()).collect())
}

#[derive(Clone, Debug)]
pub enum PointMatrix {
    Exact(Vec<Row>),
    Balls(Vec<Vec<CBall>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinorStrategy {
    /// Exhaustive below [`EXHAUSTIVE_CAP`] subsets, greedy above.
    Auto { restarts: usize, seed: u64 },
    Exhaustive,
    Greedy { restarts: usize, seed: u64 },
}

impl Default for MinorStrategy {
    fn default() -> Self {
        MinorStrategy::Auto { restarts: 64, seed: 0 }
    }
}

/// A nonvanishing top minor at a point.
#[derive(Clone, Debug, Serialize)]
pub struct MinorCertificate {
    pub columns: Vec<usize>,
    /// Exact value, or `mid +/- rad` for balls.
    pub value: String,
    /// `log |M(p)|`, or the log of a certified lower bound in ball mode.
    pub log_abs: f64,
    pub exact: bool,
    pub strategy: &'static str,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MinorVerdict {
    Nonzero(MinorCertificate),
    /// Every top minor vanishes; `kernel` are staircase coefficients of a
    /// nonzero `P` with `P, ..., xi^mu P` all zero at the point.
    AllZero { kernel: Vec<String> },
    /// Ball mode found no minor bounded away from zero.
    Indeterminate,
}

impl MinorVerdict {
    pub fn certificate(&self) -> Option<&MinorCertificate> {
        match self {
            MinorVerdict::Nonzero(c) => Some(c),
            _ => None,
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u128::MAX / 1024 {
            return u128::MAX;
        }
    }
    acc
}

fn columns(a: &[Row], cols: &[usize]) -> Vec<Row> {
    a.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect()
}

fn staircase_kernel(a: &[Row]) -> Row {
    let rho = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let transposed: Vec<Row> = (0..ncols).map(|k| a.iter().map(|r| r[k].clone()).collect()).collect();
    kernel(&transposed, rho).into_iter().next().expect("rank deficient")
}

/// Largest `|M(p)|` over top minors, with the "all zero" verdict in exact mode.
pub fn max_minor_at_point(a: &PointMatrix, strategy: MinorStrategy, prec: u32) -> MinorVerdict {
    let (rho, ncols) = match a {
        PointMatrix::Exact(m) => (m.len(), m.first().map_or(0, Vec::len)),
        PointMatrix::Balls(m) => (m.len(), m.first().map_or(0, Vec::len)),
    };
    if rho == 0 {
        return MinorVerdict::Nonzero(MinorCertificate {
            columns: vec![],
            value: "1".into(),
            log_abs: 0.0,
            exact: true,
            strategy: "empty",
        });
    }
    let exhaustive = match strategy {
        MinorStrategy::Exhaustive => true,
        MinorStrategy::Greedy { .. } => false,
        MinorStrategy::Auto { .. } => binomial(ncols, rho) <= EXHAUSTIVE_CAP,
    };
    let (restarts, seed) = match strategy {
        MinorStrategy::Auto { restarts, seed } | MinorStrategy::Greedy { restarts, seed } => (restarts, seed),
        MinorStrategy::Exhaustive => (0, 0),
    };
    match (a, exhaustive) {
        (PointMatrix::Exact(m), true) => exhaustive_exact(m),
        (PointMatrix::Exact(m), false) => greedy_exact(m, restarts, seed),
        (PointMatrix::Balls(m), true) => exhaustive_ball(m, prec),
        (PointMatrix::Balls(m), false) => greedy_ball(m, restarts, seed, prec),
    }
}

fn exact_certificate(cols: Vec<usize>, v: GaussianRational, strategy: &'static str) -> MinorCertificate {
    MinorCertificate { columns: cols, log_abs: log_abs(&v), value: v.to_string(), exact: true, strategy }
}

fn exhaustive_exact(a: &[Row]) -> MinorVerdict {
    let ncols = a[0].len();
    let subsets: Vec<Vec<usize>> = (0..ncols).combinations(a.len()).collect();
    let dets: Vec<GaussianRational> = subsets.par_iter().map(|c| det(columns(a, c))).collect();
    // first strictly larger wins, so ties go to the lexicographically smallest subset
    let mut best: Option<(usize, crate::algebra::gaussian::Rational)> = None;
    for (i, d) in dets.iter().enumerate() {
        let n = d.norm_sqr();
        if !n.is_zero() && best.as_ref().map_or(true, |(_, b)| n > *b) {
            best = Some((i, n));
        }
    }
    match best {
        Some((i, _)) => MinorVerdict::Nonzero(exact_certificate(subsets[i].clone(), dets[i].clone(), "exhaustive")),
        None => MinorVerdict::AllZero { kernel: staircase_kernel(a).iter().map(ToString::to_string).collect() },
    }
}

/// Complete pivoting on magnitudes; the chosen pivot columns form the start subset.
fn pivot_columns(mags: impl Fn(usize, usize) -> f64, m: &mut dyn FnMut(usize, usize), rho: usize, ncols: usize) -> Vec<usize> {
    let mut row_used = vec![false; rho];
    let mut col_used = vec![false; ncols];
    let mut chosen = Vec::new();
    for _ in 0..rho {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..rho).filter(|&i| !row_used[i]) {
            for j in (0..ncols).filter(|&j| !col_used[j]) {
                let v = mags(i, j);
                if v > f64::NEG_INFINITY && best.map_or(true, |(_, _, b)| v > b) {
                    best = Some((i, j, v));
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        m(i, j);
        row_used[i] = true;
        col_used[j] = true;
        chosen.push(j);
    }
    chosen
}

fn greedy_exact(a: &[Row], restarts: usize, seed: u64) -> MinorVerdict {
    let rho = a.len();
    let ncols = a[0].len();
    let work = std::cell::RefCell::new(a.to_vec());
    let mut eliminate = |pi: usize, pj: usize| {
        let mut w = work.borrow_mut();
        let inv = w[pi][pj].inv().expect("nonzero pivot");
        let prow = w[pi].clone();
        for (r, row) in w.iter_mut().enumerate() {
            if r == pi || row[pj].is_zero() {
                continue;
            }
            let f = &row[pj] * &inv;
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &(&f * y);
                }
            }
        }
    };
    let mags = |i: usize, j: usize| {
        let w = work.borrow();
        if w[i][j].is_zero() {
            f64::NEG_INFINITY
        } else {
            log_abs(&w[i][j])
        }
    };
    let chosen = pivot_columns(mags, &mut eliminate, rho, ncols);
    if chosen.len() < rho {
        return MinorVerdict::AllZero { kernel: staircase_kernel(a).iter().map(ToString::to_string).collect() };
    }
    let mut cols = chosen;
    cols.sort_unstable();
    let mut best = det(columns(a, &cols));
    let mut best_n = best.norm_sqr();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        if cols.len() == ncols {
            break;
        }
        let pos = rng.gen_range(0..cols.len());
        let outside: Vec<usize> = (0..ncols).filter(|c| !cols.contains(c)).collect();
        let j = outside[rng.gen_range(0..outside.len())];
        let mut trial = cols.clone();
        trial[pos] = j;
        trial.sort_unstable();
        let v = det(columns(a, &trial));
        let n = v.norm_sqr();
        if n > best_n {
            cols = trial;
            best = v;
            best_n = n;
        }
    }
    MinorVerdict::Nonzero(exact_certificate(cols, best, "greedy"))
}

/// Ball enclosure of a determinant; falls back to the Hadamard bound when a
/// pivot cannot be separated from zero.
pub fn ball_det(mut m: Vec<Vec<CBall>>, prec: u32) -> CBall {
    let n = m.len();
    let mut bound = 1f64;
    for r in &m {
        let s: f64 = r.iter().map(|x| x.abs_upper().powi(2)).sum();
        bound *= s.sqrt();
    }
    let hadamard = || CBall::zero().with_radius(bound * (1.0 + 1e-12));
    let mut acc = CBall::exact_int(1);
    for c in 0..n {
        let pr = (c..n).max_by(|&i, &j| m[i][c].mid_abs_upper().total_cmp(&m[j][c].mid_abs_upper())).expect("rows");
        if m[pr][c].contains_zero() {
            return hadamard();
        }
        if pr != c {
            m.swap(pr, c);
            acc = acc.neg();
        }
        let Some(inv) = m[c][c].inv(prec) else { return hadamard() };
        acc = acc.mul(&m[c][c], prec);
        for i in c + 1..n {
            let f = m[i][c].mul(&inv, prec);
            for j in c + 1..n {
                let t = f.mul(&m[c][j], prec);
                m[i][j] = m[i][j].sub(&t, prec);
            }
        }
    }
    acc
}

fn ball_columns(a: &[Vec<CBall>], cols: &[usize]) -> Vec<Vec<CBall>> {
    a.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect()
}

fn ball_certificate(cols: Vec<usize>, v: &CBall, strategy: &'static str) -> MinorVerdict {
    let lower = v.abs_lower();
    if lower <= 0.0 {
        return MinorVerdict::Indeterminate;
    }
    let (re, im) = v.mid_f64();
    MinorVerdict::Nonzero(MinorCertificate {
        columns: cols,
        value: format!("({re:e} + {im:e}*i) +/- {:e}", v.rad),
        log_abs: lower.ln(),
        exact: false,
        strategy,
    })
}

fn exhaustive_ball(a: &[Vec<CBall>], prec: u32) -> MinorVerdict {
    let ncols = a[0].len();
    let subsets: Vec<Vec<usize>> = (0..ncols).combinations(a.len()).collect();
    let dets: Vec<CBall> = subsets.par_iter().map(|c| ball_det(ball_columns(a, c), prec)).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in dets.iter().enumerate() {
        let l = d.abs_lower();
        if l > 0.0 && best.map_or(true, |(_, b)| l > b) {
            best = Some((i, l));
        }
    }
    match best {
        Some((i, _)) => ball_certificate(subsets[i].clone(), &dets[i], "exhaustive"),
        None => MinorVerdict::Indeterminate,
    }
}

fn greedy_ball(a: &[Vec<CBall>], restarts: usize, seed: u64, prec: u32) -> MinorVerdict {
    let rho = a.len();
    let ncols = a[0].len();
    let mut w: Vec<Vec<Complex64>> = a.iter().map(|r| r.iter().map(CBall::mid_complex).collect()).collect();
    let snapshot = std::cell::RefCell::new(std::mem::take(&mut w));
    let mags = |i: usize, j: usize| {
        let v = snapshot.borrow()[i][j].norm();
        if v > 0.0 {
            v.ln()
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut elim = |pi: usize, pj: usize| {
        let mut w = snapshot.borrow_mut();
        let p = w[pi][pj];
        let prow = w[pi].clone();
        for (r, row) in w.iter_mut().enumerate() {
            if r != pi {
                let f = row[pj] / p;
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= f * y;
                }
            }
        }
    };
    let chosen = pivot_columns(mags, &mut elim, rho, ncols);
    if chosen.len() < rho {
        return MinorVerdict::Indeterminate;
    }
    let mut cols = chosen;
    cols.sort_unstable();
    let mut best = ball_det(ball_columns(a, &cols), prec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        if cols.len() == ncols {
            break;
        }
        let pos = rng.gen_range(0..cols.len());
        let outside: Vec<usize> = (0..ncols).filter(|c| !cols.contains(c)).collect();
        let mut trial = cols.clone();
        trial[pos] = outside[rng.gen_range(0..outside.len())];
        trial.sort_unstable();
        let v = ball_det(ball_columns(a, &trial), prec);
        if v.abs_lower() > best.abs_lower() {
            cols = trial;
            best = v;
        }
    }
    ball_certificate(cols, &best, "greedy")
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeBound {
    pub k: usize,
    /// `log |xi^k P(p)|` at the maximizing `k`.
    pub log_value: f64,
    pub log_norm: f64,
    pub log_eps: f64,
    /// `d^kappa mu (log mu + log+ ||p||)`.
    pub envelope: f64,
    pub constant: f64,
    /// Smallest constant for which the inequality holds on this instance
    /// (negative when it holds with room to spare).
    pub needed: f64,
    pub holds: bool,
}

/// `k = argmax |xi^k P(p)|` and the check of the minor lower bound.
pub fn derivative_lower_bound(
    ctx: &MinorContext,
    a_p: &[Row],
    cert: &MinorCertificate,
    poly: &Polynomial,
    point_norm: f64,
) -> Result<(usize, DerivativeBound)> {
    let c = ctx
        .coefficients(poly)
        .ok_or_else(|| Error::Precondition("P must be supported on the staircase".into()))?;
    if poly.is_zero() {
        return Err(Error::Precondition("P = 0".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for k in 0..=ctx.mu {
        let v = c.iter().zip(a_p).fold(GaussianRational::zero(), |acc, (ci, row)| {
            if ci.is_zero() {
                acc
            } else {
                acc + ci * &row[k]
            }
        });
        if !v.is_zero() {
            let l = log_abs(&v);
            if best.map_or(true, |(_, b)| l > b) {
                best = Some((k, l));
            }
        }
    }
    let (k, log_value) = best.ok_or_else(|| Error::Certification("all derivatives vanish despite a nonzero minor".into()))?;
    let mu = ctx.mu as f64;
    let envelope = (ctx.degree.max(1) as f64).powi(ctx.kappa as i32) * mu * (mu.ln() + log_plus(point_norm));
    let log_norm = log_l2_norm(poly);
    let constant = constants::MINOR_V_ABS_C.value;
    let needed = (log_norm + cert.log_abs - log_value) / envelope;
    Ok((
        k,
        DerivativeBound {
            k,
            log_value,
            log_norm,
            log_eps: cert.log_abs,
            envelope,
            constant,
            needed,
            holds: log_value >= log_norm + cert.log_abs - constant * envelope,
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct UniversalReport {
    pub degree: u32,
    pub r: String,
    pub division_steps: usize,
    pub diagram: crate::orbit_ideal::DiagramExport,
    pub rho: usize,
    pub mu: usize,
    pub certificate: MinorCertificate,
    pub bound: DerivativeBound,
    /// `log ||R|| - log |xi^k R(p)|`.
    pub gap: f64,
    /// `d^(2 kappa (m+1)) log d` with `m = n`; zero for `d = 1`.
    pub main_envelope: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LowerBoundOutcome {
    Certified(Box<UniversalReport>),
    /// `P` vanishes on the orbit closure, so `R = 0`.
    Degenerate { degree: u32 },
}

/// The proof pipeline: slice, diagram, staircase division, minor, derivative bound.
pub fn universal_lower_bound(
    field: &VectorField,
    p: &[GaussianRational],
    poly: &Polynomial,
    d: u32,
    mu: Option<usize>,
    strategy: MinorStrategy,
) -> Result<LowerBoundOutcome> {
    check_dim(field.dim(), p.len())?;
    if field.is_singular(p)? {
        return Err(Error::Precondition("base point is singular".into()));
    }
    if poly.degree() > d {
        return Err(Error::Precondition(format!("deg P = {} exceeds d = {d}", poly.degree())));
    }
    let slice = ideal_slice(field, p, d)?;
    let diagram = leading_diagram(&slice);
    let (r, steps) = staircase_division(poly, &slice)?;
    if r.is_zero() {
        return Ok(LowerBoundOutcome::Degenerate { degree: d });
    }
    let rho = diagram.rho(d);
    let mu = mu.unwrap_or_else(|| (nu(field, d) as usize).max(rho + 1));
    let ctx = MinorContext::new(&diagram, d, mu)?;
    let a_p = point_matrix_from_jets(field, &ctx, p)?;
    let verdict = max_minor_at_point(&PointMatrix::Exact(a_p.clone()), strategy, 64);
    let cert = match verdict {
        MinorVerdict::Nonzero(c) => c,
        MinorVerdict::AllZero { kernel } => {
            return Err(Error::Certification(format!(
                "all mu-minors vanish at p (exceptional stratum); staircase kernel {kernel:?}"
            )))
        }
        MinorVerdict::Indeterminate => unreachable!("exact mode"),
    };
    let (_, bound) = derivative_lower_bound(&ctx, &a_p, &cert, &r, point_norm(p))?;
    let n = field.dim() as i32;
    let df = d as f64;
    Ok(LowerBoundOutcome::Certified(Box::new(UniversalReport {
        degree: d,
        r: r.to_string_with(field.names()),
        division_steps: steps.len(),
        diagram: diagram.export(),
        rho,
        mu,
        gap: bound.log_norm - bound.log_value,
        main_envelope: df.powi(2 * ctx.kappa as i32 * (n + 1)) * df.ln(),
        certificate: cert,
        bound,
    })))
}

/// Distance in projective space between `(w1)` and `(w2)`, with each
/// representative scaled so its largest coordinate has modulus one.
pub fn projective_distance(w1: &[Complex64], w2: &[Complex64]) -> Result<f64> {
    check_dim(w1.len(), w2.len())?;
    let norm = |w: &[Complex64]| -> Result<Vec<Complex64>> {
        let m = w.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
        if m.norm() == 0.0 {
            return Err(Error::Domain("zero vector is not a projective point".into()));
        }
        Ok(w.iter().map(|x| x / m).collect())
    };
    let a = norm(w1)?;
    let b = norm(w2)?;
    let mut best = 0f64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            best = best.max((a[i] * b[j] - a[j] * b[i]).norm());
        }
    }
    Ok(best)
}

/// `psi(p) = (1 : p_1 : ... : p_n)`.
pub fn psi(p: &[Complex64]) -> Vec<Complex64> {
    std::iter::once(Complex64::new(1.0, 0.0)).chain(p.iter().copied()).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct LojasOptions {
    pub starts: usize,
    pub search_radius: f64,
    pub seed: u64,
}

impl Default for LojasOptions {
    fn default() -> Self {
        LojasOptions { starts: 24, search_radius: 2.0, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LojasReport {
    pub n: usize,
    pub d: u32,
    pub h: f64,
    pub log_eps: f64,
    pub dist_infinity: f64,
    pub dist_zero_set: Option<f64>,
    pub nearest_zero: Option<Vec<(f64, f64)>>,
    pub dist: f64,
    pub constant: f64,
    /// Smallest `c` that works here (negative when there is room to spare);
    /// `None` when `p` lies on `W`, where every `c` works.
    pub needed: Option<f64>,
    pub holds: bool,
}

/// Gauss-Newton on the overdetermined system; returns a point where all
/// polynomials are numerically zero.
fn newton_zero(polys: &[Polynomial], jac: &[Vec<Polynomial>], start: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = start.len();
    let mut x = start.to_vec();
    let scale = 1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for _ in 0..80 {
        let f: Vec<Complex64> = polys.iter().map(|p| eval_c64(p, &x)).collect();
        let res = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if res < 1e-13 * scale {
            return Some(x);
        }
        let j = DMatrix::from_fn(polys.len(), n, |i, k| eval_c64(&jac[i][k], &x));
        let rhs = DMatrix::from_fn(polys.len(), 1, |i, _| -f[i]);
        let step = j.svd(true, true).solve(&rhs, 1e-14).ok()?;
        for k in 0..n {
            x[k] += step[(k, 0)];
        }
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1e8) {
            return None;
        }
    }
    let res = polys.iter().map(|p| eval_c64(p, &x).norm()).fold(0.0, f64::max);
    (res < 1e-9 * scale).then_some(x)
}

/// Empirical check of `log eps >= d^n [n log dist(psi(p), psi(W) u H_inf) - c (d + h)]`.
///
/// Polynomials are cleared to integer coefficients first. The distance to `W`
/// is estimated from Newton searches seeded at `p` and around it; if no zero is
/// found only the distance to infinity is used, which overestimates the true
/// distance and so makes the check stricter.
pub fn lojasiewicz_check(polys: &[Polynomial], p: &[Complex64], opts: LojasOptions) -> Result<LojasReport> {
    let first = polys.first().ok_or_else(|| Error::Precondition("empty polynomial family".into()))?;
    let n = first.nvars();
    check_dim(n, p.len())?;
    let cleared: Vec<Polynomial> = polys.iter().filter(|q| !q.is_zero()).map(Polynomial::clear_denominators).collect();
    if cleared.is_empty() {
        return Err(Error::Precondition("all polynomials are zero".into()));
    }
    let d = cleared.iter().map(Polynomial::degree).max().unwrap_or(0).max(1);
    let h = cleared.iter().map(|q| height(q).expect("nonzero")).fold(0.0, f64::max);
    let eps = cleared.iter().map(|q| eval_c64(q, p).norm()).fold(0.0, f64::max);
    let w = psi(p);
    let dist_infinity = 1.0 / p.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let jac: Vec<Vec<Polynomial>> = cleared.iter().map(|q| (0..n).map(|k| q.partial_derivative(k)).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![p.to_vec()];
    for _ in 0..opts.starts {
        starts.push(
            p.iter()
                .map(|c| {
                    c + Complex64::new(
                        rng.gen_range(-opts.search_radius..opts.search_radius),
                        rng.gen_range(-opts.search_radius..opts.search_radius),
                    )
                })
                .collect(),
        );
    }
    let mut nearest: Option<(f64, Vec<Complex64>)> = None;
    for s in &starts {
        if let Some(z) = newton_zero(&cleared, &jac, s) {
            let dz = projective_distance(&w, &psi(&z))?;
            if nearest.as_ref().map_or(true, |(b, _)| dz < *b) {
                nearest = Some((dz, z));
            }
        }
    }
    let dist_zero_set = nearest.as_ref().map(|(x, _)| *x);
    let dist = dist_zero_set.map_or(dist_infinity, |x| x.min(dist_infinity));
    let dn = (d as f64).powi(n as i32);
    let scale = d as f64 + h;
    let needed = (eps > 0.0 && dist > 0.0).then(|| (n as f64 * dist.ln() - eps.ln() / dn) / scale);
    let constant = constants::LOJAS_C.value;
    Ok(LojasReport {
        n,
        d,
        h,
        log_eps: eps.ln(),
        dist_infinity,
        dist_zero_set,
        nearest_zero: nearest.map(|(_, z)| z.iter().map(|c| (c.re, c.im)).collect()),
        dist,
        constant,
        needed,
        holds: needed.map_or(true, |c| c <= constant),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_polynomial;

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    fn exp() -> VectorField {
        VectorField::parse(&["t", "y"], &["1", "y"]).unwrap()
    }

    fn p(f: &VectorField, s: &str) -> Polynomial {
        parse_polynomial(s, f.names()).unwrap()
    }

    #[test]
    fn exp_matrix_rows() {
        let f = exp();
        let dg = MonomialDiagram::new(2, []);
        let m = build_elimination_matrix(&f, &dg, 1, 3).unwrap();
        assert_eq!(m.context.rows, vec![Monomial(vec![0, 0]), Monomial(vec![1, 0]), Monomial(vec![0, 1])]);
        let row = |i: usize| m.entries[i].iter().map(|e| e.to_string_with(f.names())).collect::<Vec<_>>();
        assert_eq!(row(0), ["1", "0", "0", "0"]);
        assert_eq!(row(1), ["t", "1", "0", "0"]);
        assert_eq!(row(2), ["y", "y", "y", "y"]);
        assert!(build_elimination_matrix(&f, &dg, 1, 3 - 1).is_err());

        let pt = vec![g(0), g(1)];
        let PointMatrix::Exact(a) = m.at_point(&Point::Exact(pt.clone()), 64).unwrap() else { unreachable!() };
        assert_eq!(a, point_matrix_from_jets(&f, &m.context, &pt).unwrap());
        let v = max_minor_at_point(&PointMatrix::Exact(a.clone()), MinorStrategy::Exhaustive, 64);
        let cert = v.certificate().unwrap().clone();
        assert_eq!(cert.log_abs, 0.0);
        assert_eq!(det(columns(&a, &[0, 1, 2])), g(1));
        let (k, rep) = derivative_lower_bound(&m.context, &a, &cert, &p(&f, "y - 1 - t"), 1.0).unwrap();
        assert_eq!(k, 2);
        assert_eq!(rep.log_value, 0.0);
        let (k0, _) = derivative_lower_bound(&m.context, &a, &cert, &p(&f, "1"), 1.0).unwrap();
        assert_eq!(k0, 0);
    }

    #[test]
    fn singular_point_all_zero() {
        let f = VectorField::parse(&["t", "y"], &["t", "2*y"]).unwrap();
        let m = build_elimination_matrix(&f, &MonomialDiagram::new(2, []), 1, 4).unwrap();
        let a = m.at_point(&Point::Exact(vec![g(0), g(0)]), 64).unwrap();
        for s in [MinorStrategy::Exhaustive, MinorStrategy::Greedy { restarts: 8, seed: 1 }] {
            let MinorVerdict::AllZero { kernel } = max_minor_at_point(&a, s, 64) else { panic!("expected all zero") };
            let coeffs: Vec<GaussianRational> = kernel.iter().map(|s| s.parse().unwrap()).collect();
            let q = Polynomial::from_terms(2, m.context.rows.iter().cloned().zip(coeffs));
            assert!(!q.is_zero());
            for e in f.iterated_lie(&q, 4).unwrap() {
                assert!(e.eval(&[g(0), g(0)]).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn full_diagram_identity_block() {
        // all variables in the diagram: only the monomial 1 survives
        let f = exp();
        let dg = MonomialDiagram::new(2, [Monomial::var(2, 0), Monomial::var(2, 1)]);
        let m = build_elimination_matrix(&f, &dg, 3, 2).unwrap();
        assert_eq!(m.rho(), 1);
        let a = m.at_point(&Point::Exact(vec![g(5), g(7)]), 64).unwrap();
        let c = max_minor_at_point(&a, MinorStrategy::default(), 64);
        assert_eq!(c.certificate().unwrap().value, "1");
    }

    #[test]
    fn ball_mode_agrees_with_exact() {
        let f = exp();
        let m = build_elimination_matrix(&f, &MonomialDiagram::new(2, []), 2, 8).unwrap();
        let pt = vec![g(0), g(1)];
        let exact = max_minor_at_point(&m.at_point(&Point::Exact(pt.clone()), 64).unwrap(), MinorStrategy::Exhaustive, 64);
        let balls = crate::algebra::eval::exact_to_balls(&pt, 128);
        let ball = max_minor_at_point(&m.at_point(&Point::Balls(balls), 128).unwrap(), MinorStrategy::Exhaustive, 128);
        let (e, b) = (exact.certificate().unwrap(), ball.certificate().unwrap());
        assert_eq!(e.columns, b.columns);
        assert!((e.log_abs - b.log_abs).abs() < 1e-9);
        let greedy = max_minor_at_point(
            &m.at_point(&Point::Exact(pt), 64).unwrap(),
            MinorStrategy::Greedy { restarts: 32, seed: 3 },
            64,
        );
        assert!(greedy.certificate().is_some());
    }

    #[test]
    fn universal_pipeline() {
        let f = exp();
        let pt = vec![g(0), g(1)];
        let LowerBoundOutcome::Certified(r) =
            universal_lower_bound(&f, &pt, &p(&f, "y - 1 - t"), 1, None, MinorStrategy::default()).unwrap()
        else {
            panic!()
        };
        assert_eq!(r.r, "-t + y - 1");
        assert_eq!(r.bound.k, 2);
        assert_eq!(r.mu, 32);
        let q = VectorField::parse(&["t", "y"], &["t", "2*y"]).unwrap();
        let out = universal_lower_bound(&q, &[g(1), g(1)], &p(&q, "y - t^2"), 2, None, MinorStrategy::default()).unwrap();
        assert!(matches!(out, LowerBoundOutcome::Degenerate { .. }));
    }

    #[test]
    fn distances() {
        let c = |a: f64, b: f64| Complex64::new(a, b);
        assert_eq!(projective_distance(&[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap(), 1.0);
        let a = [c(1.0, 0.5), c(-2.0, 0.0), c(0.3, 0.1)];
        let b = [c(0.2, 0.0), c(1.0, 1.0), c(0.0, -1.0)];
        let ab = projective_distance(&a, &b).unwrap();
        assert!((ab - projective_distance(&b, &a).unwrap()).abs() < 1e-15);
        let scaled: Vec<Complex64> = a.iter().map(|x| x * c(0.0, -3.5)).collect();
        assert!((ab - projective_distance(&scaled, &b).unwrap()).abs() < 1e-12);
        assert!(projective_distance(&a, &scaled).unwrap() < 1e-15);
        assert!(projective_distance(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn lojasiewicz_examples() {
        let ns = crate::algebra::parse::names(&["x"]);
        let x = parse_polynomial("x", &ns).unwrap();
        for x0 in [0.5, 0.1, -0.9] {
            let r = lojasiewicz_check(&[x.clone()], &[Complex64::new(x0, 0.0)], LojasOptions::default()).unwrap();
            assert!((r.dist - x0.abs()).abs() < 1e-9);
            assert!(r.needed.unwrap() < 1e-9);
        }
        let ns = crate::algebra::parse::names(&["x", "y"]);
        let polys = vec![parse_polynomial("x^2 + y^2 - 1", &ns).unwrap(), parse_polynomial("x - y", &ns).unwrap()];
        let r = lojasiewicz_check(&polys, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], LojasOptions::default()).unwrap();
        let z = r.nearest_zero.clone().unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z[0].0 - s).abs() < 1e-9 && (z[1].0 - s).abs() < 1e-9);
        assert!(r.holds, "{r:?}");
    }
}
