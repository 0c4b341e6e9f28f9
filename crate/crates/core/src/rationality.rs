//! Rationality of a power series from finitely many Taylor coefficients.
//!
//! `f` is rational of degree at most `d` iff `P = f Q + O(t^N)` has a nonzero
//! solution with `deg P, deg Q <= d` for every `N > d`. Each fixed `N` is decided
//! by exact rank instead of enumerating minors, and any solution at
//! `N = 3d + 1` already determines `R = P / Q`.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::gaussian::GaussianRational;
use crate::algebra::linalg::{kernel, rank, Row};
use crate::algebra::univariate::UPoly;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorPrefix {
    coeffs: Vec<GaussianRational>,
}

impl TaylorPrefix {
    pub fn new(coeffs: Vec<GaussianRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("a Taylor prefix needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_ints(c: &[i64]) -> Result<Self> {
        Self::new(c.iter().map(|&v| GaussianRational::from_int(v)).collect())
    }

    /// One exact value per line, or a JSON array of strings or integers.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let items: Vec<String> = if t.starts_with('[') {
            let vals: Vec<serde_json::Value> = serde_json::from_str(t)?;
            vals.into_iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => Ok(s),
                    serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
                    other => Err(Error::Parse(format!("coefficient {other} is not an exact value"))),
                })
                .collect::<Result<_>>()?
        } else {
            t.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect()
        };
        Self::new(items.iter().map(|s| s.parse()).collect::<Result<_>>()?)
    }

    /// Taylor coefficients of `p / q` at 0, `len` of them.
    pub fn of_rational(p: &UPoly, q: &UPoly, len: usize) -> Result<Self> {
        let q0 = q.coeff(0).inv().map_err(|_| Error::Domain("denominator vanishes at 0".into()))?;
        let mut a: Vec<GaussianRational> = Vec::with_capacity(len);
        for k in 0..len {
            let mut s = p.coeff(k);
            for j in 1..=k.min(q.degree().unwrap_or(0)) {
                s -= &(&q.coeff(j) * &a[k - j]);
            }
            a.push(&s * &q0);
        }
        Self::new(a)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn truncate(&self, n: usize) -> Self {
        Self { coeffs: self.coeffs[..n.min(self.len()).max(1)].to_vec() }
    }
}

/// `P = f Q + O(t^N)`, normalized so that the lowest nonzero coefficient of `Q` is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadePair {
    pub p: UPoly,
    pub q: UPoly,
}

impl PadePair {
    fn canonical(p: UPoly, q: UPoly) -> Self {
        let low = q.valuation().map(|k| q.coeff(k)).expect("Q is nonzero");
        let inv = low.inv().expect("nonzero");
        PadePair { p: p.scale(&inv), q: q.scale(&inv) }
    }

    /// `P - f Q` vanishes through `t^{n-1}`.
    pub fn verifies(&self, f: &TaylorPrefix, n: usize) -> bool {
        (0..n.min(f.len())).all(|k| {
            let mut s = self.p.coeff(k);
            for j in 0..=k.min(self.q.degree().unwrap_or(0)) {
                s -= &(&self.q.coeff(j) * &f.coeffs[k - j]);
            }
            s.is_zero()
        })
    }
}

fn check_params(f: &TaylorPrefix, d: usize, n: usize) -> Result<()> {
    if n > f.len() {
        return Err(Error::Domain(format!("N = {n} exceeds the prefix length {}", f.len())));
    }
    if n <= d {
        return Err(Error::Domain(format!("N = {n} must exceed d = {d}")));
    }
    Ok(())
}

/// The `N x (2d+2)` homogeneous system in `(p_0..p_d, q_0..q_d)`.
fn pade_system(f: &TaylorPrefix, d: usize, n: usize) -> Vec<Row> {
    (0..n)
        .map(|k| {
            let mut row = vec![GaussianRational::zero(); 2 * d + 2];
            if k <= d {
                row[k] = GaussianRational::one();
            }
            for j in 0..=k.min(d) {
                row[d + 1 + j] = -&f.coeffs[k - j];
            }
            row
        })
        .collect()
}

/// A nonzero solution of `P = f Q + O(t^N)`, or `None` when only the trivial one exists.
pub fn pade_solve(f: &TaylorPrefix, d: usize, n: usize) -> Result<Option<PadePair>> {
    check_params(f, d, n)?;
    let ker = kernel(&pade_system(f, d, n), 2 * d + 2);
    // the last basis vector has its free column furthest right, i.e. the
    // highest free q-coefficient; any choice is a valid solution
    Ok(ker.last().map(|v| {
        let p = UPoly::new(v[..=d].to_vec());
        let q = UPoly::new(v[d + 1..].to_vec());
        PadePair::canonical(p, q)
    }))
}

/// Vanishing of every minor `C^N_alpha`, decided by rank.
pub fn rationality_conditions(f: &TaylorPrefix, d: usize, n: usize) -> Result<bool> {
    check_params(f, d, n)?;
    Ok(rank(&pade_system(f, d, n)) < 2 * d + 2)
}

/// `P / Q` in lowest terms, `Q` normalized at its lowest nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub p: UPoly,
    pub q: UPoly,
}

impl RationalFunction {
    pub fn new(p: &UPoly, q: &UPoly) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        let g = p.gcd(q);
        let g = if g.is_zero() { UPoly::one() } else { g };
        let pair = PadePair::canonical(p.div_exact(&g).expect("gcd"), q.div_exact(&g).expect("gcd"));
        Ok(Self { p: pair.p, q: pair.q })
    }

    pub fn degree(&self) -> usize {
        self.p.degree().unwrap_or(0).max(self.q.degree().unwrap_or(0))
    }

    pub fn to_json(&self) -> RationalFunctionJson {
        RationalFunctionJson { p: self.p.to_string(), q: self.q.to_string(), degree: self.degree() }
    }
}

impl std::fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.q == UPoly::one() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "({})/({})", self.p, self.q)
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RationalFunctionJson {
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "Q")]
    pub q: String,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reconstruction {
    Found(RationalFunction),
    TrivialKernel,
    /// `R - f` fails to vanish at this coefficient.
    Mismatch(usize),
}

impl Reconstruction {
    pub fn found(&self) -> Option<&RationalFunction> {
        match self {
            Reconstruction::Found(r) => Some(r),
            _ => None,
        }
    }
}

/// `R = P / Q` from the system at `N = 3d + 1`, checked against the whole prefix.
pub fn reconstruct(f: &TaylorPrefix, d: usize) -> Result<Reconstruction> {
    reconstruct_at(f, d, 3 * d + 1)
}

/// As [`reconstruct`] but solving at a chosen `N >= 3d + 1`.
pub fn reconstruct_at(f: &TaylorPrefix, d: usize, n: usize) -> Result<Reconstruction> {
    if f.len() < 3 * d + 2 {
        return Err(Error::Domain(format!("reconstruction at d = {d} needs {} coefficients, got {}", 3 * d + 2, f.len())));
    }
    if n < 3 * d + 1 {
        return Err(Error::Domain(format!("N = {n} is below 3d + 1")));
    }
    let Some(pair) = pade_solve(f, d, n)? else {
        return Ok(Reconstruction::TrivialKernel);
    };
    let r = RationalFunction::new(&pair.p, &pair.q)?;
    let check = PadePair { p: r.p.clone(), q: r.q.clone() };
    for k in 0..f.len() {
        if !check.verifies(f, k + 1) {
            return Ok(Reconstruction::Mismatch(k));
        }
    }
    Ok(Reconstruction::Found(r))
}

/// Least `d <= d_max` at which reconstruction succeeds.
pub fn minimal_degree(f: &TaylorPrefix, d_max: usize) -> Result<Option<(usize, RationalFunction)>> {
    for d in 0..=d_max {
        if let Reconstruction::Found(r) = reconstruct(f, d)? {
            return Ok(Some((d, r)));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ScanRow {
    pub index: String,
    /// `None`: no `d <= dMax` reconstructs this member.
    pub degree: Option<usize>,
    pub function: Option<RationalFunctionJson>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DegreeScan {
    #[serde(rename = "dMax")]
    pub d_max: usize,
    pub terms: usize,
    pub rows: Vec<ScanRow>,
    /// Largest degree over the members that reconstructed.
    #[serde(rename = "maxDegree")]
    pub max_degree: Option<usize>,
    #[serde(rename = "allRational")]
    pub all_rational: bool,
}

/// Minimal degree of each member of a family, using its first `terms` coefficients.
pub fn uniform_degree_scan(family: &[(String, TaylorPrefix)], d_max: usize, terms: usize) -> Result<DegreeScan> {
    if terms < 3 * d_max + 2 {
        return Err(Error::Domain(format!("terms must be at least 3 dMax + 2 = {}", 3 * d_max + 2)));
    }
    let rows = family
        .par_iter()
        .map(|(label, f)| {
            if f.len() < terms {
                return Err(Error::Domain(format!("member {label} has only {} coefficients", f.len())));
            }
            let found = minimal_degree(&f.truncate(terms), d_max)?;
            Ok(ScanRow {
                index: label.clone(),
                degree: found.as_ref().map(|(d, _)| *d),
                function: found.map(|(_, r)| r.to_json()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DegreeScan {
        d_max,
        terms,
        max_degree: rows.iter().filter_map(|r| r.degree).max(),
        all_rational: rows.iter().all(|r| r.degree.is_some()),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::gaussian::{rat, Rational};

    fn q(n: i64, d: i64) -> GaussianRational {
        GaussianRational::from_rational(rat(n, d))
    }

    fn exp_prefix(n: usize) -> TaylorPrefix {
        let mut c = vec![Rational::one()];
        for k in 1..n {
            c.push(&c[k - 1] / Rational::from_integer((k as i64).into()));
        }
        TaylorPrefix::new(c.into_iter().map(GaussianRational::from_rational).collect()).unwrap()
    }

    fn fib(n: usize) -> TaylorPrefix {
        let mut c = vec![1i64, 1];
        while c.len() < n {
            c.push(c[c.len() - 1] + c[c.len() - 2]);
        }
        TaylorPrefix::from_ints(&c[..n]).unwrap()
    }

    #[test]
    fn geometric_pade() {
        let f = TaylorPrefix::from_ints(&[1, 1, 1, 1]).unwrap();
        let pq = pade_solve(&f, 1, 4).unwrap().unwrap();
        assert_eq!(pq.p.to_string(), "1");
        assert_eq!(pq.q.to_string(), "1 - t");
    }

    #[test]
    fn exp_prefix_degree_one_is_trivial() {
        let f = TaylorPrefix::new(vec![q(1, 1), q(1, 1), q(1, 2), q(1, 6)]).unwrap();
        assert_eq!(pade_solve(&f, 1, 4).unwrap(), None);
        // oracle: the 4x4 system has nonzero determinant
        let m = pade_system(&f, 1, 4);
        assert!(!crate::algebra::linalg::det(m).is_zero());
    }

    #[test]
    fn underdetermined_is_nontrivial() {
        let f = TaylorPrefix::from_ints(&[3, -1, 4]).unwrap();
        assert!(pade_solve(&f, 2, 3).unwrap().is_some());
        assert!(rationality_conditions(&f, 2, 3).unwrap());
    }

    #[test]
    fn fibonacci_conditions() {
        let f = fib(8);
        assert!(rationality_conditions(&f, 2, 7).unwrap());
        assert!(!rationality_conditions(&f, 1, 7).unwrap());
        let c = TaylorPrefix::from_ints(&[5, 0]).unwrap();
        assert!(rationality_conditions(&c, 0, 2).unwrap());
    }

    #[test]
    fn reconstructions() {
        let geo = TaylorPrefix::from_ints(&[1; 8]).unwrap();
        let r = reconstruct(&geo, 1).unwrap();
        assert_eq!(r.found().unwrap().to_string(), "(1)/(1 - t)");
        let f = fib(10);
        let r = reconstruct(&f, 2).unwrap();
        let r = r.found().unwrap();
        assert_eq!(r.q.to_string(), "1 - t - t^2");
        // multiply back: Q f = P to all ten terms
        let back = UPoly::new(f.coeffs().to_vec()).mul(&r.q);
        for k in 0..10 {
            assert_eq!(back.coeff(k), r.p.coeff(k));
        }
        assert!(reconstruct(&f, 1).unwrap().found().is_none());
        let e = exp_prefix(25);
        for d in 0..=6 {
            assert!(reconstruct(&e, d).unwrap().found().is_none(), "d = {d}");
        }
    }

    #[test]
    fn scan_families() {
        let fam: Vec<_> = (1..=3)
            .map(|p| (p.to_string(), TaylorPrefix::of_rational(&UPoly::one(), &UPoly::from_ints(&[1, -p]), 20).unwrap()))
            .collect();
        let s = uniform_degree_scan(&fam, 4, 14).unwrap();
        assert_eq!(s.max_degree, Some(1));
        assert!(s.all_rational);
        // p = 1 cancels to 1/(1 - t)
        let mut fam2: Vec<_> = (1..=4)
            .map(|p| {
                (p.to_string(), TaylorPrefix::of_rational(&UPoly::from_ints(&[1, p]), &UPoly::from_ints(&[1, 0, -1]), 20).unwrap())
            })
            .collect();
        fam2.push(("exp".into(), exp_prefix(20)));
        let s = uniform_degree_scan(&fam2, 4, 14).unwrap();
        assert_eq!(s.rows.iter().map(|r| r.degree).collect::<Vec<_>>(), vec![Some(1), Some(2), Some(2), Some(2), None]);
        assert!(!s.all_rational);
    }

    #[test]
    fn parses_both_formats() {
        let a = TaylorPrefix::parse("1\n1/2\n\n-3\n").unwrap();
        let b = TaylorPrefix::parse(r#"["1", "1/2", -3]"#).unwrap();
        assert_eq!(a, b);
        assert!(TaylorPrefix::parse("[]").is_err());
    }
}
