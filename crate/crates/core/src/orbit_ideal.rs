//! Degree slices of orbit-closure ideals, their leading-term diagrams and
//! reduction onto the staircase.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::ball::CBall;
use crate::algebra::eval::{eval_ball, Point};
use crate::algebra::gaussian::GaussianRational;
use crate::algebra::linalg::{rref, Row};
use crate::algebra::monomial::Monomial;
use crate::algebra::polynomial::Polynomial;
use crate::algebra::series::Series;
use crate::dynamics::{multiplicity_cap, trajectory_series, VectorField};
use crate::error::{check_dim, Error, Result};

/// Derivative count used for degree-`d` membership: the explicit multiplicity bound.
pub fn nu(field: &VectorField, d: u32) -> u64 {
    multiplicity_cap(field.dim(), d, field.delta())
}

/// `xi^k P(p) = 0` for all `k <= nu(deg P)`. Only exact points are accepted.
pub fn orbit_membership(field: &VectorField, p: &Point, poly: &Polynomial) -> Result<bool> {
    let Point::Exact(p) = p else {
        return Err(Error::Precondition(
            "membership needs exact coordinates; use certify_non_membership for balls".into(),
        ));
    };
    check_dim(field.dim(), p.len())?;
    check_dim(field.dim(), poly.nvars())?;
    if poly.is_zero() {
        return Ok(true);
    }
    let cap = nu(field, poly.degree()) as usize;
    let mut len = 16.min(cap + 1);
    loop {
        let germ = trajectory_series(field, p, len - 1)?;
        let s = germ.compose(poly)?;
        if !s.is_zero_to_order() {
            return Ok(false);
        }
        if len == cap + 1 {
            return Ok(true);
        }
        len = (len * 2).min(cap + 1);
    }
}

/// Searches `k <= nu` with `0` outside the ball enclosure of `xi^k P(p)`.
/// `Some(k)` certifies non-membership; `None` is no verdict.
pub fn certify_non_membership(field: &VectorField, p: &[CBall], poly: &Polynomial, prec: u32) -> Result<Option<usize>> {
    check_dim(field.dim(), p.len())?;
    let cap = nu(field, poly.degree());
    let mut q = poly.clone();
    for k in 0..=cap as usize {
        if q.is_zero() {
            return Ok(None);
        }
        if !eval_ball(&q, p, prec)?.contains_zero() {
            return Ok(Some(k));
        }
        q = field.lie_derivative(&q)?;
    }
    Ok(None)
}

/// `I_{Ob_p}` intersected with polynomials of degree `<= d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealSlice {
    pub degree: u32,
    /// Reduced echelon basis; leading monomials are distinct and strictly decreasing.
    pub basis: Vec<Polynomial>,
    pub point: Vec<GaussianRational>,
    pub nu: u64,
}

impl IdealSlice {
    pub fn nvars(&self) -> usize {
        self.point.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.basis.iter().filter_map(|q| q.leading_monomial().cloned()).collect()
    }

    /// Whether `q` lies in the span of the basis.
    pub fn contains(&self, q: &Polynomial) -> bool {
        let mut r = q.clone();
        for b in &self.basis {
            let (lm, _) = b.leading_term().expect("nonzero basis element");
            let c = r.coeff(lm);
            if !c.is_zero() {
                r = &r - &b.scale(&c);
            }
        }
        r.is_zero()
    }

    pub fn export(&self, names: &[String]) -> SliceExport {
        SliceExport {
            degree: self.degree,
            nu: self.nu,
            point: self.point.iter().map(ToString::to_string).collect(),
            basis: self.basis.iter().map(|b| b.to_string_with(names)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceExport {
    pub degree: u32,
    pub nu: u64,
    pub point: Vec<String>,
    pub basis: Vec<String>,
}

/// Coefficients of `m(phi(z))` for every monomial in `monos`, to length `len`.
pub(crate) fn monomial_jets(field: &VectorField, p: &[GaussianRational], monos: &[Monomial], len: usize) -> Result<Vec<Series>> {
    let germ = trajectory_series(field, p, len.saturating_sub(1))?;
    let coords = germ.series();
    let n = field.dim();
    let mut memo: HashMap<Monomial, Series> = HashMap::new();
    memo.insert(Monomial::one(n), Series::constant(GaussianRational::from_int(1), len));
    let mut sorted = monos.to_vec();
    sorted.sort();
    for m in &sorted {
        jet_of(m, &coords, &mut memo);
    }
    Ok(monos.iter().map(|m| memo[m].clone()).collect())
}

fn jet_of(m: &Monomial, coords: &[Series], memo: &mut HashMap<Monomial, Series>) -> Series {
    if let Some(s) = memo.get(m) {
        return s.clone();
    }
    let i = m.exps().iter().position(|&e| e > 0).expect("non-unit monomial");
    let mut lower = m.clone();
    lower.0[i] -= 1;
    let s = jet_of(&lower, coords, memo).mul(&coords[i]);
    memo.insert(m.clone(), s.clone());
    s
}

/// Kernel of `Q -> (Q(p), xi Q(p), ..., xi^nu Q(p))` on polynomials of degree `<= d`.
///
/// Uses `xi^k Q(p) = k! [z^k] Q(phi(z))`, so the rows are Taylor coefficients of
/// monomials along the germ. A prefix of the rows already gives a superset of
/// the kernel; it is accepted early when the ideal it spans is `xi`-invariant
/// (then every element vanishes on the whole orbit), otherwise the prefix
/// doubles up to the full `nu + 1` rows.
pub fn ideal_slice(field: &VectorField, p: &[GaussianRational], d: u32) -> Result<IdealSlice> {
    check_dim(field.dim(), p.len())?;
    let n = field.dim();
    let nu = nu(field, d);
    // deglex-descending, so pivots of the echelon form are leading monomials
    let monos = Monomial::all_up_to_degree(n, d);
    let m = monos.len();
    let full = nu as usize + 1;
    let mut len = (2 * m + 2).min(full);
    let basis = loop {
        let jets = monomial_jets(field, p, &monos, len)?;
        let mut rows: Vec<Row> = (0..len).map(|k| jets.iter().map(|s| s.coeff(k)).collect()).collect();
        let piv = rref(&mut rows);
        if piv.len() == m {
            break Vec::new();
        }
        let mut kern = crate::algebra::linalg::kernel(&rows, m);
        rref(&mut kern);
        let basis: Vec<Polynomial> =
            kern.into_iter().map(|v| Polynomial::from_terms(n, monos.iter().cloned().zip(v))).collect();
        if len == full || spans_invariant_ideal(field, &basis, d)? {
            break basis;
        }
        len = (len * 2).min(full);
    };
    Ok(IdealSlice { degree: d, basis, point: p.to_vec(), nu })
}

/// `xi Q` lies in the span of monomial multiples of the basis for every basis element `Q`.
fn spans_invariant_ideal(field: &VectorField, basis: &[Polynomial], d: u32) -> Result<bool> {
    let n = field.dim();
    let top = (d + field.delta()).saturating_sub(1).max(d);
    let cols = Monomial::all_up_to_degree(n, top);
    let index: HashMap<&Monomial, usize> = cols.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let to_row = |q: &Polynomial| -> Row {
        let mut r = vec![GaussianRational::zero(); cols.len()];
        for (mono, c) in q.terms() {
            r[index[mono]] = c.clone();
        }
        r
    };
    let mut span: Vec<Row> = Vec::new();
    for b in basis {
        for mult in Monomial::all_up_to_degree(n, top - b.degree()) {
            span.push(to_row(&b.mul_monomial(&mult)));
        }
    }
    let r0 = crate::algebra::linalg::rank(&span);
    for b in basis {
        let xb = field.lie_derivative(b)?;
        if xb.is_zero() {
            continue;
        }
        let mut ext = span.clone();
        ext.push(to_row(&xb));
        if crate::algebra::linalg::rank(&ext) != r0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Monomial ideal given by minimal generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialDiagram {
    nvars: usize,
    generators: Vec<Monomial>,
}

impl MonomialDiagram {
    /// Minimalizes `gens`; the stored list is sorted deglex-ascending.
    pub fn new(nvars: usize, gens: impl IntoIterator<Item = Monomial>) -> Self {
        let mut all: Vec<Monomial> = gens.into_iter().collect();
        all.sort();
        all.dedup();
        let mut minimal: Vec<Monomial> = Vec::new();
        for g in all {
            if !minimal.iter().any(|h| h.divides(&g)) {
                minimal.push(g);
            }
        }
        MonomialDiagram { nvars, generators: minimal }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> &[Monomial] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.generators.iter().any(|g| g.divides(m))
    }

    /// Staircase monomials of degree `<= d`, deglex-ascending.
    pub fn staircase(&self, d: u32) -> Vec<Monomial> {
        let mut v: Vec<Monomial> =
            Monomial::all_up_to_degree(self.nvars, d).into_iter().filter(|m| !self.contains(m)).collect();
        v.sort();
        v
    }

    /// `rho(d)`, the number of staircase monomials of degree `<= d`.
    pub fn rho(&self, d: u32) -> usize {
        self.staircase(d).len()
    }

    /// Growth exponent of `rho`: the largest set of variables whose pure
    /// monomials all avoid the ideal.
    pub fn kappa(&self) -> usize {
        let n = self.nvars;
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let inside = |g: &Monomial| g.exps().iter().enumerate().all(|(i, &e)| e == 0 || mask & (1 << i) != 0);
            if !self.generators.iter().any(inside) {
                best = size;
            }
        }
        best
    }

    pub fn export(&self) -> DiagramExport {
        let mut gens: Vec<Vec<u32>> = self.generators.iter().map(|m| m.0.clone()).collect();
        gens.sort();
        DiagramExport { nvars: self.nvars, generators: gens, kappa: self.kappa() }
    }

    pub fn from_export(e: &DiagramExport) -> Result<Self> {
        for g in &e.generators {
            check_dim(e.nvars, g.len())?;
        }
        Ok(Self::new(e.nvars, e.generators.iter().map(|g| Monomial(g.clone()))))
    }
}

/// JSON form: generator exponent vectors in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramExport {
    pub nvars: usize,
    pub generators: Vec<Vec<u32>>,
    pub kappa: usize,
}

pub fn leading_diagram(slice: &IdealSlice) -> MonomialDiagram {
    MonomialDiagram::new(slice.nvars(), slice.leading_monomials())
}

/// One reduction step `R -= coeff * multiplier * basis[index]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisionStep {
    pub basis_index: usize,
    pub multiplier: Vec<u32>,
    pub coeff: String,
}

/// `P = sum_j A_j Q_j + R` with no monomial of `R` in the leading-term diagram.
pub fn staircase_division(poly: &Polynomial, slice: &IdealSlice) -> Result<(Polynomial, Vec<DivisionStep>)> {
    check_dim(slice.nvars(), poly.nvars())?;
    let lead: Vec<(Monomial, GaussianRational)> = slice
        .basis
        .iter()
        .map(|b| b.leading_term().map(|(m, c)| (m.clone(), c.clone())).expect("nonzero basis element"))
        .collect();
    let mut r = poly.clone();
    let mut steps = Vec::new();
    loop {
        // largest term of r that some leading monomial divides
        let hit = r.terms().rev().find_map(|(m, c)| {
            lead.iter().enumerate().find_map(|(j, (lm, _))| lm.quotient(m).map(|q| (j, q, m.clone(), c.clone())))
        });
        let Some((j, q, _, c)) = hit else { break };
        let coeff = &c * &lead[j].1.inv()?;
        r = &r - &slice.basis[j].mul_monomial(&q).scale(&coeff);
        steps.push(DivisionStep { basis_index: j, multiplier: q.0, coeff: coeff.to_string() });
    }
    Ok((r, steps))
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub degree: u32,
    pub generic: DiagramExport,
    pub generic_count: usize,
    /// Indices of samples whose diagram differs from the generic one.
    pub exceptional: Vec<usize>,
    pub diagrams: Vec<DiagramExport>,
    pub singular: Vec<usize>,
}

/// Leading diagrams of the degree-`d` slices at every sample point.
pub fn diagram_stability_scan(field: &VectorField, samples: &[Vec<GaussianRational>], d: u32) -> Result<StabilityReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("no sample points".into()));
    }
    let per: Vec<(MonomialDiagram, bool)> = samples
        .par_iter()
        .map(|p| -> Result<_> {
            let s = ideal_slice(field, p, d)?;
            Ok((leading_diagram(&s), field.is_singular(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut freq: BTreeMap<&MonomialDiagram, usize> = BTreeMap::new();
    for (dg, _) in &per {
        *freq.entry(dg).or_default() += 1;
    }
    // most frequent; ties go to the smallest diagram in the derived order
    let (generic, count) = freq.iter().fold((None, 0), |(b, bc), (dg, &c)| if c > bc { (Some(*dg), c) } else { (b, bc) });
    let generic = generic.expect("nonempty").clone();
    Ok(StabilityReport {
        degree: d,
        generic: generic.export(),
        generic_count: count,
        exceptional: per.iter().enumerate().filter(|(_, (dg, _))| *dg != generic).map(|(i, _)| i).collect(),
        diagrams: per.iter().map(|(dg, _)| dg.export()).collect(),
        singular: per.iter().enumerate().filter(|(_, (_, s))| *s).map(|(i, _)| i).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::gaussian::rat;
    use crate::algebra::parse::parse_polynomial;

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    fn quad() -> VectorField {
        VectorField::parse(&["t", "y"], &["t", "2*y"]).unwrap()
    }

    fn exp() -> VectorField {
        VectorField::parse(&["t", "y"], &["1", "y"]).unwrap()
    }

    fn p(f: &VectorField, s: &str) -> Polynomial {
        parse_polynomial(s, f.names()).unwrap()
    }

    #[test]
    fn membership_examples() {
        let f = quad();
        let pt = Point::Exact(vec![g(1), g(1)]);
        assert!(orbit_membership(&f, &pt, &p(&f, "y - t^2")).unwrap());
        assert!(!orbit_membership(&f, &pt, &p(&f, "y - t")).unwrap());
        assert!(orbit_membership(&f, &pt, &Polynomial::zero(2)).unwrap());
        let balls = Point::Balls(vec![CBall::exact_int(1), CBall::exact_int(1)]);
        assert!(orbit_membership(&f, &balls, &p(&f, "y")).is_err());
        let Point::Balls(b) = balls else { unreachable!() };
        // y - t: value 0, derivative 1
        assert_eq!(certify_non_membership(&f, &b, &p(&f, "y - t"), 64).unwrap(), Some(1));
        assert_eq!(certify_non_membership(&f, &b, &p(&f, "y - t^2"), 64).unwrap(), None);
    }

    #[test]
    fn slices() {
        let e = exp();
        for d in 1..=3 {
            assert!(ideal_slice(&e, &[g(0), g(1)], d).unwrap().is_zero());
        }
        let f = quad();
        let s = ideal_slice(&f, &[g(1), g(1)], 2).unwrap();
        assert_eq!(s.basis, vec![p(&f, "t^2 - y")]);
        assert_eq!(s.nu, 72);
    }

    #[test]
    fn parametric_example_corrected_field() {
        // t d/dt + a*y d/dy with a frozen; the orbit of (1, 1/2, 1) is y^2 = t
        let f = VectorField::parse(&["t", "a", "y"], &["t", "0", "a*y"]).unwrap();
        let s = ideal_slice(&f, &[g(1), GaussianRational::from_rational(rat(1, 2)), g(1)], 2).unwrap();
        assert!(s.contains(&p(&f, "y^2 - t")));
        assert!(s.contains(&p(&f, "a - 1/2")));
        let induced = VectorField::parse(&["t", "y"], &["t", "1/2*y"]).unwrap();
        let s2 = ideal_slice(&induced, &[g(1), g(1)], 2).unwrap();
        assert_eq!(s2.basis, vec![p(&induced, "y^2 - t")]);
    }

    #[test]
    fn diagrams() {
        let f = quad();
        let s = ideal_slice(&f, &[g(1), g(1)], 2).unwrap();
        let dg = leading_diagram(&s);
        assert_eq!(dg.generators(), &[Monomial(vec![2, 0])]);
        assert_eq!(dg.kappa(), 1);
        assert_eq!(dg.staircase(2), vec![Monomial(vec![0, 0]), Monomial(vec![0, 1]), Monomial(vec![1, 0]), Monomial(vec![0, 2]), Monomial(vec![1, 1])]);
        let empty = leading_diagram(&ideal_slice(&exp(), &[g(0), g(1)], 2).unwrap());
        assert!(empty.is_empty());
        assert_eq!(empty.kappa(), 2);
        let sing = leading_diagram(&ideal_slice(&f, &[g(0), g(0)], 1).unwrap());
        assert_eq!(sing.generators(), &[Monomial(vec![0, 1]), Monomial(vec![1, 0])]);
        assert_eq!(sing.kappa(), 0);
        let back = MonomialDiagram::from_export(&dg.export()).unwrap();
        assert_eq!(back, dg);
        let json = serde_json::to_string(&sing.export()).unwrap();
        assert_eq!(json, r#"{"nvars":2,"generators":[[0,1],[1,0]],"kappa":0}"#);
    }

    #[test]
    fn division() {
        let f = quad();
        let s = ideal_slice(&f, &[g(1), g(1)], 2).unwrap();
        let (r, steps) = staircase_division(&p(&f, "t^3"), &s).unwrap();
        assert_eq!(r, p(&f, "t*y"));
        assert_eq!(steps.len(), 1);
        let stair = p(&f, "t*y + y^2 - 3");
        assert_eq!(staircase_division(&stair, &s).unwrap().0, stair);
        assert!(staircase_division(&p(&f, "2*y - 2*t^2"), &s).unwrap().0.is_zero());
        let (r2, _) = staircase_division(&r, &s).unwrap();
        assert_eq!(r2, r);
    }

    #[test]
    fn stability_scan() {
        let f = quad();
        let samples = vec![vec![g(1), g(2)], vec![g(2), g(3)], vec![g(-1), g(5)], vec![g(0), g(0)]];
        let rep = diagram_stability_scan(&f, &samples, 1).unwrap();
        assert!(rep.generic.generators.is_empty());
        assert_eq!(rep.exceptional, vec![3]);
        assert_eq!(rep.singular, vec![3]);
    }
}
