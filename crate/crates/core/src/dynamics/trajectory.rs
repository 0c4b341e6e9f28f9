//! Formal Taylor solutions of `x' = xi(x)` and multiplicities along them.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use super::field::VectorField;
use crate::algebra::gaussian::{rat, GaussianRational};
use crate::algebra::monomial::Monomial;
use crate::algebra::polynomial::Polynomial;
use crate::algebra::series::Series;
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Debug)]
enum Node {
    Var(usize),
    Mul(usize, usize),
}

/// Taylor-mode evaluation of the field along the series being built.
#[derive(Clone, Debug)]
struct Engine {
    nodes: Vec<Node>,
    node_coeffs: Vec<Vec<GaussianRational>>,
    /// Per component: constant term and `(node, coefficient)` pairs.
    comps: Vec<(GaussianRational, Vec<(usize, GaussianRational)>)>,
}

impl Engine {
    fn new(field: &VectorField) -> Self {
        let n = field.dim();
        let mut nodes: Vec<Node> = (0..n).map(Node::Var).collect();
        let mut powers: HashMap<(usize, u32), usize> = (0..n).map(|j| ((j, 1), j)).collect();
        let mut monos: HashMap<Monomial, usize> = HashMap::new();
        let mut comps = Vec::with_capacity(n);
        for c in field.components() {
            let mut constant = GaussianRational::zero();
            let mut lin = Vec::new();
            for (m, coef) in c.terms() {
                if m.degree() == 0 {
                    constant = coef.clone();
                    continue;
                }
                let node = if let Some(&id) = monos.get(m) {
                    id
                } else {
                    let mut acc: Option<usize> = None;
                    for (j, &e) in m.exps().iter().enumerate() {
                        if e == 0 {
                            continue;
                        }
                        let pw = power_node(&mut nodes, &mut powers, j, e);
                        acc = Some(match acc {
                            None => pw,
                            Some(a) => {
                                nodes.push(Node::Mul(a, pw));
                                nodes.len() - 1
                            }
                        });
                    }
                    let id = acc.expect("nonconstant monomial");
                    monos.insert(m.clone(), id);
                    id
                };
                lin.push((node, coef.clone()));
            }
            comps.push((constant, lin));
        }
        let node_coeffs = vec![Vec::new(); nodes.len()];
        Engine { nodes, node_coeffs, comps }
    }

    /// Given `x` known through order `k`, return `[z^k] xi_i(x(z))` for every i.
    fn step(&mut self, xs: &[Vec<GaussianRational>], k: usize) -> Vec<GaussianRational> {
        for id in 0..self.nodes.len() {
            let v = match self.nodes[id] {
                Node::Var(j) => xs[j][k].clone(),
                Node::Mul(a, b) => {
                    let (ca, cb) = (&self.node_coeffs[a], &self.node_coeffs[b]);
                    let mut s = GaussianRational::zero();
                    for i in 0..=k {
                        if !ca[i].is_zero() && !cb[k - i].is_zero() {
                            s += &(&ca[i] * &cb[k - i]);
                        }
                    }
                    s
                }
            };
            debug_assert_eq!(self.node_coeffs[id].len(), k);
            self.node_coeffs[id].push(v);
        }
        self.comps
            .iter()
            .map(|(c0, lin)| {
                let mut s = if k == 0 { c0.clone() } else { GaussianRational::zero() };
                for (node, coef) in lin {
                    let v = &self.node_coeffs[*node][k];
                    if !v.is_zero() {
                        s += &(coef * v);
                    }
                }
                s
            })
            .collect()
    }
}

fn power_node(nodes: &mut Vec<Node>, powers: &mut HashMap<(usize, u32), usize>, j: usize, e: u32) -> usize {
    if let Some(&id) = powers.get(&(j, e)) {
        return id;
    }
    let prev = power_node(nodes, powers, j, e - 1);
    nodes.push(Node::Mul(prev, j));
    let id = nodes.len() - 1;
    powers.insert((j, e), id);
    id
}

/// Truncated power-series solution of `x' = xi(x)`, `x(0) = p`.
#[derive(Clone, Debug)]
pub struct TrajectoryGerm {
    field: Arc<VectorField>,
    base: Vec<GaussianRational>,
    coeffs: Vec<Vec<GaussianRational>>,
    engine: Engine,
    singular: bool,
}

/// Build the germ through `p` to order `order` (coefficients of `z^0..z^order`).
pub fn trajectory_series(field: &VectorField, p: &[GaussianRational], order: usize) -> Result<TrajectoryGerm> {
    TrajectoryGerm::new(Arc::new(field.clone()), p, order)
}

impl TrajectoryGerm {
    pub fn new(field: Arc<VectorField>, p: &[GaussianRational], order: usize) -> Result<Self> {
        check_dim(field.dim(), p.len())?;
        let singular = field.is_singular(p)?;
        let engine = Engine::new(&field);
        let mut g = TrajectoryGerm {
            coeffs: p.iter().map(|c| vec![c.clone()]).collect(),
            base: p.to_vec(),
            field,
            engine,
            singular,
        };
        g.extend(order);
        Ok(g)
    }

    /// Extend the known coefficients through `z^order`.
    pub fn extend(&mut self, order: usize) {
        while self.order() < order {
            let k = self.order();
            let rhs = self.engine.step(&self.coeffs, k);
            let inv = rat(1, k as i64 + 1);
            for (x, r) in self.coeffs.iter_mut().zip(rhs) {
                x.push(r.scale(&inv));
            }
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<VectorField> {
        self.field.clone()
    }

    pub fn base(&self) -> &[GaussianRational] {
        &self.base
    }

    pub fn is_constant(&self) -> bool {
        self.singular
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients of coordinate `i`, `z^0..z^order`.
    pub fn coordinate(&self, i: usize) -> &[GaussianRational] {
        &self.coeffs[i]
    }

    pub fn series(&self) -> Vec<Series> {
        self.coeffs.iter().map(|c| Series::new(c.clone())).collect()
    }

    /// `P(phi(z))` to the germ's order.
    pub fn compose(&self, p: &Polynomial) -> Result<Series> {
        check_dim(self.dim(), p.nvars())?;
        Ok(Series::eval_polynomial(p, &self.series()))
    }

    /// Truncation to a lower order, recomputed consistently.
    pub fn truncated(&self, order: usize) -> Vec<Vec<GaussianRational>> {
        self.coeffs.iter().map(|c| c[..=order.min(self.order())].to_vec()).collect()
    }

    pub fn export(&self, radius: Option<f64>) -> GermExport {
        GermExport {
            variables: self.field.names().to_vec(),
            base: self.base.iter().map(ToString::to_string).collect(),
            order: self.order(),
            coefficients: self.coeffs.iter().map(|c| c.iter().map(ToString::to_string).collect()).collect(),
            radius,
        }
    }
}

/// JSON form of a germ: exact coefficient strings per coordinate plus the certified radius.
#[derive(Clone, Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct GermExport {
    pub variables: Vec<String>,
    pub base: Vec<String>,
    pub order: usize,
    pub coefficients: Vec<Vec<String>>,
    pub radius: Option<f64>,
}

/// Order of vanishing of `P` along the trajectory through a nonsingular point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Multiplicity {
    Finite { order: u64 },
    /// `P o phi` vanishes beyond the multiplicity bound, hence identically.
    ExceedsCap { cap: u64 },
}

/// `2^(n+1) (d + (n-1) delta)^n`.
pub fn multiplicity_cap(n: usize, d: u32, delta: u32) -> u64 {
    let base = d as u64 + (n as u64 - 1) * delta as u64;
    (1u64 << (n + 1)).saturating_mul(base.saturating_pow(n as u32))
}

/// Multiplicity of `P` at `p` along the trajectory, with the explicit cap.
pub fn multiplicity(field: &VectorField, p: &[GaussianRational], poly: &Polynomial) -> Result<Multiplicity> {
    let cap = multiplicity_cap(field.dim(), poly.degree(), field.delta());
    multiplicity_with_cap(field, p, poly, cap)
}

pub fn multiplicity_with_cap(
    field: &VectorField,
    p: &[GaussianRational],
    poly: &Polynomial,
    cap: u64,
) -> Result<Multiplicity> {
    if field.is_singular(p)? {
        return Err(Error::Precondition("multiplicity needs a nonsingular point".into()));
    }
    let mut germ = trajectory_series(field, p, 8.min(cap as usize + 1))?;
    let mut scanned = 0usize;
    loop {
        let s = germ.compose(poly)?;
        if let Some(v) = s.coeffs.iter().skip(scanned).position(|c| !c.is_zero()) {
            return Ok(Multiplicity::Finite { order: (scanned + v) as u64 });
        }
        scanned = s.len();
        if scanned as u64 > cap {
            return Ok(Multiplicity::ExceedsCap { cap });
        }
        let next = (germ.order() * 2).min(cap as usize + 1).max(germ.order() + 1);
        germ.extend(next);
    }
}
