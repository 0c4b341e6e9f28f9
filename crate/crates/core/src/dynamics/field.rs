use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::gaussian::GaussianRational;
use crate::algebra::parse::parse_polynomial;
use crate::algebra::polynomial::{default_names, Polynomial};
use crate::error::{check_dim, Error, Result};

/// Polynomial vector field `sum_i xi_i(x) d/dx_i` on C^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    components: Vec<Polynomial>,
    names: Vec<String>,
}

impl VectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let n = components.len();
        Self::with_names(components, default_names(n))
    }

    pub fn with_names(components: Vec<Polynomial>, names: Vec<String>) -> Result<Self> {
        let n = components.len();
        check_dim(n, names.len())?;
        for c in &components {
            check_dim(n, c.nvars())?;
        }
        Ok(Self { components, names })
    }

    /// Parse components written over the given variable names.
    pub fn parse(names: &[&str], components: &[&str]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let comps = components
            .iter()
            .map(|s| parse_polynomial(s, &names))
            .collect::<Result<Vec<_>>>()?;
        Self::with_names(comps, names)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `delta = max deg xi_i`.
    pub fn delta(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// `xi P = sum_i xi_i dP/dx_i`.
    pub fn lie_derivative(&self, p: &Polynomial) -> Result<Polynomial> {
        check_dim(self.dim(), p.nvars())?;
        let mut acc = Polynomial::zero(self.dim());
        for (i, xi) in self.components.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let d = p.partial_derivative(i);
            if !d.is_zero() {
                acc = &acc + &(xi * &d);
            }
        }
        Ok(acc)
    }

    /// `[P, xi P, ..., xi^k P]`.
    pub fn iterated_lie(&self, p: &Polynomial, k: usize) -> Result<Vec<Polynomial>> {
        check_dim(self.dim(), p.nvars())?;
        let mut out = Vec::with_capacity(k + 1);
        out.push(p.clone());
        for j in 0..k {
            let next = self.lie_derivative(&out[j])?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn eval(&self, p: &[GaussianRational]) -> Result<Vec<GaussianRational>> {
        self.components.iter().map(|c| c.eval(p)).collect()
    }

    /// `p` is in `Sing xi` when every component vanishes there.
    pub fn is_singular(&self, p: &[GaussianRational]) -> Result<bool> {
        Ok(self.eval(p)?.iter().all(Zero::is_zero))
    }

    /// Multiply every component by a polynomial (a time reparametrization).
    pub fn scaled_by(&self, q: &Polynomial) -> Result<Self> {
        check_dim(self.dim(), q.nvars())?;
        Self::with_names(self.components.iter().map(|c| c * q).collect(), self.names.clone())
    }

    pub fn to_file(&self) -> FieldFile {
        FieldFile {
            variables: self.names.clone(),
            components: self.components.iter().map(|c| c.to_string_with(&self.names)).collect(),
        }
    }

    pub fn from_file(f: &FieldFile) -> Result<Self> {
        if f.variables.len() != f.components.len() {
            return Err(Error::Parse("one component per variable expected".into()));
        }
        let comps = f
            .components
            .iter()
            .map(|s| parse_polynomial(s, &f.variables))
            .collect::<Result<Vec<_>>>()?;
        Self::with_names(comps, f.variables.clone())
    }

    pub fn component_strings(&self) -> Vec<String> {
        self.components.iter().map(|c| c.to_string_with(&self.names)).collect()
    }
}

/// On-disk form of a vector field: variable names and one polynomial per component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFile {
    pub variables: Vec<String>,
    pub components: Vec<String>,
}
