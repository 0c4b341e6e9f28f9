use num_complex::Complex64;

use super::ball::CBall;
use super::gaussian::GaussianRational;
use super::polynomial::Polynomial;
use crate::error::{check_dim, Result};

/// A point given either exactly or as a vector of balls.
#[derive(Clone, Debug)]
pub enum Point {
    Exact(Vec<GaussianRational>),
    Balls(Vec<CBall>),
}

#[derive(Clone, Debug)]
pub enum Value {
    Exact(GaussianRational),
    Ball(CBall),
}

impl Value {
    pub fn abs_upper(&self) -> f64 {
        match self {
            Value::Exact(g) => g.abs_f64(),
            Value::Ball(b) => b.abs_upper(),
        }
    }
}

/// Evaluate exactly on exact points, or as an enclosing ball on ball points.
pub fn evaluate(p: &Polynomial, point: &Point, prec: u32) -> Result<Value> {
    match point {
        Point::Exact(v) => Ok(Value::Exact(p.eval(v)?)),
        Point::Balls(v) => Ok(Value::Ball(eval_ball(p, v, prec)?)),
    }
}

/// Ball enclosure of `p` over a box of balls.
pub fn eval_ball(p: &Polynomial, point: &[CBall], prec: u32) -> Result<CBall> {
    check_dim(p.nvars(), point.len())?;
    let mut powers: Vec<Vec<CBall>> = Vec::with_capacity(point.len());
    for (i, x) in point.iter().enumerate() {
        let max = p.degree_in(i) as usize;
        let mut v = vec![CBall::exact_int(1)];
        for k in 1..=max {
            let next = v[k - 1].mul(x, prec);
            v.push(next);
        }
        powers.push(v);
    }
    let mut acc = CBall::zero();
    for (m, c) in p.terms() {
        let mut t = CBall::from_gaussian(c, prec);
        for (i, &e) in m.exps().iter().enumerate() {
            if e > 0 {
                t = t.mul(&powers[i][e as usize], prec);
            }
        }
        acc = acc.add(&t, prec);
    }
    Ok(acc)
}

/// Plain floating evaluation, for searches that are certified elsewhere.
pub fn eval_c64(p: &Polynomial, x: &[Complex64]) -> Complex64 {
    p.terms().fold(Complex64::new(0.0, 0.0), |acc, (m, c)| {
        let (re, im) = c.to_f64_pair();
        let mut t = Complex64::new(re, im);
        for (xi, &e) in x.iter().zip(m.exps()) {
            if e > 0 {
                t *= xi.powu(e);
            }
        }
        acc + t
    })
}

pub fn exact_to_balls(p: &[GaussianRational], prec: u32) -> Vec<CBall> {
    p.iter().map(|g| CBall::from_gaussian(g, prec)).collect()
}
