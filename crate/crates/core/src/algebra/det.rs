//! Fraction-free determinants of polynomial matrices.

use super::polynomial::Polynomial;

/// Exact quotient `num / den` when `den` divides `num`; `None` otherwise.
pub fn div_exact(num: &Polynomial, den: &Polynomial) -> Option<Polynomial> {
    assert!(!den.is_zero(), "division by the zero polynomial");
    let (lm, lc) = den.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
    let lc_inv = lc.inv().ok()?;
    let mut rem = num.clone();
    let mut quo = Polynomial::zero(num.nvars());
    while let Some((m, c)) = rem.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
        let q = lm.quotient(&m)?;
        let coef = &c * &lc_inv;
        let t = Polynomial::term(q, coef);
        rem = &rem - &(&t * den);
        quo = &quo + &t;
    }
    Some(quo)
}

/// Determinant via Bareiss elimination; every division is exact.
pub fn det_poly_matrix(a: &[Vec<Polynomial>]) -> Polynomial {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n), "square matrix required");
    if n == 0 {
        return Polynomial::one(0);
    }
    let nvars = a[0][0].nvars();
    let mut m: Vec<Vec<Polynomial>> = a.to_vec();
    let mut sign_flip = false;
    let mut prev = Polynomial::one(nvars);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign_flip = !sign_flip;
                }
                None => return Polynomial::zero(nvars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = div_exact(&t, &prev).expect("Bareiss step divides exactly");
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign_flip {
        -&d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::{names, parse_polynomial};

    fn cofactor(a: &[Vec<Polynomial>]) -> Polynomial {
        let n = a.len();
        let nv = a[0][0].nvars();
        if n == 1 {
            return a[0][0].clone();
        }
        let mut acc = Polynomial::zero(nv);
        for j in 0..n {
            let minor: Vec<Vec<Polynomial>> = a[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect())
                .collect();
            let t = &a[0][j] * &cofactor(&minor);
            acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
        }
        acc
    }

    #[test]
    fn small_cases() {
        let ns = names(&["x", "y"]);
        let p = |s: &str| parse_polynomial(s, &ns).unwrap();
        let id = vec![vec![p("1"), p("0")], vec![p("0"), p("1")]];
        assert_eq!(det_poly_matrix(&id), p("1"));
        let a = vec![vec![p("x"), p("y")], vec![p("y"), p("x")]];
        assert_eq!(det_poly_matrix(&a), p("x^2 - y^2"));
        let z = vec![vec![p("0"), p("x")], vec![p("y"), p("1")]];
        assert_eq!(det_poly_matrix(&z), p("-x*y"));
    }

    #[test]
    fn exact_division() {
        let ns = names(&["x", "y"]);
        let p = |s: &str| parse_polynomial(s, &ns).unwrap();
        assert_eq!(div_exact(&p("x^2 - y^2"), &p("x - y")), Some(p("x + y")));
        assert_eq!(div_exact(&p("x^2 + 1"), &p("x - y")), None);
    }

    #[test]
    fn matches_cofactor_on_structured_matrix() {
        let ns = names(&["x", "y", "z"]);
        let p = |s: &str| parse_polynomial(s, &ns).unwrap();
        let a = vec![
            vec![p("0"), p("x^2 + 1"), p("y")],
            vec![p("z"), p("0"), p("x*y - 2")],
            vec![p("1/2*x"), p("y^2"), p("0")],
        ];
        assert_eq!(det_poly_matrix(&a), cofactor(&a));
    }
}
