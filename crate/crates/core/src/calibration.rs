//! Seeded batteries that measure the smallest constant each `O(.)` inequality
//! needs. The values in [`crate::constants`] were set from these runs.

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::det::det_poly_matrix;
use crate::algebra::gaussian::{rat, GaussianRational};
use crate::algebra::linalg::rank;
use crate::algebra::height::{height, log_abs, log_plus, point_norm};
use crate::algebra::monomial::Monomial;
use crate::algebra::parse::{names, parse_polynomial};
use crate::algebra::polynomial::Polynomial;
use crate::dynamics::VectorField;
use crate::elimination::{
    build_elimination_matrix, lojasiewicz_check, universal_lower_bound, LojasOptions, LowerBoundOutcome,
    MinorStrategy,
};
use crate::error::Result;
use crate::orbit_ideal::{ideal_slice, leading_diagram, nu};

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Fit {
    pub name: &'static str,
    pub seed: u64,
    pub instances: usize,
    /// Smallest constant for which every instance satisfies the inequality.
    pub required: f64,
}

fn fit(name: &'static str, seed: u64, needs: Vec<Option<f64>>) -> Fit {
    let used: Vec<f64> = needs.into_iter().flatten().collect();
    Fit { name, seed, instances: used.len(), required: used.iter().copied().fold(f64::NEG_INFINITY, f64::max) }
}

/// Instance `i` of a battery gets its own stream, so results do not depend on scheduling.
pub fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ i as u64)
}

/// Random integer polynomial of exact degree drawn from `degrees`, each
/// monomial present with probability `density`.
pub fn sparse_int_poly(
    rng: &mut impl Rng,
    nvars: usize,
    degrees: std::ops::RangeInclusive<u32>,
    coeff: i64,
    density: f64,
) -> Polynomial {
    let d = rng.gen_range(degrees);
    loop {
        let p = Polynomial::from_terms(
            nvars,
            Monomial::all_up_to_degree(nvars, d)
                .into_iter()
                .filter_map(|m| {
                    let keep = rng.gen_bool(density);
                    keep.then(|| (m, GaussianRational::from_int(rng.gen_range(-coeff..=coeff))))
                }),
        );
        if !p.is_zero() && p.degree() == d {
            return p;
        }
    }
}

/// `h(P1 ... Ps) <= sum h(Pi) + c deg P`: n <= 3, s <= 3, factor degrees <= 4.
pub fn fit_height_prod(seed: u64, count: usize) -> Result<Fit> {
    let needs = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let n = rng.gen_range(1..=3);
            let s = rng.gen_range(2..=3);
            let density = rng.gen_range(0.3..1.0);
            let fs: Vec<Polynomial> =
                (0..s).map(|_| sparse_int_poly(&mut rng, n, 1..=4, 9, density)).collect();
            let p = fs.iter().skip(1).fold(fs[0].clone(), |a, f| &a * f);
            let sum: f64 = fs.iter().map(|f| height(f)).sum::<Result<f64>>()?;
            Ok(Some((height(&p)? - sum) / p.degree() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit("height_prod", seed, needs))
}

pub fn random_field(rng: &mut impl Rng, n: usize, delta: u32) -> VectorField {
    loop {
        let comps: Vec<Polynomial> =
            (0..n).map(|_| sparse_int_poly(rng, n, 0..=delta, 3, 0.5)).collect();
        if let Ok(f) = VectorField::new(comps) {
            return f;
        }
    }
}

/// `h(xi^k P) <= h(P) + c (deg P + k log(deg P + k))`: n <= 3, delta <= 2 with
/// coefficients in [-3, 3], deg P <= 3, k <= 6.
pub fn fit_xi_height(seed: u64, count: usize) -> Result<Fit> {
    let needs = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let n = rng.gen_range(1..=3);
            let xi = random_field(&mut rng, n, 2);
            let p = sparse_int_poly(&mut rng, n, 1..=3, 9, 0.7);
            let k = rng.gen_range(1..=6u32);
            let mut q = p.clone();
            for _ in 0..k {
                q = xi.lie_derivative(&q)?;
            }
            if q.is_zero() {
                return Ok(None);
            }
            let dp = p.degree() as f64;
            let scale = dp + k as f64 * (dp + k as f64).ln();
            Ok(Some((height(&q)? - height(&p)?) / scale))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit("xi_height", seed, needs))
}

/// `h(det A) <= rho h + c rho d`: rho <= 4, n <= 2, entry degrees <= 2.
pub fn fit_height_det(seed: u64, count: usize) -> Result<Fit> {
    let needs = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let rho = rng.gen_range(2..=4usize);
            let n = rng.gen_range(1..=2);
            let a: Vec<Vec<Polynomial>> = (0..rho)
                .map(|_| (0..rho).map(|_| sparse_int_poly(&mut rng, n, 0..=2, 9, 0.6)).collect())
                .collect();
            let m = det_poly_matrix(&a);
            if m.is_zero() {
                return Ok(None);
            }
            let h = a.iter().flatten().map(height).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
            let d = a.iter().flatten().map(Polynomial::degree).max().unwrap_or(0).max(1) as f64;
            let r = rho as f64;
            Ok(Some((height(&m)? - r * h) / (r * d)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit("height_det", seed, needs))
}

/// `log |P(p)| <= n log d + h(P) + d log+ ||p|| + c`: n <= 3, d <= 5,
/// Gaussian-rational points with norms spread over roughly [0.05, 20].
pub fn fit_poly_eval(seed: u64, count: usize) -> Result<Fit> {
    let needs = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let n = rng.gen_range(1..=3);
            let d = rng.gen_range(1..=5u32);
            let density = rng.gen_range(0.3..1.0);
            let p = sparse_int_poly(&mut rng, n, d..=d, 9, density);
            let scale = rng.gen_range(1..=20i64);
            let den = rng.gen_range(1..=20i64);
            let pt: Vec<GaussianRational> = (0..n)
                .map(|_| {
                    GaussianRational::new(
                        rat(rng.gen_range(-scale..=scale), den),
                        rat(rng.gen_range(-scale..=scale), den),
                    )
                })
                .collect();
            let v = p.eval(&pt)?;
            if v.is_zero() {
                return Ok(None);
            }
            let rhs = n as f64 * (d as f64).ln() + height(&p)? + d as f64 * log_plus(point_norm(&pt));
            Ok(Some(log_abs(&v) - rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit("poly_eval", seed, needs))
}

/// Fields used for the minor batteries: the exponential system, the parabola
/// (an algebraic orbit, kappa = 1) and a product system.
fn minor_fields() -> Vec<(VectorField, Vec<i64>)> {
    vec![
        (VectorField::parse(&["t", "y"], &["1", "y"]).unwrap(), vec![0, 1]),
        (VectorField::parse(&["t", "y"], &["1", "2*t"]).unwrap(), vec![0, 0]),
        (VectorField::parse(&["x", "y"], &["x", "2*y"]).unwrap(), vec![1, 1]),
    ]
}

/// `deg M <= c d^kappa mu` and `h(M) <= c d^kappa mu log mu` for top minors `M`
/// of the elimination matrix, d <= 2, random column choices. Returns the two fits.
pub fn fit_minor_deg_height(seed: u64, count: usize) -> Result<(Fit, Fit)> {
    let fields = minor_fields();
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let (field, base) = &fields[i % fields.len()];
            let p: Vec<GaussianRational> = base.iter().map(|&v| GaussianRational::from_int(v)).collect();
            let d = rng.gen_range(1..=2u32);
            let diagram = leading_diagram(&ideal_slice(field, &p, d)?);
            let rho = diagram.rho(d);
            let mu = (nu(field, d) as usize).max(rho + 1) + rng.gen_range(0..=2);
            let em = build_elimination_matrix(field, &diagram, d, mu)?;
            // random column order, greedily keeping columns independent at a random point
            let mut order: Vec<usize> = (0..=mu).collect();
            for j in (1..order.len()).rev() {
                order.swap(j, rng.gen_range(0..=j));
            }
            let q: Vec<GaussianRational> =
                (0..field.dim()).map(|_| GaussianRational::from_rational(rat(rng.gen_range(-9..=9), 7))).collect();
            let vals: Vec<Vec<GaussianRational>> =
                em.entries.iter().map(|r| r.iter().map(|e| e.eval(&q)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
            let mut cols: Vec<usize> = Vec::new();
            for c in order {
                let mut trial = cols.clone();
                trial.push(c);
                let sub: Vec<Vec<GaussianRational>> =
                    vals.iter().map(|r| trial.iter().map(|&j| r[j].clone()).collect()).collect();
                if rank(&sub) == trial.len() {
                    cols = trial;
                    if cols.len() == rho {
                        break;
                    }
                }
            }
            if cols.len() < rho {
                return Ok(None);
            }
            cols.sort_unstable();
            let sub: Vec<Vec<Polynomial>> =
                em.entries.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
            let m = det_poly_matrix(&sub);
            if m.is_zero() {
                return Ok(None);
            }
            let muf = mu as f64;
            let dk = (d as f64).powi(em.context.kappa as i32);
            Ok(Some((m.degree() as f64 / (dk * muf), height(&m)? / (dk * muf * muf.ln()))))
        })
        .collect::<Result<Vec<_>>>()?;
    let deg = rows.iter().map(|r| r.map(|x| x.0)).collect();
    let h = rows.iter().map(|r| r.map(|x| x.1)).collect();
    Ok((fit("minor_deg", seed, deg), fit("minor_height", seed, h)))
}

/// Lower bound `max_k log|xi^k P(p)| >= log||P|| + log eps - c env` along the
/// exponential system at random nonsingular points, random P with deg P <= d <= 2.
pub fn fit_minor_v_abs(seed: u64, count: usize) -> Result<Fit> {
    let field = VectorField::parse(&["t", "y"], &["1", "y"]).unwrap();
    let needs = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let d = rng.gen_range(1..=2u32);
            let p = vec![
                GaussianRational::new(rat(rng.gen_range(-6..=6), rng.gen_range(1..=4)), rat(0, 1)),
                GaussianRational::new(rat(rng.gen_range(1..=6), rng.gen_range(1..=4)), rat(rng.gen_range(-2..=2), 3)),
            ];
            let poly = sparse_int_poly(&mut rng, 2, 1..=d, 5, 0.8);
            match universal_lower_bound(&field, &p, &poly, d, None, MinorStrategy::default())? {
                LowerBoundOutcome::Certified(r) => Ok(Some(r.bound.needed)),
                LowerBoundOutcome::Degenerate { .. } => Ok(None),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit("minor_v_abs", seed, needs))
}

/// The fixed 20-instance Lojasiewicz battery: the circle/line example, a
/// tangential pair, and 18 seeded pairs of planar polynomials with d <= 3 that
/// share a rational zero `z0`, evaluated at `z0` plus a perturbation of size
/// `10^-k` (k <= 4).
pub fn lojas_battery() -> Vec<(Vec<Polynomial>, Vec<Complex64>)> {
    let ns = names(&["x", "y"]);
    let parse = |s: &str| parse_polynomial(s, &ns).unwrap();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut out = vec![
        (vec![parse("x^2 + y^2 - 1"), parse("x - y")], vec![c(1.0, 0.0), c(0.0, 0.0)]),
        (vec![parse("y - x^2"), parse("y")], vec![c(1e-2, 0.0), c(0.0, 1e-3)]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    while out.len() < 20 {
        let z0 = [
            GaussianRational::from_rational(rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))),
            GaussianRational::from_rational(rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))),
        ];
        let through_z0 = |rng: &mut ChaCha8Rng| loop {
            let f = sparse_int_poly(rng, 2, 1..=3, 4, 0.7);
            let g = &f - &Polynomial::constant(2, f.eval(&z0).unwrap());
            if g.degree() >= 1 {
                return g.clear_denominators();
            }
        };
        let (a, b) = (through_z0(&mut rng), through_z0(&mut rng));
        let step = 10f64.powi(-rng.gen_range(1..=4));
        let f64_of = |g: &GaussianRational| crate::algebra::gaussian::rational_to_f64(&g.re);
        let p = vec![
            c(f64_of(&z0[0]) + step * rng.gen_range(-1.0..1.0), step * rng.gen_range(-1.0..1.0)),
            c(f64_of(&z0[1]) + step * rng.gen_range(-1.0..1.0), step * rng.gen_range(-1.0..1.0)),
        ];
        out.push((vec![a, b], p));
    }
    out
}

/// One constant for the whole battery; `seed` drives the zero search.
pub fn fit_lojas(seed: u64) -> Result<Fit> {
    let needs = lojas_battery()
        .par_iter()
        .map(|(polys, p)| {
            let r = lojasiewicz_check(polys, p, LojasOptions { seed, ..LojasOptions::default() })?;
            Ok(r.needed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit("lojasiewicz", seed, needs))
}
