use std::collections::BTreeSet;

use num_complex::Complex64;
use num_traits::Zero;
use orbitcount::algebra::linalg::rank;
use orbitcount::algebra::*;
use orbitcount::calibration::{random_field, rng_for, sparse_int_poly};
use orbitcount::dynamics::{multiplicity, trajectory_series, Multiplicity, VectorField};
use orbitcount::elimination::*;
use orbitcount::orbit_ideal::{ideal_slice, leading_diagram, staircase_division};
use orbitcount::points::*;
use orbitcount::rationality::*;
use orbitcount::systems::*;
use orbitcount::zerocount::*;
use proptest::prelude::*;
use rand::Rng;

fn g(n: i64) -> GaussianRational {
    GaussianRational::from_int(n)
}

fn gauss() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4).prop_map(|(a, b, c, d)| GaussianRational::new(rat(a, b), rat(c, d)))
}

fn point(n: usize) -> impl Strategy<Value = Vec<GaussianRational>> {
    proptest::collection::vec(gauss(), n)
}

fn planar(seed: u64, delta: u32) -> VectorField {
    random_field(&mut rng_for(seed, 0), 2, delta)
}

fn poly(seed: u64, n: usize, deg: u32) -> Polynomial {
    sparse_int_poly(&mut rng_for(seed, 1), n, 1..=deg, 5, 0.6)
}

/// `P - P(p)`, so that `P(p) = 0`.
fn through(mut q: Polynomial, p: &[GaussianRational]) -> Polynomial {
    let v = q.eval(p).unwrap();
    q.add_term(Monomial::one(q.nvars()), &-v);
    q
}

fn cofactor_det(a: &[Vec<Polynomial>]) -> Polynomial {
    let n = a.len();
    if n == 1 {
        return a[0][0].clone();
    }
    let mut acc = Polynomial::zero(a[0][0].nvars());
    for j in 0..n {
        let minor: Vec<Vec<Polynomial>> =
            a[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| e.clone()).collect()).collect();
        let term = &a[0][j] * &cofactor_det(&minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    // algebra

    #[test]
    fn ball_evaluation_encloses_exact(seed in any::<u64>(), p in point(2)) {
        let q = poly(seed, 2, 4);
        let exact = q.eval(&p).unwrap();
        for prec in [24, 64, 128, 256] {
            let balls = Point::Balls(p.iter().map(|c| CBall::from_gaussian(c, prec)).collect());
            let Value::Ball(b) = evaluate(&q, &balls, prec).unwrap() else { panic!("ball expected") };
            prop_assert!(b.contains_gaussian(&exact), "prec {prec}");
        }
    }

    #[test]
    fn determinant_matches_cofactor_expansion(seed in any::<u64>(), rho in 1usize..=4) {
        let mut rng = rng_for(seed, 0);
        let a: Vec<Vec<Polynomial>> = (0..rho)
            .map(|_| (0..rho).map(|_| sparse_int_poly(&mut rng, 2, 0..=2, 4, 0.5)).collect())
            .collect();
        prop_assert_eq!(det_poly_matrix(&a), cofactor_det(&a));
    }

    // dynamics

    #[test]
    fn trajectory_truncation_is_consistent(seed in any::<u64>(), p in point(2), k in 1usize..10) {
        let xi = planar(seed, 2);
        let long = trajectory_series(&xi, &p, k + 5).unwrap();
        let short = trajectory_series(&xi, &p, k).unwrap();
        prop_assert_eq!(long.truncated(k), short.truncated(k));
    }

    #[test]
    fn multiplicity_is_additive(seed in any::<u64>(), p in point(2)) {
        let xi = planar(seed, 2);
        prop_assume!(!xi.is_singular(&p).unwrap());
        let a = through(poly(seed, 2, 2), &p);
        let b = through(poly(seed ^ 1, 2, 2), &p);
        prop_assume!(!a.is_constant() && !b.is_constant());
        if let (Multiplicity::Finite { order: ma }, Multiplicity::Finite { order: mb }) =
            (multiplicity(&xi, &p, &a).unwrap(), multiplicity(&xi, &p, &b).unwrap())
        {
            prop_assert_eq!(multiplicity(&xi, &p, &(&a * &b)).unwrap(), Multiplicity::Finite { order: ma + mb });
        }
    }

    #[test]
    fn singular_points_give_constant_germs(seed in any::<u64>(), p in point(2)) {
        let base = planar(seed, 1);
        let vanish = Polynomial::from_terms(2, [(Monomial(vec![1, 0]), g(1)), (Monomial::one(2), -p[0].clone())]);
        let xi = VectorField::new(base.components().iter().map(|c| c * &vanish).collect()).unwrap();
        prop_assert!(xi.is_singular(&p).unwrap());
        prop_assert!(trajectory_series(&xi, &p, 6).unwrap().is_constant());
    }

    #[test]
    fn lie_derivative_is_a_derivation(seed in any::<u64>()) {
        let xi = planar(seed, 2);
        let (a, b) = (poly(seed, 2, 3), poly(seed ^ 7, 2, 3));
        let lhs = xi.lie_derivative(&(&a * &b)).unwrap();
        let rhs = &(&xi.lie_derivative(&a).unwrap() * &b) + &(&a * &xi.lie_derivative(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    // rationality

    #[test]
    fn pade_solutions_verify(coeffs in proptest::collection::vec(-9i64..=9, 4..14), d in 0usize..4) {
        let f = TaylorPrefix::from_ints(&coeffs).unwrap();
        let n = f.len();
        prop_assume!(n > d);
        if let Some(pair) = pade_solve(&f, d, n).unwrap() {
            let fs = Series::new(f.coeffs().to_vec());
            let q = Series::new((0..n).map(|k| pair.q.coeff(k)).collect());
            let prod = fs.mul(&q);
            for k in 0..n {
                prop_assert_eq!(prod.coeff(k), pair.p.coeff(k), "coefficient {}", k);
            }
        }
    }

    #[test]
    fn rationality_is_monotone(coeffs in proptest::collection::vec(-9i64..=9, 6..14), d in 0usize..4) {
        let f = TaylorPrefix::from_ints(&coeffs).unwrap();
        let n = f.len();
        prop_assume!(n > d + 1);
        if rationality_conditions(&f, d, n).unwrap() {
            prop_assert!(rationality_conditions(&f, d + 1, n).unwrap());
        }
    }

    #[test]
    fn reconstruction_is_minimal_and_unique(
        p in proptest::collection::vec(-5i64..=5, 1..=3),
        q in proptest::collection::vec(-5i64..=5, 1..=3),
    ) {
        let (p, mut q) = (UPoly::from_ints(&p), UPoly::from_ints(&q));
        prop_assume!(!p.is_zero());
        if q.coeff(0).is_zero() {
            q = q.add(&UPoly::one());
        }
        let f = TaylorPrefix::of_rational(&p, &q, 14).unwrap();
        let (d, r) = minimal_degree(&f, 3).unwrap().expect("degree <= 2 data reconstructs");
        prop_assert!(d <= 2);
        if d > 0 {
            prop_assert!(reconstruct(&f, d - 1).unwrap().found().is_none());
        }
        // same series as the generating fraction
        let back = TaylorPrefix::of_rational(&r.p, &r.q, 14).unwrap();
        prop_assert_eq!(back.coeffs(), f.coeffs());
        let later = reconstruct_at(&f, d, 3 * d + 3).unwrap();
        prop_assert_eq!(later.found(), Some(&r));
    }

    // points

    #[test]
    fn heights_ignore_the_representative(a in -50i64..=50, b in 1i64..=50, k in 1i64..=20) {
        prop_assert_eq!(height_of(&rat(a * k, b * k)), height_of(&rat(a, b)));
        prop_assert_eq!(height_of(&rat(-a * k, -b * k)), height_of(&rat(a, b)));
    }

    #[test]
    fn curve_degree_matches_rank_oracle(pts in proptest::collection::vec((-6i64..=6, -6i64..=6), 1..=12)) {
        let set: BTreeSet<(i64, i64)> = pts.into_iter().collect();
        let pts: Vec<(GaussianRational, GaussianRational)> = set.iter().map(|&(x, y)| (g(x), g(y))).collect();
        let fit = minimal_curve_degree(&pts).unwrap();
        let oracle = (0u32..=4).find(|&d| {
            let (monos, rows) = monomial_matrix(&pts, d);
            rank(&rows) < monos.len()
        });
        prop_assert_eq!(Some(fit.degree), oracle);
        let curve = fit.poly.unwrap();
        for (x, y) in &pts {
            prop_assert!(curve.eval(&[x.clone(), y.clone()]).unwrap().is_zero());
        }
    }

    // elimination

    #[test]
    fn projective_distance_axioms(
        w in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3),
        v in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3),
        s in (0.1f64..10.0, -3.0f64..3.0),
    ) {
        let w: Vec<Complex64> = w.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let v: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        prop_assume!(w.iter().any(|c| c.norm() > 0.1) && v.iter().any(|c| c.norm() > 0.1));
        let scale = Complex64::from_polar(s.0, s.1);
        let ws: Vec<Complex64> = w.iter().map(|c| c * scale).collect();
        let d = projective_distance(&w, &v).unwrap();
        prop_assert!((d - projective_distance(&v, &w).unwrap()).abs() < 1e-12);
        prop_assert!((d - projective_distance(&ws, &v).unwrap()).abs() < 1e-9);
        prop_assert!(projective_distance(&w, &ws).unwrap() < 1e-9);
    }

    // systems

    #[test]
    fn invariant_curves_and_first_integrals_hold(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3,
                                                 d in -3i64..=3, e in -3i64..=3, f in -3i64..=3) {
        let xi = VectorField::parse(
            &["x", "y"],
            &[&format!("x*({a} + {b}*x + {c}*y)"), &format!("y*({d} + {e}*x + {f}*y)")],
        )
        .unwrap();
        let s = darboux_curves(&xi, 2).unwrap();
        for cv in &s.curves {
            prop_assert_eq!(xi.lie_derivative(&cv.f).unwrap(), &cv.cofactor * &cv.f);
        }
        let integral = if s.curves.is_empty() { None } else { first_integral_from_curves(&xi, &s.curves).unwrap() };
        if let Some(fi) = integral {
            let (n, dd) = (&fi.numerator, &fi.denominator);
            let w = &(&xi.lie_derivative(n).unwrap() * dd) - &(n * &xi.lie_derivative(dd).unwrap());
            prop_assert!(w.is_zero() && fi.verified);
        }
    }

    #[test]
    fn schwarzian_kills_mobius(a in gauss(), b in gauss(), c in gauss(), d in gauss()) {
        prop_assume!(!d.is_zero() && &a * &d != &b * &c);
        let pad = |v: Vec<GaussianRational>| {
            let mut v = v;
            v.resize(12, g(0));
            Series::new(v)
        };
        let f = pad(vec![b, a]).div(&pad(vec![d, c])).unwrap();
        prop_assert!(schwarzian(&f).unwrap().is_zero_to_order());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn slices_grow_with_degree_and_vanish_on_the_orbit(seed in any::<u64>(), p in point(2)) {
        let xi = planar(seed, 2);
        prop_assume!(!xi.is_singular(&p).unwrap());
        let s1 = ideal_slice(&xi, &p, 1).unwrap();
        let s2 = ideal_slice(&xi, &p, 2).unwrap();
        for q in &s1.basis {
            prop_assert!(s2.contains(q));
            for v in 0..2 {
                let mut e = vec![0, 0];
                e[v] = 1;
                prop_assert!(s2.contains(&q.mul_monomial(&Monomial(e))));
            }
        }
        for q in &s2.basis {
            let s = trajectory_series(&xi, &p, s2.nu as usize).unwrap().compose(q).unwrap();
            prop_assert!(s.coeffs.iter().all(|c| c.is_zero()));
        }
        // rho counts the residues, which is the monomial count minus the slice dimension
        let diagram = leading_diagram(&s2);
        prop_assert_eq!(diagram.rho(2), Monomial::all_up_to_degree(2, 2).len() - s2.basis.len());
        let r = staircase_division(&poly(seed, 2, 2), &s2).unwrap().0;
        prop_assert_eq!(staircase_division(&r, &s2).unwrap().0, r);
    }

    #[test]
    fn minor_strategies_agree(seed in any::<u64>(), p in point(2), q in point(2)) {
        let xi = planar(seed, 2);
        prop_assume!(!xi.is_singular(&p).unwrap() && !xi.is_singular(&q).unwrap());
        let diagram = leading_diagram(&ideal_slice(&xi, &p, 1).unwrap());
        let m = build_elimination_matrix(&xi, &diagram, 1, diagram.rho(1) + 2).unwrap();
        let a = m.at_point(&Point::Exact(q), 128).unwrap();
        let exhaustive = max_minor_at_point(&a, MinorStrategy::Exhaustive, 128);
        let greedy = max_minor_at_point(&a, MinorStrategy::Greedy { restarts: 8, seed }, 128);
        prop_assert_eq!(exhaustive.certificate().is_some(), greedy.certificate().is_some());
    }

    #[test]
    fn linear_systems_have_polar_singular_locus(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let n = rng.gen_range(1..=2);
        let entry = |rng: &mut rand_chacha::ChaCha8Rng| match rng.gen_range(0..4) {
            0 => "0".to_string(),
            1 => format!("{} + {}*t", rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
            2 => format!("{}/(t - {})", rng.gen_range(1..=3), rng.gen_range(-2..=2)),
            _ => format!("1/(t^2 + {})", rng.gen_range(1..=2) * rng.gen_range(1..=2)),
        };
        let rows: Vec<Vec<String>> = (0..n).map(|_| (0..n).map(|_| entry(&mut rng)).collect()).collect();
        match linear_system_field(&RationalMatrixODE::parse(&rows).unwrap()) {
            Ok(ls) => prop_assert!(ls.sing_agrees, "{rows:?}"),
            // t^2 + 2 has no Gaussian-rational roots
            Err(orbitcount::Error::Unsupported(_)) => prop_assert!(rows.iter().flatten().any(|e| e.contains("+ 2)"))),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn j_field_trajectories_solve_the_schwarzian_equation(p in point(4)) {
        let xi = jfunction_field();
        prop_assume!(!xi.is_singular(&p).unwrap());
        let res = j_residuals(&xi, &[], &p, 10).unwrap();
        prop_assert!(res.iter().all(|r| r.vanishes), "{res:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    /// Polynomials in `t = z` with known roots: the count is the number of roots
    /// inside, unchanged by the unit `e^z`, stable at twice the precision,
    /// below the Jensen bound, and matched by isolated root clusters.
    #[test]
    fn zero_counts_on_known_roots(roots in proptest::collection::vec((-8i64..=8, -8i64..=8), 1..=3)) {
        let roots: Vec<GaussianRational> =
            roots.into_iter().map(|(a, b)| GaussianRational::new(rat(a, 4), rat(b, 4))).collect();
        prop_assume!(roots.iter().all(|r| (r.abs_f64() - 1.0).abs() > 0.2));
        let xi = VectorField::parse(&["t", "y"], &["1", "y"]).unwrap();
        let t = Polynomial::var(2, 0);
        let mut f = Polynomial::one(2);
        for r in &roots {
            f = &f * &(&t - &Polynomial::constant(2, r.clone()));
        }
        let inside = roots.iter().filter(|r| r.abs_f64() < 1.0).count() as u64;
        let p = [g(0), g(1)];
        let unit = &f * &Polynomial::var(2, 1);
        for q in [f, unit] {
            let df = DiscFunction::from_point(&xi, &p, q).unwrap();
            let c = count_zeros(&df, 128).unwrap();
            prop_assert!(c.certified);
            prop_assert_eq!(c.count, inside);
            prop_assert_eq!(count_zeros(&df, 256).unwrap().count, inside);
            prop_assert!(c.count as f64 <= jensen_bound(&df, df.r, 128).unwrap().bound);
            let iso = isolate_roots(&df, &c).unwrap();
            prop_assert!(iso.consistent);
        }
    }
}

#[test]
fn census_grows_with_height_and_lies_on_kernel_curves() {
    let field = VectorField::parse(&["t", "y"], &["1", "2*t"]).unwrap();
    let f1 = DiscFunction::from_point(&field, &[g(0), g(0)], Polynomial::var(2, 0)).unwrap();
    let f2 = DiscFunction::new(f1.trajectory.clone(), Polynomial::var(2, 1)).unwrap();
    let small = census(&f1, &f2, 3, 128).unwrap();
    let big = census(&f1, &f2, 12, 128).unwrap();
    let key = |c: &PointCensus| -> BTreeSet<(String, String)> { c.points.iter().map(|p| (p.x.clone(), p.y.clone())).collect() };
    assert!(key(&small).is_subset(&key(&big)));
    assert_eq!(big.restrict(3).points.len(), small.points.len());
    let pairs = big.member_pairs().unwrap();
    let pts: Vec<_> = pairs
        .iter()
        .map(|(x, y)| (GaussianRational::from_rational(x.clone()), GaussianRational::from_rational(y.clone())))
        .collect();
    let curve = minimal_curve_degree(&pts).unwrap().poly.unwrap();
    for (x, y) in &pts {
        assert!(curve.eval(&[x.clone(), y.clone()]).unwrap().is_zero());
    }
}
