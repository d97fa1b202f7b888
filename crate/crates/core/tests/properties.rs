use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use pbergman::distance::{phase_search, projective_distance, wrap_phase};
use pbergman::function_space::{Basis, BasisSpec, CoefFunction, Discretization};
use pbergman::geometry::{build_quadrature, gauss_legendre, quad_integrate, DomainSpec, QuadratureRule};
use pbergman::verify::{check_taylor_inequalities, TAYLOR_TOLERANCE};
use proptest::prelude::*;

fn basis() -> Arc<Basis> {
    static B: OnceLock<Arc<Basis>> = OnceLock::new();
    B.get_or_init(|| {
        Discretization::new(DomainSpec::UnitDisk, BasisSpec::uniform(6), 12, 24)
            .build()
            .unwrap()
    })
    .clone()
}

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn coefs() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(1.0), 7)
}

fn function(c: Vec<Complex64>) -> CoefFunction {
    CoefFunction::new(basis(), c).unwrap()
}

fn rule() -> &'static QuadratureRule {
    static R: OnceLock<QuadratureRule> = OnceLock::new();
    R.get_or_init(|| build_quadrature(&DomainSpec::UnitDisk, 12, 24).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_absolutely_homogeneous(c in coefs(), s in complex(3.0), p in 1.0f64..6.0) {
        let f = function(c);
        let a = f.scaled(s).lp_norm(rule(), p).unwrap();
        let b = s.norm() * f.lp_norm(rule(), p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn norm_satisfies_minkowski(c1 in coefs(), c2 in coefs(), p in 1.0f64..6.0) {
        let (f, g) = (function(c1), function(c2));
        let lhs = f.add(&g).unwrap().lp_norm(rule(), p).unwrap();
        let rhs = f.lp_norm(rule(), p).unwrap() + g.lp_norm(rule(), p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1(n in 1usize..40, k in 0usize..80) {
        prop_assume!(k < 2 * n);
        let (x, w) = gauss_legendre(n);
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        prop_assert!((got - exact).abs() < 1e-13, "n={n} k={k}: {got}");
    }

    #[test]
    fn polar_rule_integrates_monomials(j in 0u32..10, k in 0u32..10) {
        // radial degree j + k + 1 ≤ 2·12 − 1, angular frequency |j − k| < 24
        let values: Vec<Complex64> = rule()
            .nodes()
            .map(|z| z[0].powu(j) * z[0].conj().powu(k))
            .collect();
        let got = quad_integrate(rule(), &values).unwrap();
        let exact = if j == k { PI / (j as f64 + 1.0) } else { 0.0 };
        prop_assert!((got - Complex64::new(exact, 0.0)).norm() < 1e-13, "{got}");
    }

    #[test]
    fn taylor_margins_scale_like_lambda_to_the_p(
        a in complex(2.0),
        b in complex(2.0),
        p in 1.05f64..6.0,
        lambda in 0.1f64..10.0,
    ) {
        let base = check_taylor_inequalities(a, b, p).unwrap();
        let scaled = check_taylor_inequalities(a * lambda, b * lambda, p).unwrap();
        prop_assert_eq!(base.len(), scaled.len());
        let f = lambda.powf(p);
        for (r, s) in base.iter().zip(&scaled) {
            let size = f * r.lhs.abs().max(r.rhs.abs()).max(1e-300);
            prop_assert!((s.margin - f * r.margin).abs() <= 1e-10 * size, "{r:?} {s:?}");
        }
    }

    #[test]
    fn taylor_inequalities_hold(a in complex(3.0), b in complex(3.0), p in 1.01f64..9.0) {
        for r in check_taylor_inequalities(a, b, p).unwrap() {
            prop_assert!(r.margin >= -TAYLOR_TOLERANCE || r.verdict == pbergman::verify::Verdict::Degenerate, "{r:?}");
        }
    }

    #[test]
    fn phase_search_beats_a_fine_exhaustive_grid(
        u in prop::collection::vec(complex(1.0), 1..12),
        seed in prop::collection::vec((complex(1.0), 0.01f64..1.0), 12),
        p in 1.0f64..6.0,
    ) {
        let n = u.len();
        let v: Vec<Complex64> = seed[..n].iter().map(|s| s.0).collect();
        let w: Vec<f64> = seed[..n].iter().map(|s| s.1).collect();
        let found = phase_search(&u, &v, &w, p).unwrap();
        let obj = |t: f64| -> f64 {
            let e = Complex64::from_polar(1.0, t);
            u.iter().zip(&v).zip(&w).map(|((a, b), w)| w * (e * a - b).norm().powf(p)).sum()
        };
        let grid = (0..4096).map(|k| obj(TAU * k as f64 / 4096.0)).fold(f64::INFINITY, f64::min);
        prop_assert!(found.distance <= grid.powf(1.0 / p) + 1e-12, "{} vs {}", found.distance, grid.powf(1.0 / p));
        prop_assert!((obj(found.theta).powf(1.0 / p) - found.distance).abs() < 1e-10);
        prop_assert!(found.theta > -PI && found.theta <= PI);
    }

    #[test]
    fn projective_distance_is_symmetric_and_scale_free(c1 in coefs(), c2 in coefs(), s in complex(3.0), p in 1.0f64..5.0) {
        prop_assume!(s.norm() > 1e-3);
        let (f, g) = (function(c1), function(c2));
        prop_assume!(f.lp_norm(rule(), p).unwrap() > 1e-3 && g.lp_norm(rule(), p).unwrap() > 1e-3);
        let (d, _) = projective_distance(&f, &g, rule(), p).unwrap();
        let (e, _) = projective_distance(&g, &f.scaled(s), rule(), p).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
        prop_assert!((d - e).abs() < 1e-9, "{d} vs {e}");
    }

    #[test]
    fn wrapped_phases_stay_in_range(t in -100.0f64..100.0) {
        let w = wrap_phase(t);
        prop_assert!(w > -PI && w <= PI);
        prop_assert!(((t - w) / TAU - ((t - w) / TAU).round()).abs() < 1e-9);
    }
}
