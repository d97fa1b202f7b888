//! Scalar Taylor-type inequalities, the two-sided distance bound and the
//! sharpened extremal bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quad1d::integrate_split;
use super::report::{Params, VerificationReport};
use crate::distance::{phase_search, Workspace};
use crate::error::{param, Result};
use crate::function_space::{discrete_lp_norm, pow_half, CoefFunction};
use crate::geometry::Point;
use crate::minimizer::check_exponent;

/// Margin tolerance of the integrated inequalities.
pub const INEQUALITY_TOLERANCE: f64 = 1e-6;
/// Margin tolerance of the scalar inequalities.
pub const TAYLOR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixConstants {
    pub p: f64,
    /// Lower constant, `p·min(I1, I2)`.
    pub c_p: f64,
    /// Upper constant, `p(p−1)·3^{(p−2)/p}/2`.
    #[serde(rename = "C_p")]
    pub big_c_p: f64,
    /// `∫₀^{1/4} (1−t)(1/2−t)^{p−2} dt`.
    pub i1: f64,
    /// `∫_{3/4}^1 (1−t)(t−1/2)^{p−2} dt`.
    pub i2: f64,
}

/// Constants of the two-sided bound `c_p d^p ≤ 1 − |f(z)|/K_p(z)^{1/p} ≤ C_p d²`.
pub fn appendix_constants(p: f64) -> Result<AppendixConstants> {
    if !(p > 2.0) || !p.is_finite() {
        return param(format!("c_p and C_p need p > 2, got {p}"));
    }
    let e = p - 2.0;
    let i1 = integrate_split(|t| (1.0 - t) * (0.5 - t).powf(e), &[0.0, 0.25], 1e-15, 1e-14).value;
    let i2 = integrate_split(|t| (1.0 - t) * (t - 0.5).powf(e), &[0.75, 1.0], 1e-15, 1e-14).value;
    Ok(AppendixConstants {
        p,
        c_p: p * i1.min(i2),
        big_c_p: p * (p - 1.0) * 3f64.powf(e / p) / 2.0,
        i1,
        i2,
    })
}

/// `|a|^{p−2} ā`, continuously extended by 0 at `a = 0`.
fn dual(a: Complex64, p: f64) -> Complex64 {
    if a == Complex64::new(0.0, 0.0) {
        a
    } else {
        a.conj() * pow_half(a.norm_sqr(), p - 2.0)
    }
}

/// `|b−a|² ∫₀¹ (1−t)|a + t(b−a)|^{p−2} dt`, split where `|a + t(b−a)|` is smallest.
pub fn taylor_remainder(a: Complex64, b: Complex64, p: f64) -> f64 {
    let d = b - a;
    let dd = d.norm_sqr();
    if dd == 0.0 {
        return 0.0;
    }
    let ts = (-(a.conj() * d).re / dd).clamp(0.0, 1.0);
    // u = t − t*, so a near-zero of the path sits at u = 0 where floats are dense
    let c0 = a + d * ts;
    let g = |u: f64| (1.0 - ts - u) * pow_half((c0 + d * u).norm_sqr(), p - 2.0);
    let scale = pow_half(a.norm_sqr().max(b.norm_sqr()), p - 2.0).max(1e-300);
    let r = integrate_split(g, &[-ts, 0.0, 1.0 - ts], 1e-16 * scale, 1e-14);
    dd * r.value
}

/// Lower and upper first-order expansions of `|·|^p` with integral remainder,
/// plus `|b−a|^p ≤ 2^{p−1}[...]` for `p ≥ 2` or
/// `(p−1)|b−a|²(|a|+|b|)^{p−2} ≤ [...]` for `1 < p < 2`.
pub fn check_taylor_inequalities(a: Complex64, b: Complex64, p: f64) -> Result<Vec<VerificationReport>> {
    check_exponent(p)?;
    let params = || {
        Params::new(p)
            .with("a_re", a.re)
            .with("a_im", a.im)
            .with("b_re", b.re)
            .with("b_im", b.im)
    };
    let ap = pow_half(a.norm_sqr(), p);
    let bp = pow_half(b.norm_sqr(), p);
    let linear = p * (dual(a, p) * (b - a)).re;
    let j = taylor_remainder(a, b, p);
    let tol = TAYLOR_TOLERANCE;
    let mut out = vec![
        VerificationReport::new("taylor-lower", params(), ap + linear + p * (p - 1.0).min(1.0) * j, bp, tol),
        VerificationReport::new("taylor-upper", params(), bp, ap + linear + p * (p - 1.0).max(1.0) * j, tol),
    ];
    let bracket = bp + ap - (dual(b, p) * a + dual(a, p) * b).re;
    let diff = b - a;
    if p >= 2.0 {
        let lhs = pow_half(diff.norm_sqr(), p);
        out.push(VerificationReport::new("taylor-gap-upper", params(), lhs, 2f64.powf(p - 1.0) * bracket, tol));
    } else if p > 1.0 {
        let s = a.norm() + b.norm();
        if s == 0.0 {
            out.push(VerificationReport::degenerate("taylor-gap-lower", params()));
        } else {
            let lhs = (p - 1.0) * diff.norm_sqr() * s.powf(p - 2.0);
            out.push(VerificationReport::new("taylor-gap-lower", params(), lhs, bracket, tol));
        }
    }
    Ok(out)
}

/// Both sides of `c_p d([m_p(·,z)],[f])^p ≤ 1 − |f(z)| m_p(z) ≤ C_p d([m_p(·,z)],[f])²`
/// for `f` of unit norm on the workspace rule.
pub fn check_main_inequality(ws: &Workspace, p: f64, z: &Point, f: &CoefFunction) -> Result<Vec<VerificationReport>> {
    let k = appendix_constants(p)?;
    let rule = ws.rule();
    let fv = f.values_on(rule)?;
    let norm = discrete_lp_norm(&fv, rule.weights(), p);
    if (norm - 1.0).abs() > 1e-8 {
        return param(format!("f must have unit p-norm, got {norm}"));
    }
    let sol = ws.minimizer(p, z)?;
    let d = phase_search(&sol.normalized_values(), &fv, rule.weights(), p)?.distance;
    let middle = 1.0 - f.eval(z)?.norm() * sol.m_value;
    let params = || {
        Params::new(p)
            .points([z.clone()])
            .domain(ws.basis().domain())
            .with("d", d)
    };
    Ok(vec![
        VerificationReport::new("main-inequality-lower", params(), k.c_p * d.powf(p), middle, INEQUALITY_TOLERANCE),
        VerificationReport::new("main-inequality-upper", params(), middle, k.big_c_p * d * d, INEQUALITY_TOLERANCE),
    ])
}

/// `|m_p(z,w)| ≤ (m_p(w)/m_p(z))·[1 − ρ_p(z,w)^p/(p·4^{p+3})]`.
pub fn check_application_inequality(ws: &Workspace, p: f64, z: &Point, w: &Point) -> Result<VerificationReport> {
    if !(p > 2.0) {
        return param(format!("the sharpened bound needs p > 2, got {p}"));
    }
    let sz = ws.minimizer(p, z)?;
    let sw = ws.minimizer(p, w)?;
    let rho = ws.distance(p, z, w)?.rho;
    let lhs = sw.minimizer.eval(z)?.norm();
    let rhs = sw.m_value / sz.m_value * (1.0 - rho.powf(p) / (p * 4f64.powf(p + 3.0)));
    let params = Params::new(p)
        .points([z.clone(), w.clone()])
        .domain(ws.basis().domain())
        .with("rho", rho);
    Ok(VerificationReport::new("application-inequality", params, lhs, rhs, INEQUALITY_TOLERANCE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::report::Verdict;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // antiderivatives after u = 1/2 − t and s = t − 1/2
    fn exact(p: f64) -> (f64, f64) {
        let f1 = |u: f64| u.powf(p - 1.0) / (2.0 * (p - 1.0)) + u.powf(p) / p;
        let f2 = |s: f64| s.powf(p - 1.0) / (2.0 * (p - 1.0)) - s.powf(p) / p;
        (f1(0.5) - f1(0.25), f2(0.5) - f2(0.25))
    }

    #[test]
    fn constants_match_antiderivatives() {
        for p in [2.1, 2.5, 3.0, 4.0, 7.3, 10.0] {
            let k = appendix_constants(p).unwrap();
            let (i1, i2) = exact(p);
            assert!((k.i1 - i1).abs() < 1e-13, "p={p}");
            assert!((k.i2 - i2).abs() < 1e-13, "p={p}");
        }
        let k = appendix_constants(4.0).unwrap();
        assert!((k.i1 - 0.0328776).abs() < 1e-7);
        assert!((k.i2 - 0.0035807).abs() < 1e-7);
        assert!((k.big_c_p - 6.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((appendix_constants(3.0).unwrap().i2 - 1.0 / 96.0).abs() < 1e-14);
        assert!(appendix_constants(2.0).is_err());
    }

    #[test]
    fn equal_arguments_are_tight() {
        for p in [1.5, 2.0, 3.0] {
            for r in check_taylor_inequalities(c(0.4, -0.3), c(0.4, -0.3), p).unwrap() {
                if r.check.starts_with("taylor-lower") || r.check.starts_with("taylor-upper") {
                    assert!(r.margin.abs() < 1e-14, "{r:?}");
                }
                assert!(r.passed());
            }
        }
    }

    #[test]
    fn worked_example_at_p4() {
        // a = 1, b = −1: remainder 4∫(1−t)(1−2t)² dt = 4·(1/6)
        assert!((taylor_remainder(c(1.0, 0.0), c(-1.0, 0.0), 4.0) - 4.0 / 6.0).abs() < 1e-14);
        let rs = check_taylor_inequalities(c(1.0, 0.0), c(-1.0, 0.0), 4.0).unwrap();
        assert!(rs.iter().all(|r| r.verdict == Verdict::Pass));
        // 1 ≥ 1 − 8 + 4·(2/3)
        assert!((rs[0].lhs - (1.0 - 8.0 + 8.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn collinear_through_zero_for_small_p() {
        let rs = check_taylor_inequalities(c(0.5, 0.0), c(-1.5, 0.0), 1.5).unwrap();
        assert!(rs.iter().all(|r| r.passed()), "{rs:?}");
        // 4∫₀¹(1−t)|0.5 − 2t|^{-1/2} dt with u = |0.5 − 2t| on each side of t = 1/4
        let left = 0.5 * (1.5 * 0.5f64.sqrt() + 0.5f64.powf(1.5) / 3.0);
        let right = 0.5 * (1.5 * 1.5f64.sqrt() - 1.5f64.powf(1.5) / 3.0);
        let exact = 4.0 * (left + right);
        assert!((taylor_remainder(c(0.5, 0.0), c(-1.5, 0.0), 1.5) - exact).abs() < 1e-10);
    }

    #[test]
    fn degenerate_gap_at_origin() {
        let rs = check_taylor_inequalities(c(0.0, 0.0), c(0.0, 0.0), 1.5).unwrap();
        assert_eq!(rs.last().unwrap().verdict, Verdict::Degenerate);
    }
}
