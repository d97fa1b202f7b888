//! Checks built on solved minimizers: disk oracles, invariance, local Hölder
//! bounds, boundary ratios, continuity in p, metric axioms and product bounds.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::report::{Params, VerificationReport};
use crate::distance::{skw_distance_p2_oracle, Workspace};
use crate::error::{param, Result};
use crate::function_space::CoefFunction;
use crate::geometry::{DomainSpec, Point};
use crate::minimizer::{check_exponent, disk_closed_form, disk_closed_form_mass, reproducing_residual};

fn require_disk(ws: &Workspace) -> Result<()> {
    if ws.basis().domain() != &DomainSpec::UnitDisk {
        return param("this check is only available on the unit disk");
    }
    Ok(())
}

fn scalar(z: &Point) -> Result<Complex64> {
    match z.coords() {
        [c] => Ok(*c),
        _ => param("expected a point of the unit disk"),
    }
}

/// Minimizer at `w` against `[(1−|w|²)/(1−ζw̄)]^{4/p}` at each probe (relative error).
pub fn check_disk_minimizer(ws: &Workspace, p: f64, w: &Point, probes: &[Point], tol: f64) -> Result<Vec<VerificationReport>> {
    require_disk(ws)?;
    let wc = scalar(w)?;
    let sol = ws.minimizer(p, w)?;
    probes
        .iter()
        .map(|z| {
            let exact = disk_closed_form(scalar(z)?, wc, p);
            let got = sol.minimizer.eval(z)?;
            let params = Params::new(p).points([w.clone(), z.clone()]);
            Ok(VerificationReport::new("disk-minimizer", params, (got - exact).norm() / exact.norm(), 0.0, tol))
        })
        .collect()
}

/// `m_p(w)` against `[π(1−|w|²)²]^{1/p}`, and its distance from `[π(1−|w|²)]^{1/p}`.
pub fn check_disk_mass(ws: &Workspace, p: f64, w: &Point, tol: f64, min_discrepancy: f64) -> Result<Vec<VerificationReport>> {
    require_disk(ws)?;
    let wc = scalar(w)?;
    let m = ws.minimizer(p, w)?.m_value;
    let exact = disk_closed_form_mass(wc, p);
    let unsquared = (PI * (1.0 - wc.norm_sqr())).powf(1.0 / p);
    let params = || Params::new(p).points([w.clone()]).with("m_value", m);
    Ok(vec![
        VerificationReport::new("disk-mass", params().with("closed_form", exact), (m - exact).abs() / exact, 0.0, tol),
        // lhs ≤ rhs reads "the unsquared formula misses by at least min_discrepancy"
        VerificationReport::new(
            "disk-mass-unsquared-discrepancy",
            params().with("unsquared", unsquared),
            min_discrepancy,
            (m - unsquared).abs() / unsquared,
            0.0,
        ),
    ])
}

/// Numerical `ρ₂(z,w)` against the closed form.
pub fn check_p2_oracle(ws: &Workspace, z: &Point, w: &Point, tol: f64) -> Result<VerificationReport> {
    require_disk(ws)?;
    let rho = ws.distance(2.0, z, w)?.rho;
    let exact = skw_distance_p2_oracle(scalar(z)?, scalar(w)?);
    Ok(VerificationReport::close("p2-oracle", Params::new(2.0).points([z.clone(), w.clone()]), rho, exact, tol))
}

/// `|f(z₀) − m_p(z₀)^{−p}∫|m_p(·,z₀)|^{p−2} conj(m_p(·,z₀)) f|`.
pub fn check_reproducing(ws: &Workspace, p: f64, z0: &Point, f: &CoefFunction, tol: f64) -> Result<VerificationReport> {
    let sol = ws.minimizer(p, z0)?;
    let r = reproducing_residual(f, &sol)?;
    let params = Params::new(p).points([z0.clone()]).domain(ws.basis().domain());
    Ok(VerificationReport::new("reproducing-residual", params, r, 0.0, tol))
}

/// A disk automorphism `F(ζ) = e^{iφ}(ζ − a)/(1 − āζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: Complex64,
    pub phi: f64,
}

impl Mobius {
    pub fn new(a: Complex64, phi: f64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return param(format!("Möbius parameter must satisfy |a| < 1, got {a}"));
        }
        Ok(Mobius { a, phi })
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.phi) * (z - self.a) / (Complex64::new(1.0, 0.0) - self.a.conj() * z)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = Complex64::new(1.0, 0.0) - self.a.conj() * z;
        Complex64::from_polar(1.0 - self.a.norm_sqr(), self.phi) / (d * d)
    }
}

/// `ρ_p(z,w) = ρ_p(F(z),F(w))` and `m_p(ζ) = m_p(F(ζ))·|F'(ζ)|^{−2/p}` for `ζ ∈ {z, w}`.
/// At `p = 2` the transported distance is also compared with the closed form.
pub fn check_invariance(
    ws: &Workspace,
    p: f64,
    z: &Point,
    w: &Point,
    map: Mobius,
    distance_tol: f64,
    mass_tol: f64,
) -> Result<Vec<VerificationReport>> {
    require_disk(ws)?;
    let (zc, wc) = (scalar(z)?, scalar(w)?);
    let fz: Point = map.apply(zc).into();
    let fw: Point = map.apply(wc).into();
    let params = || {
        Params::new(p)
            .points([z.clone(), w.clone()])
            .with("a_re", map.a.re)
            .with("a_im", map.a.im)
            .with("phi", map.phi)
    };
    let before = ws.distance(p, z, w)?.rho;
    let after = ws.distance(p, &fz, &fw)?.rho;
    let mut out = vec![VerificationReport::close("invariance-distance", params(), after, before, distance_tol)];
    for (x, fx) in [(z, &fz), (w, &fw)] {
        let m = ws.minimizer(p, x)?.m_value;
        let mf = ws.minimizer(p, fx)?.m_value;
        let jac = map.derivative(scalar(x)?).norm();
        let law = mf * jac.powf(-2.0 / p);
        out.push(VerificationReport::close("invariance-mass", params().with("at_re", scalar(x)?.re), law / m, 1.0, mass_tol));
    }
    if p == 2.0 {
        let exact = skw_distance_p2_oracle(zc, wc);
        out.push(VerificationReport::close("invariance-p2-oracle", params(), after, exact, distance_tol));
    }
    Ok(out)
}

/// Hölder exponent of the local bound: `1/p` for `p > 2`, `1/2` for `1 < p ≤ 2`.
pub fn holder_exponent(p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p > 2.0 {
        Ok(1.0 / p)
    } else if p > 1.0 {
        Ok(0.5)
    } else {
        param("no local Hölder bound is asserted at p = 1")
    }
}

/// Separations at which the Hölder ratio is sampled.
pub const HOLDER_SCALES: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Maximum of `ρ_p(z,w)/|z−w|^α` over sampled pairs in `B(z₀,r)` at each of
/// [`HOLDER_SCALES`]; each report asserts that the maximum grows by at most 2×
/// from one scale to the next.
pub fn check_holder<R: Rng>(
    ws: &Workspace,
    p: f64,
    z0: Complex64,
    r: f64,
    n_pairs: usize,
    rng: &mut R,
) -> Result<Vec<VerificationReport>> {
    require_disk(ws)?;
    let alpha = holder_exponent(p)?;
    if !(r > HOLDER_SCALES[0]) || z0.norm() + r >= 1.0 {
        return param("the ball B(z0, r) must lie inside the disk and exceed the largest separation");
    }
    let mut maxima = vec![];
    for &s in &HOLDER_SCALES {
        let mut best: f64 = 0.0;
        for _ in 0..n_pairs {
            let rad = (r - s) * rng.gen::<f64>().sqrt();
            let z = z0 + Complex64::from_polar(rad, TAU * rng.gen::<f64>());
            let w = z + Complex64::from_polar(s, TAU * rng.gen::<f64>());
            let rho = ws.distance(p, &z.into(), &w.into())?.rho;
            best = best.max(rho / s.powf(alpha));
        }
        maxima.push(best);
    }
    Ok(HOLDER_SCALES
        .windows(2)
        .zip(maxima.windows(2))
        .map(|(s, m)| {
            let params = Params::new(p)
                .points([Point::scalar(z0)])
                .with("radius", r)
                .with("alpha", alpha)
                .with("scale", s[1])
                .with("coarser_scale", s[0]);
            VerificationReport::new("holder-ratio-growth", params, m[1], 2.0 * m[0], 0.0)
        })
        .collect())
}

/// Inputs of [`boundary_diagnostics`].
#[derive(Debug, Clone)]
pub struct BoundarySetup<'a> {
    pub p: f64,
    pub z: Complex64,
    /// Points `w_k = 1 − 2^{−k}` for `k = 0..=k_max`.
    pub k_max: u32,
    /// Ratios must decrease strictly from this `k` on.
    pub monotone_from: u32,
    /// Both ratios must be below this at `k_max`.
    pub threshold: f64,
    /// Unit-norm test function; the normalized constant when absent.
    pub f: Option<&'a CoefFunction>,
    /// Compares the closed forms with the solver where `|w_k| ≤ 3/4`.
    pub cross_check: Option<&'a Workspace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDiagnostics {
    pub k: Vec<u32>,
    pub w: Vec<f64>,
    /// `|m_p(z, w_k)| / m_p(w_k)`.
    pub hypothesis_ratio: Vec<f64>,
    /// `|f(w_k)|^p / K_p(w_k)`.
    pub kernel_ratio: Vec<f64>,
    pub reports: Vec<VerificationReport>,
}

/// Ratio sequences along `w_k → 1` on the disk, from the closed forms.
pub fn boundary_diagnostics(setup: &BoundarySetup<'_>) -> Result<BoundaryDiagnostics> {
    let p = setup.p;
    check_exponent(p)?;
    if !(setup.z.norm() < 1.0) {
        return param("z must lie in the unit disk");
    }
    let f_at = |w: Complex64| -> Result<Complex64> {
        match setup.f {
            Some(f) => {
                let n = f.lp_norm(f.basis().rule(), p)?;
                Ok(f.eval(&w.into())? / n)
            }
            None => Ok(Complex64::new(PI.powf(-1.0 / p), 0.0)),
        }
    };
    let mut d = BoundaryDiagnostics {
        k: vec![],
        w: vec![],
        hypothesis_ratio: vec![],
        kernel_ratio: vec![],
        reports: vec![],
    };
    for k in 0..=setup.k_max {
        let w = 1.0 - 0.5f64.powi(k as i32);
        let wc = Complex64::new(w, 0.0);
        let mass = disk_closed_form_mass(wc, p);
        d.k.push(k);
        d.w.push(w);
        d.hypothesis_ratio.push(disk_closed_form(setup.z, wc, p).norm() / mass);
        d.kernel_ratio.push(f_at(wc)?.norm().powf(p) * mass.powf(p));
        if let Some(ws) = setup.cross_check {
            if w <= 0.75 {
                let sol = ws.minimizer(p, &wc.into())?;
                let params = Params::new(p).points([wc.into()]).with("k", k as f64);
                d.reports
                    .push(VerificationReport::close("boundary-mass-solver", params.clone(), sol.m_value / mass, 1.0, 1e-4));
                let exact = disk_closed_form(setup.z, wc, p);
                let got = sol.minimizer.eval(&setup.z.into())?;
                d.reports
                    .push(VerificationReport::close("boundary-minimizer-solver", params, (got - exact).norm() / exact.norm(), 0.0, 1e-4));
            }
        }
    }
    let params = |k: u32| Params::new(p).points([setup.z.into()]).with("k", k as f64);
    for (name, seq) in [("boundary-hypothesis", &d.hypothesis_ratio), ("boundary-kernel", &d.kernel_ratio)] {
        for k in setup.monotone_from.max(1)..=setup.k_max {
            let i = k as usize;
            d.reports
                .push(VerificationReport::strict(&format!("{name}-decrease"), params(k), seq[i], seq[i - 1]));
        }
        let last = *seq.last().expect("k_max ≥ 0");
        d.reports.push(VerificationReport::new(
            &format!("{name}-limit"),
            params(setup.k_max).with("threshold", setup.threshold),
            last,
            setup.threshold,
            0.0,
        ));
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub rho: f64,
    /// `|ρ_q − ρ_{p_center}|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub p_center: f64,
    pub rho_center: f64,
    pub rows: Vec<SweepRow>,
    pub reports: Vec<VerificationReport>,
}

/// `ρ_q(z,w)` across `q_grid`. On each side of `p_center` the gaps must not
/// shrink as `|q − p_center|` grows, and the gap at the `q` closest to
/// `p_center` (the last term of the approach) must be ≤ `final_gap`.
pub fn p_continuity_sweep(
    ws: &Workspace,
    z: &Point,
    w: &Point,
    p_center: f64,
    q_grid: &[f64],
    final_gap: f64,
) -> Result<SweepResult> {
    check_exponent(p_center)?;
    for &q in q_grid {
        check_exponent(q)?;
    }
    let rho_center = ws.distance(p_center, z, w)?.rho;
    let rows = q_grid
        .iter()
        .map(|&q| {
            let rho = ws.distance(q, z, w)?.rho;
            Ok(SweepRow {
                q,
                rho,
                gap: (rho - rho_center).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reports = vec![];
    for below in [true, false] {
        let mut side: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| if below { r.q < p_center } else { r.q > p_center })
            .collect();
        side.sort_by(|a, b| (a.q - p_center).abs().total_cmp(&(b.q - p_center).abs()));
        for pair in side.windows(2) {
            let params = Params::new(p_center)
                .points([z.clone(), w.clone()])
                .with("q_near", pair[0].q)
                .with("q_far", pair[1].q);
            reports.push(VerificationReport::new("p-continuity-monotone", params, pair[0].gap, pair[1].gap, 1e-9));
        }
        if let Some(last) = side.first() {
            let params = Params::new(p_center).points([z.clone(), w.clone()]).with("q", last.q);
            reports.push(VerificationReport::new("p-continuity-final-gap", params, last.gap, final_gap, 0.0));
        }
    }
    Ok(SweepResult {
        p_center,
        rho_center,
        rows,
        reports,
    })
}

/// Symmetry, triangle inequality and `ρ(z,z) = 0` for one triple.
pub fn check_metric_axioms(ws: &Workspace, p: f64, z: &Point, w: &Point, v: &Point) -> Result<Vec<VerificationReport>> {
    let zw = ws.distance(p, z, w)?.rho;
    let wz = ws.distance(p, w, z)?.rho;
    let wv = ws.distance(p, w, v)?.rho;
    let zv = ws.distance(p, z, v)?.rho;
    let zz = ws.distance(p, z, z)?.rho;
    let params = || Params::new(p).points([z.clone(), w.clone(), v.clone()]);
    Ok(vec![
        VerificationReport::close("metric-symmetry", params(), zw, wz, 1e-9),
        VerificationReport::new("metric-triangle", params(), zv, zw + wv, 1e-8),
        VerificationReport::new("metric-identity", params(), zz, 0.0, 1e-8),
    ])
}

fn product_parts(ws: &Workspace, left: &Workspace) -> Result<usize> {
    if ws.basis().domain().factors().is_none() {
        return param("product checks need a product domain");
    }
    Ok(left.basis().domain().dim())
}

/// `ρ_Ω(z,w) ≤ ρ_{Ω₁}(z₁,w₁) + ρ_{Ω₂}(z₂,w₂)` on `Ω = Ω₁ × Ω₂`.
pub fn check_product_subadditivity(
    ws: &Workspace,
    left: &Workspace,
    right: &Workspace,
    p: f64,
    z: &Point,
    w: &Point,
    tol: f64,
) -> Result<VerificationReport> {
    let k = product_parts(ws, left)?;
    let (z1, z2) = z.split(k);
    let (w1, w2) = w.split(k);
    let total = ws.distance(p, z, w)?.rho;
    let r1 = left.distance(p, &z1, &w1)?.rho;
    let r2 = right.distance(p, &z2, &w2)?.rho;
    let params = Params::new(p)
        .points([z.clone(), w.clone()])
        .domain(ws.basis().domain())
        .with("rho_left", r1)
        .with("rho_right", r2);
    Ok(VerificationReport::new("product-subadditivity", params, total, r1 + r2, tol))
}

/// `B_Ω(z;X) ≥ max_i B_{Ω_i}(z_i;X_i)`; a zero component contributes 0.
pub fn check_product_metric(
    ws: &Workspace,
    left: &Workspace,
    right: &Workspace,
    p: f64,
    z: &Point,
    direction: &[Complex64],
    tol: f64,
) -> Result<VerificationReport> {
    let k = product_parts(ws, left)?;
    let (z1, z2) = z.split(k);
    let factor = |ws: &Workspace, zi: &Point, xi: &[Complex64]| -> Result<f64> {
        if xi.iter().all(|x| x.norm() == 0.0) {
            Ok(0.0)
        } else {
            Ok(ws.metric(p, zi, xi)?.b_value)
        }
    };
    let b1 = factor(left, &z1, &direction[..k])?;
    let b2 = factor(right, &z2, &direction[k..])?;
    let total = ws.metric(p, z, direction)?.b_value;
    let params = Params::new(p)
        .points([z.clone()])
        .domain(ws.basis().domain())
        .with("b_left", b1)
        .with("b_right", b2);
    Ok(VerificationReport::new("product-metric-lower-bound", params, b1.max(b2), total, tol))
}
