//! The projective distance on `ℙ(Aᵖ)`, the p-Skwarczyński distance `ρ_p`
//! and the p-Bergman metric `B_p`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::function_space::{discrete_lp_norm, pow_half, Basis, CoefFunction, Discretization};
use crate::geometry::{Point, QuadratureRule};
use crate::minimizer::{check_exponent, solve_constrained, solve_minimizer, MinimizerSolution, SolverOptions};

/// Seeds of the phase search.
pub const PHASE_GRID: usize = 64;
/// Bracket width at which golden-section refinement stops.
pub const PHASE_TOLERANCE: f64 = 1e-10;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub z: Point,
    pub w: Point,
    pub p: f64,
    pub rho: f64,
    /// Minimizing phase in `(−π, π]`.
    pub theta_opt: f64,
    pub phase_grid_size: usize,
    pub refinement_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub z0: Point,
    pub direction: Vec<Complex64>,
    pub p: f64,
    /// `B_p(z₀; X)`.
    pub b_value: f64,
    /// `μ = min{‖f‖_p : f(z₀) = 0, Xf(z₀) = 1}`.
    pub dual_m_value: f64,
}

/// Result of a phase search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMinimum {
    pub distance: f64,
    /// Optimal phase, in `(−π, π]`.
    pub theta: f64,
    pub iterations: usize,
}

fn phase_objective(u: &[Complex64], v: &[Complex64], weights: &[f64], p: f64, t: f64) -> f64 {
    let e = Complex64::from_polar(1.0, t);
    u.iter()
        .zip(v)
        .zip(weights)
        .map(|((a, b), w)| w * pow_half((e * a - b).norm_sqr(), p))
        .sum()
}

/// `min_t ‖e^{it} u − v‖_p` for node values `u`, `v` of a common rule.
///
/// A uniform grid of [`PHASE_GRID`] phases locates the basin, golden-section
/// search then shrinks the bracket around the best seed to [`PHASE_TOLERANCE`].
pub fn phase_search(u: &[Complex64], v: &[Complex64], weights: &[f64], p: f64) -> Result<PhaseMinimum> {
    if u.len() != v.len() || u.len() != weights.len() {
        return param("phase search needs value arrays matching the rule");
    }
    check_exponent(p)?;
    let h = TAU / PHASE_GRID as f64;
    let grid: Vec<f64> = (0..PHASE_GRID)
        .map(|k| phase_objective(u, v, weights, p, k as f64 * h))
        .collect();
    let (k_best, f_best) = grid
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, f)| if f < acc.1 { (k, f) } else { acc });

    let mut a = (k_best as f64 - 1.0) * h;
    let mut b = (k_best as f64 + 1.0) * h;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = phase_objective(u, v, weights, p, x1);
    let mut f2 = phase_objective(u, v, weights, p, x2);
    let mut iterations = 0;
    while b - a > PHASE_TOLERANCE {
        iterations += 1;
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = phase_objective(u, v, weights, p, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = phase_objective(u, v, weights, p, x2);
        }
    }
    let (mut t, mut f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if f_best <= f {
        t = k_best as f64 * h;
        f = f_best;
    }
    Ok(PhaseMinimum {
        distance: f.max(0.0).powf(1.0 / p),
        theta: wrap_phase(t),
        iterations,
    })
}

fn normalized(values: Vec<Complex64>, weights: &[f64], p: f64) -> Result<Vec<Complex64>> {
    let n = discrete_lp_norm(&values, weights, p);
    if !(n > 0.0) || !n.is_finite() {
        return param("the zero function has no projective class");
    }
    Ok(values.into_iter().map(|v| v / n).collect())
}

/// `d([f],[g]) = min_t ‖e^{it} f/‖f‖ − g/‖g‖‖_p` on `rule`; returns `(d, t)`.
pub fn projective_distance(f: &CoefFunction, g: &CoefFunction, rule: &QuadratureRule, p: f64) -> Result<(f64, f64)> {
    check_exponent(p)?;
    let u = normalized(f.values_on(rule)?, rule.weights(), p)?;
    let v = normalized(g.values_on(rule)?, rule.weights(), p)?;
    let m = phase_search(&u, &v, rule.weights(), p)?;
    Ok((m.distance, m.theta))
}

/// `ρ_p(z, w)` on a truncated basis.
pub fn skw_distance(basis: &Arc<Basis>, p: f64, z: &Point, w: &Point, opts: &SolverOptions) -> Result<DistanceResult> {
    let a = solve_minimizer(basis, p, z, opts)?;
    let b = solve_minimizer(basis, p, w, opts)?;
    skw_distance_between(&a, &b)
}

/// `ρ_p` between two already solved minimizers on the same basis.
pub fn skw_distance_between(a: &MinimizerSolution, b: &MinimizerSolution) -> Result<DistanceResult> {
    if !Arc::ptr_eq(a.basis(), b.basis()) && a.basis().rule().weights() != b.basis().rule().weights() {
        return param("minimizers live on different quadrature rules");
    }
    if a.p != b.p {
        return param("minimizers were computed for different p");
    }
    let weights = a.basis().rule().weights();
    let m = phase_search(&a.normalized_values(), &b.normalized_values(), weights, a.p)?;
    Ok(DistanceResult {
        z: a.z0.clone(),
        w: b.z0.clone(),
        p: a.p,
        rho: m.distance,
        theta_opt: m.theta,
        phase_grid_size: PHASE_GRID,
        refinement_iterations: m.iterations,
    })
}

/// Exact `ρ₂` on the unit disk, `√(2(1 − |K(z,w)|/√(K(z)K(w))))`.
///
/// Written as `√2·|z − w|/|1 − z w̄|`, which is the same quantity without the
/// cancellation for nearby points.
pub fn skw_distance_p2_oracle(z: Complex64, w: Complex64) -> f64 {
    let d = Complex64::new(1.0, 0.0) - z * w.conj();
    2f64.sqrt() * (z - w).norm() / d.norm()
}

/// `B_p(z₀; X) = K_p(z₀)^{−1/p} / μ` with `μ = min{‖f‖_p : f(z₀) = 0, Xf(z₀) = 1}`.
pub fn bergman_metric(
    basis: &Arc<Basis>,
    p: f64,
    z0: &Point,
    direction: &[Complex64],
    opts: &SolverOptions,
) -> Result<MetricResult> {
    check_exponent(p)?;
    if direction.len() != basis.domain().dim() {
        return param("direction must have one component per complex dimension");
    }
    if direction.iter().all(|x| x.norm() == 0.0) {
        return param("direction must be nonzero");
    }
    let m = solve_minimizer(basis, p, z0, opts)?;
    let row = basis.eval_row(z0.coords())?;
    let drow = basis.derivative_row(z0.coords(), direction)?;
    let n = row.len();
    let mut c = DMatrix::from_element(2, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        c[(0, k)] = row[k];
        c[(1, k)] = drow[k];
    }
    if drow.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::Rank("the direction annihilates every basis function".into()));
    }
    let out = solve_constrained(basis, p, c, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], opts)?;
    let mu = discrete_lp_norm(&out.values, basis.rule().weights(), p);
    if !out.converged {
        let best = MinimizerSolution::from_parts(basis, p, z0.clone(), mu, out)?;
        return Err(Error::Convergence {
            iterations: best.iterations,
            residual: best.gradient_residual,
            best: Box::new(best),
        });
    }
    Ok(MetricResult {
        z0: z0.clone(),
        direction: direction.to_vec(),
        p,
        b_value: m.m_value / mu,
        dual_m_value: mu,
    })
}

type CacheKey = (u64, Vec<(u64, u64)>);

fn key(p: f64, z: &Point) -> CacheKey {
    (p.to_bits(), z.coords().iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect())
}

/// A basis and solver options plus a cache of solved minimizers, so repeated
/// distances between the same points do not re-solve.
#[derive(Debug)]
pub struct Workspace {
    basis: Arc<Basis>,
    options: SolverOptions,
    cache: Mutex<HashMap<CacheKey, Arc<MinimizerSolution>>>,
    distances: Mutex<HashMap<(CacheKey, Vec<(u64, u64)>), DistanceResult>>,
}

impl Workspace {
    pub fn new(basis: Arc<Basis>, options: SolverOptions) -> Self {
        Workspace {
            basis,
            options,
            cache: Mutex::new(HashMap::new()),
            distances: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_discretization(d: &Discretization, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        Ok(Self::new(d.build()?, options))
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn rule(&self) -> &QuadratureRule {
        self.basis.rule()
    }

    /// Workspaces for the two factors of a product basis.
    pub fn factors(&self) -> Option<(Workspace, Workspace)> {
        self.basis
            .factors()
            .map(|(l, r)| (Workspace::new(l.clone(), self.options), Workspace::new(r.clone(), self.options)))
    }

    pub fn minimizer(&self, p: f64, z: &Point) -> Result<Arc<MinimizerSolution>> {
        let k = key(p, z);
        if let Some(s) = self.cache.lock().expect("cache poisoned").get(&k) {
            return Ok(s.clone());
        }
        let s = Arc::new(solve_minimizer(&self.basis, p, z, &self.options)?);
        self.cache.lock().expect("cache poisoned").insert(k, s.clone());
        Ok(s)
    }

    /// `ρ_p(z, w)`, memoized per ordered pair.
    pub fn distance(&self, p: f64, z: &Point, w: &Point) -> Result<DistanceResult> {
        let k = (key(p, z), key(p, w).1);
        if let Some(d) = self.distances.lock().expect("cache poisoned").get(&k) {
            return Ok(d.clone());
        }
        let a = self.minimizer(p, z)?;
        let b = self.minimizer(p, w)?;
        let d = skw_distance_between(&a, &b)?;
        self.distances.lock().expect("cache poisoned").insert(k, d.clone());
        Ok(d)
    }

    pub fn metric(&self, p: f64, z0: &Point, direction: &[Complex64]) -> Result<MetricResult> {
        bergman_metric(&self.basis, p, z0, direction, &self.options)
    }
}

/// Header for distance tables: `z_re, z_im, w_re, w_im, p, rho, theta_opt`,
/// with per-coordinate columns (`z1_re`, ...) in higher dimension.
pub fn csv_header(dim: usize) -> String {
    let coord = |name: &str| -> Vec<String> {
        if dim == 1 {
            vec![format!("{name}_re"), format!("{name}_im")]
        } else {
            (1..=dim)
                .flat_map(|j| [format!("{name}{j}_re"), format!("{name}{j}_im")])
                .collect()
        }
    };
    let mut cols = coord("z");
    cols.extend(coord("w"));
    cols.extend(["p", "rho", "theta_opt"].map(String::from));
    cols.join(",")
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl DistanceResult {
    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = vec![];
        for c in self.z.coords().iter().chain(self.w.coords()) {
            cols.push(fmt_f64(c.re));
            cols.push(fmt_f64(c.im));
        }
        cols.push(fmt_f64(self.p));
        cols.push(fmt_f64(self.rho));
        cols.push(fmt_f64(self.theta_opt));
        cols.join(",")
    }
}

/// Writes a header row and one row per result.
pub fn write_distance_csv<W: Write>(mut out: W, dim: usize, rows: &[DistanceResult]) -> Result<()> {
    writeln!(out, "{}", csv_header(dim))?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Phase `φ` folded to `(−π, π]`; convenient for comparing optimal phases.
pub fn wrap_phase(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::BasisSpec;
    use crate::geometry::DomainSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk(deg: usize, r: usize, a: usize) -> Arc<Basis> {
        Discretization::new(DomainSpec::UnitDisk, BasisSpec::uniform(deg), r, a)
            .build()
            .unwrap()
    }

    #[test]
    fn identical_functions_have_zero_distance_at_zero_phase() {
        let b = disk(6, 16, 32);
        let f = CoefFunction::new(b.clone(), (0..7).map(|k| c(1.0 / (k + 1) as f64, 0.3 * k as f64)).collect()).unwrap();
        let (d, t) = projective_distance(&f, &f, b.rule(), 3.0).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(t, 0.0);
    }

    #[test]
    fn scalar_multiples_share_a_class() {
        let b = disk(6, 16, 32);
        let f = CoefFunction::new(b.clone(), (0..7).map(|k| c(0.5 - k as f64 * 0.1, 0.2)).collect()).unwrap();
        let g = f.scaled(Complex64::from_polar(2.0, PI / 3.0));
        for p in [1.5, 2.0, 4.0] {
            let (d, t) = projective_distance(&f, &g, b.rule(), p).unwrap();
            assert!(d < 1e-8, "p={p}: {d}");
            assert!((wrap_phase(t) - PI / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn orthonormal_pair_is_sqrt_two_apart() {
        let b = disk(4, 16, 32);
        let f = CoefFunction::monomial(b.clone(), &[0], c(1.0, 0.0)).unwrap();
        let g = CoefFunction::monomial(b.clone(), &[1], c(0.0, 1.0)).unwrap();
        let (d, _) = projective_distance(&f, &g, b.rule(), 2.0).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_function_is_rejected() {
        let b = disk(2, 8, 16);
        let f = CoefFunction::monomial(b.clone(), &[0], c(1.0, 0.0)).unwrap();
        assert!(projective_distance(&f, &CoefFunction::zero(b.clone()), b.rule(), 2.0).is_err());
    }

    #[test]
    fn oracle_values() {
        assert_eq!(skw_distance_p2_oracle(c(0.0, 0.0), c(0.0, 0.0)), 0.0);
        assert!((skw_distance_p2_oracle(c(0.0, 0.0), c(0.5, 0.0)) - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        // kernel-ratio form, evaluated directly
        let (z, w) = (c(0.3, 0.0), c(-0.3, 0.0));
        let ratio = (1.0 - 0.09) * (1.0 - 0.09) / (1.0f64 + 0.09).powi(2);
        let direct = (2.0 * (1.0 - ratio)).sqrt();
        assert!((skw_distance_p2_oracle(z, w) - direct).abs() < 1e-15);
        assert!((direct - 0.7784661811228046).abs() < 1e-15);
    }

    #[test]
    fn p2_distance_matches_oracle() {
        let b = disk(24, 64, 128);
        let o = SolverOptions::default();
        let r = skw_distance(&b, 2.0, &0.0.into(), &0.5.into(), &o).unwrap();
        assert!((r.rho - 0.5 * 2f64.sqrt()).abs() < 1e-8);
        let (z, w) = (c(0.2, 0.1), c(-0.3, 0.4));
        let r = skw_distance(&b, 2.0, &z.into(), &w.into(), &o).unwrap();
        assert!((r.rho - skw_distance_p2_oracle(z, w)).abs() < 1e-8);
        let r = skw_distance(&b, 2.0, &0.2.into(), &c(0.201, 0.0).into(), &o).unwrap();
        assert!(r.rho >= 0.0 && r.rho <= 0.01);
    }

    #[test]
    fn workspace_caches_and_is_symmetric() {
        let ws = Workspace::new(disk(12, 32, 64), SolverOptions::default());
        let z: Point = c(0.1, 0.2).into();
        let w: Point = c(-0.4, 0.0).into();
        let a = ws.distance(3.0, &z, &w).unwrap();
        let b = ws.distance(3.0, &w, &z).unwrap();
        assert!((a.rho - b.rho).abs() < 1e-12);
        assert!(Arc::ptr_eq(&ws.minimizer(3.0, &z).unwrap(), &ws.minimizer(3.0, &z).unwrap()));
    }

    #[test]
    fn disk_metric_at_origin() {
        let b = disk(8, 16, 32);
        let o = SolverOptions::default();
        let m = bergman_metric(&b, 2.0, &0.0.into(), &[c(1.0, 0.0)], &o).unwrap();
        assert!((m.b_value - 2f64.sqrt()).abs() < 1e-10);
        let m3 = bergman_metric(&b, 2.0, &0.0.into(), &[c(3.0, 0.0)], &o).unwrap();
        assert!((m3.b_value - 3.0 * m.b_value).abs() < 1e-10);
        assert!(bergman_metric(&b, 2.0, &0.0.into(), &[c(0.0, 0.0)], &o).is_err());
    }

    #[test]
    fn degenerate_metric_constraints_are_rank_errors() {
        let b = disk(0, 8, 16);
        let r = bergman_metric(&b, 2.0, &0.0.into(), &[c(1.0, 0.0)], &SolverOptions::default());
        assert!(matches!(r, Err(Error::Rank(_))));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(csv_header(1), "z_re,z_im,w_re,w_im,p,rho,theta_opt");
        assert!(csv_header(2).starts_with("z1_re,z1_im,z2_re"));
        let r = DistanceResult {
            z: 0.0.into(),
            w: 0.5.into(),
            p: 2.0,
            rho: 0.25,
            theta_opt: 0.0,
            phase_grid_size: PHASE_GRID,
            refinement_iterations: 0,
        };
        assert_eq!(r.csv_row().split(',').count(), 7);
        assert!(r.csv_row().contains("5.0000000000000000e-1"));
    }
}
