//! Model domains and polar tensor quadrature.
//!
//! Every domain handled here is a disk, an annulus, or a product of those.
//! Area integrals are discretized with Gauss–Legendre nodes in the radius and
//! the trapezoid rule in the angle; product domains use the tensor product of
//! the factor rules.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A bounded model domain in complex space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    UnitDisk,
    Annulus {
        inner_radius: f64,
    },
    Product {
        left: Box<DomainSpec>,
        right: Box<DomainSpec>,
    },
}

impl DomainSpec {
    pub fn annulus(inner_radius: f64) -> Result<Self> {
        let d = DomainSpec::Annulus { inner_radius };
        d.validate()?;
        Ok(d)
    }

    pub fn product(left: DomainSpec, right: DomainSpec) -> Self {
        DomainSpec::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// The bidisc `D × D`.
    pub fn bidisc() -> Self {
        Self::product(DomainSpec::UnitDisk, DomainSpec::UnitDisk)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::UnitDisk => Ok(()),
            DomainSpec::Annulus { inner_radius } => {
                if inner_radius.is_finite() && *inner_radius > 0.0 && *inner_radius < 1.0 {
                    Ok(())
                } else {
                    param(format!("annulus inner radius must lie in (0,1), got {inner_radius}"))
                }
            }
            DomainSpec::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
        }
    }

    /// Ambient complex dimension.
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::UnitDisk | DomainSpec::Annulus { .. } => 1,
            DomainSpec::Product { left, right } => left.dim() + right.dim(),
        }
    }

    /// Lebesgue volume of the domain.
    pub fn volume(&self) -> f64 {
        match self {
            DomainSpec::UnitDisk => PI,
            DomainSpec::Annulus { inner_radius } => PI * (1.0 - inner_radius * inner_radius),
            DomainSpec::Product { left, right } => left.volume() * right.volume(),
        }
    }

    /// True when the coordinates describe a point strictly inside the domain.
    pub fn contains(&self, coords: &[Complex64]) -> bool {
        if coords.len() != self.dim() {
            return false;
        }
        match self {
            DomainSpec::UnitDisk => coords[0].norm() < 1.0,
            DomainSpec::Annulus { inner_radius } => {
                let r = coords[0].norm();
                r > *inner_radius && r < 1.0
            }
            DomainSpec::Product { left, right } => {
                let k = left.dim();
                left.contains(&coords[..k]) && right.contains(&coords[k..])
            }
        }
    }

    /// The two factors of a product domain.
    pub fn factors(&self) -> Option<(&DomainSpec, &DomainSpec)> {
        match self {
            DomainSpec::Product { left, right } => Some((left, right)),
            _ => None,
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::UnitDisk => write!(f, "unit-disk"),
            DomainSpec::Annulus { inner_radius } => write!(f, "annulus({inner_radius})"),
            DomainSpec::Product { left, right } => write!(f, "{left}x{right}"),
        }
    }
}

/// A point of a domain, one complex coordinate per ambient dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<Complex64>);

impl Point {
    pub fn scalar(z: Complex64) -> Self {
        Point(vec![z])
    }

    pub fn pair(z1: Complex64, z2: Complex64) -> Self {
        Point(vec![z1, z2])
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Splits a point of a product domain after the first `k` coordinates.
    pub fn split(&self, k: usize) -> (Point, Point) {
        (Point(self.0[..k].to_vec()), Point(self.0[k..].to_vec()))
    }

    pub fn concat(&self, other: &Point) -> Point {
        let mut c = self.0.clone();
        c.extend_from_slice(&other.0);
        Point(c)
    }

    /// Euclidean distance in `C^n`.
    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::scalar(z)
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::scalar(Complex64::new(x, 0.0))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

/// Nodes and positive weights approximating Lebesgue area measure.
///
/// Nodes are stored flat, `dim` coordinates per node. For product domains the
/// node with factor indices `(i, j)` sits at position `i * n_right + j`, and
/// the factor rules are kept so tensor-structured values can be formed without
/// materializing product basis tables.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    domain: DomainSpec,
    radial_n: usize,
    angular_n: usize,
    coords: Vec<Complex64>,
    weights: Vec<f64>,
    factors: Option<(Arc<QuadratureRule>, Arc<QuadratureRule>)>,
}

impl QuadratureRule {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &[Complex64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[Complex64]> {
        self.coords.chunks(self.dim())
    }

    /// `(radial_n, angular_n)` used for each one-dimensional factor.
    pub fn resolution(&self) -> (usize, usize) {
        (self.radial_n, self.angular_n)
    }

    pub fn factors(&self) -> Option<(&Arc<QuadratureRule>, &Arc<QuadratureRule>)> {
        self.factors.as_ref().map(|(a, b)| (a, b))
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Builds the polar tensor rule for `domain`.
///
/// Radii are Gauss–Legendre nodes on `[0,1]` (disk) or `[r,1]` (annulus),
/// angles are equispaced, and each weight carries the polar Jacobian `r`.
/// Product domains get the tensor product of their factor rules.
pub fn build_quadrature(domain: &DomainSpec, radial_n: usize, angular_n: usize) -> Result<QuadratureRule> {
    domain.validate()?;
    if radial_n < 2 {
        return param(format!("radial_n must be at least 2, got {radial_n}"));
    }
    if angular_n < 4 {
        return param(format!("angular_n must be at least 4, got {angular_n}"));
    }
    match domain {
        DomainSpec::UnitDisk => Ok(polar_rule(domain.clone(), 0.0, radial_n, angular_n)),
        DomainSpec::Annulus { inner_radius } => {
            Ok(polar_rule(domain.clone(), *inner_radius, radial_n, angular_n))
        }
        DomainSpec::Product { left, right } => {
            let l = build_quadrature(left, radial_n, angular_n)?;
            let r = build_quadrature(right, radial_n, angular_n)?;
            let dim = l.dim() + r.dim();
            let mut coords = Vec::with_capacity(l.len() * r.len() * dim);
            let mut weights = Vec::with_capacity(l.len() * r.len());
            for i in 0..l.len() {
                for j in 0..r.len() {
                    coords.extend_from_slice(l.node(i));
                    coords.extend_from_slice(r.node(j));
                    weights.push(l.weights[i] * r.weights[j]);
                }
            }
            Ok(QuadratureRule {
                domain: domain.clone(),
                radial_n,
                angular_n,
                coords,
                weights,
                factors: Some((Arc::new(l), Arc::new(r))),
            })
        }
    }
}

fn polar_rule(domain: DomainSpec, inner: f64, radial_n: usize, angular_n: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(radial_n);
    let half = 0.5 * (1.0 - inner);
    let mid = 0.5 * (1.0 + inner);
    let dtheta = 2.0 * PI / angular_n as f64;
    let mut coords = Vec::with_capacity(radial_n * angular_n);
    let mut weights = Vec::with_capacity(radial_n * angular_n);
    for (xi, wi) in x.iter().zip(&w) {
        let r = mid + half * xi;
        let radial_weight = wi * half * r * dtheta;
        for j in 0..angular_n {
            coords.push(Complex64::from_polar(r, j as f64 * dtheta));
            weights.push(radial_weight);
        }
    }
    QuadratureRule {
        domain,
        radial_n,
        angular_n,
        coords,
        weights,
        factors: None,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// `Σ_q w_q · v_q`.
pub fn quad_integrate(rule: &QuadratureRule, values: &[Complex64]) -> Result<Complex64> {
    if values.len() != rule.len() {
        return param(format!(
            "expected {} values for the quadrature rule, got {}",
            rule.len(),
            values.len()
        ));
    }
    Ok(rule.weights.iter().zip(values).map(|(w, v)| v * *w).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_area_and_second_moment() {
        let rule = build_quadrature(&DomainSpec::UnitDisk, 32, 64).unwrap();
        let ones = vec![c(1.0, 0.0); rule.len()];
        assert!((quad_integrate(&rule, &ones).unwrap().re - PI).abs() < 1e-12);
        let r2: Vec<_> = rule.nodes().map(|z| c(z[0].norm_sqr(), 0.0)).collect();
        assert!((quad_integrate(&rule, &r2).unwrap().re - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn annulus_area() {
        let d = DomainSpec::annulus(0.5).unwrap();
        let rule = build_quadrature(&d, 32, 64).unwrap();
        assert!((rule.total_weight() - PI * 0.75).abs() < 1e-12);
        assert!(rule.nodes().all(|z| d.contains(z)));
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        let rule = build_quadrature(&DomainSpec::UnitDisk, 32, 64).unwrap();
        let zeta: Vec<_> = rule.nodes().map(|z| z[0]).collect();
        assert!(quad_integrate(&rule, &zeta).unwrap().norm() < 1e-14);
        let zeros = vec![c(0.0, 0.0); rule.len()];
        assert_eq!(quad_integrate(&rule, &zeros).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_quadrature(&DomainSpec::UnitDisk, 1, 64).is_err());
        assert!(build_quadrature(&DomainSpec::UnitDisk, 8, 3).is_err());
        assert!(DomainSpec::annulus(1.0).is_err());
        assert!(DomainSpec::annulus(0.0).is_err());
        assert!(build_quadrature(&DomainSpec::Annulus { inner_radius: -0.2 }, 8, 8).is_err());
        let rule = build_quadrature(&DomainSpec::UnitDisk, 4, 8).unwrap();
        assert!(quad_integrate(&rule, &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn product_rule_is_tensor_of_factors() {
        let d = DomainSpec::product(DomainSpec::UnitDisk, DomainSpec::annulus(0.3).unwrap());
        assert_eq!(d.dim(), 2);
        let rule = build_quadrature(&d, 6, 8).unwrap();
        assert_eq!(rule.len(), 48 * 48);
        assert!((rule.total_weight() - d.volume()).abs() < 1e-12);
        let (l, r) = rule.factors().unwrap();
        assert_eq!(rule.node(5 * r.len() + 7), [l.node(5)[0], r.node(7)[0]]);
        assert!(rule.nodes().all(|z| d.contains(z)));
    }

    #[test]
    fn deterministic_construction() {
        let a = build_quadrature(&DomainSpec::UnitDisk, 12, 16).unwrap();
        let b = build_quadrature(&DomainSpec::UnitDisk, 12, 16).unwrap();
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn gauss_legendre_small_orders() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn domain_serializes_with_kind_tag() {
        let d = DomainSpec::product(DomainSpec::UnitDisk, DomainSpec::annulus(0.5).unwrap());
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"unit-disk\""));
        let back: DomainSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
