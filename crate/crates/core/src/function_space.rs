//! Truncated holomorphic bases and functions expressed in them.

use std::borrow::Cow;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::{build_quadrature, DomainSpec, Point, QuadratureRule};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Truncation degrees. Disk factors use monomials `ζ^0..ζ^disk_degree`,
/// annulus factors use Laurent monomials `ζ^-laurent_negative..ζ^laurent_positive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisSpec {
    pub disk_degree: usize,
    pub laurent_negative: usize,
    pub laurent_positive: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec {
            disk_degree: 24,
            laurent_negative: 16,
            laurent_positive: 16,
        }
    }
}

impl BasisSpec {
    /// Same maximal degree everywhere; the annulus gets `-n..n`.
    pub fn uniform(n: usize) -> Self {
        BasisSpec {
            disk_degree: n,
            laurent_negative: n,
            laurent_positive: n,
        }
    }
}

/// Everything needed to rebuild a basis: domain, degrees, quadrature resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Discretization {
    pub domain: DomainSpec,
    pub basis: BasisSpec,
    pub radial_n: usize,
    pub angular_n: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self::disk_default()
    }
}

impl Discretization {
    pub fn new(domain: DomainSpec, basis: BasisSpec, radial_n: usize, angular_n: usize) -> Self {
        Discretization {
            domain,
            basis,
            radial_n,
            angular_n,
        }
    }

    /// Degree-24 monomials on the disk with a 64×128 polar rule.
    pub fn disk_default() -> Self {
        Self::new(DomainSpec::UnitDisk, BasisSpec::default(), 64, 128)
    }

    pub fn build(&self) -> Result<Arc<Basis>> {
        let rule = Arc::new(build_quadrature(&self.domain, self.radial_n, self.angular_n)?);
        Ok(Arc::new(Basis::new(&self.domain, self.basis, rule)?))
    }

    /// Doubles every degree and both quadrature resolutions.
    pub fn refined(&self) -> Self {
        let b = self.basis;
        Discretization {
            domain: self.domain.clone(),
            basis: BasisSpec {
                disk_degree: 2 * b.disk_degree,
                laurent_negative: 2 * b.laurent_negative,
                laurent_positive: 2 * b.laurent_positive,
            },
            radial_n: 2 * self.radial_n,
            angular_n: 2 * self.angular_n,
        }
    }
}

#[derive(Debug, Clone)]
pub enum BasisKind {
    /// `ζ^k`, `k = 0..=degree`.
    Monomial { degree: usize },
    /// `ζ^k`, `k = -negative..=positive`.
    Laurent { negative: usize, positive: usize },
    /// `φ_i(ζ₁)·ψ_j(ζ₂)` stored at index `i * right.len() + j`.
    Product(Arc<Basis>, Arc<Basis>),
}

/// A finite family of holomorphic functions together with its values at the
/// nodes of one quadrature rule (one row per node, one column per function).
/// Product bases keep the factor tables instead of the full product table.
#[derive(Clone)]
pub struct Basis {
    domain: DomainSpec,
    kind: BasisKind,
    rule: Arc<QuadratureRule>,
    table: Option<DMatrix<Complex64>>,
}

impl Basis {
    pub fn new(domain: &DomainSpec, spec: BasisSpec, rule: Arc<QuadratureRule>) -> Result<Basis> {
        if rule.domain() != domain {
            return param("quadrature rule and basis must share the domain");
        }
        let kind = match domain {
            DomainSpec::UnitDisk => BasisKind::Monomial {
                degree: spec.disk_degree,
            },
            DomainSpec::Annulus { .. } => BasisKind::Laurent {
                negative: spec.laurent_negative,
                positive: spec.laurent_positive,
            },
            DomainSpec::Product { left, right } => {
                let (lr, rr) = rule
                    .factors()
                    .ok_or_else(|| crate::Error::Parameter("product domain needs a tensor rule".into()))?;
                let l = Basis::new(left, spec, lr.clone())?;
                let r = Basis::new(right, spec, rr.clone())?;
                BasisKind::Product(Arc::new(l), Arc::new(r))
            }
        };
        let mut basis = Basis {
            domain: domain.clone(),
            kind,
            rule,
            table: None,
        };
        if !matches!(basis.kind, BasisKind::Product(..)) {
            let n = basis.len();
            let rule = basis.rule.clone();
            let mut table = DMatrix::from_element(rule.len(), n, ZERO);
            for (q, node) in rule.nodes().enumerate() {
                for (k, v) in basis.row_1d(node[0]).into_iter().enumerate() {
                    table[(q, k)] = v;
                }
            }
            basis.table = Some(table);
        }
        Ok(basis)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            BasisKind::Monomial { degree } => degree + 1,
            BasisKind::Laurent { negative, positive } => negative + positive + 1,
            BasisKind::Product(l, r) => l.len() * r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exponent multi-index of every basis function.
    pub fn exponents(&self) -> Vec<Vec<i64>> {
        match &self.kind {
            BasisKind::Monomial { degree } => (0..=*degree as i64).map(|k| vec![k]).collect(),
            BasisKind::Laurent { negative, positive } => {
                (-(*negative as i64)..=*positive as i64).map(|k| vec![k]).collect()
            }
            BasisKind::Product(l, r) => {
                let re = r.exponents();
                l.exponents()
                    .into_iter()
                    .flat_map(|a| {
                        re.iter().map(move |b| {
                            let mut e = a.clone();
                            e.extend_from_slice(b);
                            e
                        })
                    })
                    .collect()
            }
        }
    }

    fn lowest_power(&self) -> i64 {
        match &self.kind {
            BasisKind::Laurent { negative, .. } => -(*negative as i64),
            _ => 0,
        }
    }

    fn row_1d(&self, z: Complex64) -> Vec<Complex64> {
        let n = self.len();
        let mut row = Vec::with_capacity(n);
        let lo = self.lowest_power();
        let mut v = if lo < 0 { z.inv().powi(-lo as i32) } else { ONE };
        for _ in 0..n {
            row.push(v);
            v *= z;
        }
        row
    }

    fn derivative_row_1d(&self, z: Complex64) -> Vec<Complex64> {
        let lo = self.lowest_power();
        (0..self.len())
            .map(|i| {
                let k = lo + i as i64;
                if k == 0 {
                    ZERO
                } else {
                    z.powi((k - 1) as i32) * k as f64
                }
            })
            .collect()
    }

    fn check_point(&self, coords: &[Complex64]) -> Result<()> {
        if !self.domain.contains(coords) {
            return param(format!("point {} lies outside {}", Point(coords.to_vec()), self.domain));
        }
        Ok(())
    }

    /// Values of all basis functions at a point of the domain.
    pub fn eval_row(&self, coords: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(coords)?;
        Ok(self.eval_row_unchecked(coords))
    }

    fn eval_row_unchecked(&self, coords: &[Complex64]) -> Vec<Complex64> {
        match &self.kind {
            BasisKind::Product(l, r) => {
                let k = l.domain.dim();
                kron(&l.eval_row_unchecked(&coords[..k]), &r.eval_row_unchecked(&coords[k..]))
            }
            _ => self.row_1d(coords[0]),
        }
    }

    /// Values of `X φ_k` at a point, where `X = Σ X_i ∂/∂z_i`.
    pub fn derivative_row(&self, coords: &[Complex64], direction: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(coords)?;
        if direction.len() != self.domain.dim() {
            return param("direction length must equal the domain dimension");
        }
        Ok(self.derivative_row_unchecked(coords, direction))
    }

    fn derivative_row_unchecked(&self, coords: &[Complex64], direction: &[Complex64]) -> Vec<Complex64> {
        match &self.kind {
            BasisKind::Product(l, r) => {
                let k = l.domain.dim();
                let (zl, zr) = coords.split_at(k);
                let (xl, xr) = direction.split_at(k);
                let a = kron(&l.derivative_row_unchecked(zl, xl), &r.eval_row_unchecked(zr));
                let b = kron(&l.eval_row_unchecked(zl), &r.derivative_row_unchecked(zr, xr));
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            }
            _ => self
                .derivative_row_1d(coords[0])
                .into_iter()
                .map(|v| v * direction[0])
                .collect(),
        }
    }

    /// Values of `Σ c_k φ_k` at every node of the basis' own rule.
    pub fn values_on_rule(&self, coefs: &[Complex64]) -> Vec<Complex64> {
        match &self.kind {
            BasisKind::Product(l, r) => {
                let c = DMatrix::from_row_slice(l.len(), r.len(), coefs);
                let el = l.table.as_ref().expect("factor table");
                let er = r.table.as_ref().expect("factor table");
                let v = el * c * er.transpose();
                // row-major flattening matches the product node ordering
                v.transpose().as_slice().to_vec()
            }
            _ => {
                let t = self.table.as_ref().expect("table");
                let c = nalgebra::DVector::from_column_slice(coefs);
                (t * c).as_slice().to_vec()
            }
        }
    }

    /// The full node-by-function table; product tables are formed on demand.
    pub fn dense_table(&self) -> Cow<'_, DMatrix<Complex64>> {
        match &self.kind {
            BasisKind::Product(l, r) => {
                let el = l.dense_table();
                let er = r.dense_table();
                let (q1, n1) = el.shape();
                let (q2, n2) = er.shape();
                let mut t = DMatrix::from_element(q1 * q2, n1 * n2, ZERO);
                for a in 0..n1 {
                    for b in 0..n2 {
                        let col = a * n2 + b;
                        for i in 0..q1 {
                            let la = el[(i, a)];
                            for j in 0..q2 {
                                t[(i * q2 + j, col)] = la * er[(j, b)];
                            }
                        }
                    }
                }
                Cow::Owned(t)
            }
            _ => Cow::Borrowed(self.table.as_ref().expect("table")),
        }
    }

    pub(crate) fn factors(&self) -> Option<(&Arc<Basis>, &Arc<Basis>)> {
        match &self.kind {
            BasisKind::Product(l, r) => Some((l, r)),
            _ => None,
        }
    }
}

impl std::fmt::Debug for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Basis")
            .field("domain", &self.domain)
            .field("kind", &self.kind)
            .field("len", &self.len())
            .field("nodes", &self.rule.len())
            .finish()
    }
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// A holomorphic function `Σ c_k φ_k` over a shared basis.
#[derive(Debug, Clone)]
pub struct CoefFunction {
    basis: Arc<Basis>,
    coefficients: Vec<Complex64>,
}

impl CoefFunction {
    pub fn new(basis: Arc<Basis>, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return param(format!(
                "basis has {} functions but {} coefficients were given",
                basis.len(),
                coefficients.len()
            ));
        }
        Ok(CoefFunction { basis, coefficients })
    }

    pub fn zero(basis: Arc<Basis>) -> Self {
        let n = basis.len();
        CoefFunction {
            basis,
            coefficients: vec![ZERO; n],
        }
    }

    /// The single basis function with the given exponent, scaled by `c`.
    pub fn monomial(basis: Arc<Basis>, exponent: &[i64], c: Complex64) -> Result<Self> {
        let idx = basis
            .exponents()
            .iter()
            .position(|e| e.as_slice() == exponent)
            .ok_or_else(|| crate::Error::Parameter(format!("exponent {exponent:?} not in basis")))?;
        let mut f = Self::zero(basis);
        f.coefficients[idx] = c;
        Ok(f)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        CoefFunction {
            basis: self.basis.clone(),
            coefficients: self.coefficients.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &CoefFunction) -> Result<Self> {
        if !Arc::ptr_eq(&self.basis, &other.basis) {
            return param("functions live on different bases");
        }
        Ok(CoefFunction {
            basis: self.basis.clone(),
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn eval(&self, point: &Point) -> Result<Complex64> {
        let row = self.basis.eval_row(point.coords())?;
        Ok(dot(&row, &self.coefficients))
    }

    /// Pointwise values at each point.
    pub fn evaluate(&self, points: &[Point]) -> Result<Vec<Complex64>> {
        points.iter().map(|p| self.eval(p)).collect()
    }

    /// Values at the nodes of `rule`, using the stored table when the rule is
    /// the one the basis was tabulated on.
    pub fn values_on(&self, rule: &QuadratureRule) -> Result<Vec<Complex64>> {
        if std::ptr::eq(rule, &**self.basis.rule()) {
            return Ok(self.basis.values_on_rule(&self.coefficients));
        }
        if rule.domain() != self.basis.domain() {
            return param("quadrature rule and function must share the domain");
        }
        Ok(rule
            .nodes()
            .map(|z| dot(&self.basis.eval_row_unchecked(z), &self.coefficients))
            .collect())
    }

    /// Discrete `L^p` norm `(Σ_q w_q |f(node_q)|^p)^{1/p}`.
    pub fn lp_norm(&self, rule: &QuadratureRule, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return param(format!("p must be a finite real >= 1, got {p}"));
        }
        let v = self.values_on(rule)?;
        Ok(discrete_lp_norm(&v, rule.weights(), p))
    }

    /// Re-expresses the function on another basis of the same family with
    /// at least the same exponents.
    pub fn transfer(&self, target: Arc<Basis>) -> Result<Self> {
        if target.domain() != self.basis.domain() {
            return param("cannot transfer between different domains");
        }
        let target_exps = target.exponents();
        let mut out = vec![ZERO; target.len()];
        for (e, c) in self.basis.exponents().iter().zip(&self.coefficients) {
            match target_exps.iter().position(|t| t == e) {
                Some(i) => out[i] = *c,
                None if c.norm() == 0.0 => {}
                None => return param(format!("target basis lacks exponent {e:?}")),
            }
        }
        CoefFunction::new(target, out)
    }
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `s^{p/2}` for `s = |v|² ≥ 0`, with fast paths for common exponents.
#[inline]
pub fn pow_half(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        s
    } else if p == 4.0 {
        s * s
    } else if p == 1.0 {
        s.sqrt()
    } else if p == 3.0 {
        s * s.sqrt()
    } else if p == 1.5 {
        let r = s.sqrt();
        r * r.sqrt()
    } else {
        s.powf(0.5 * p)
    }
}

/// `(Σ_q w_q |v_q|^p)^{1/p}`.
pub fn discrete_lp_norm(values: &[Complex64], weights: &[f64], p: f64) -> f64 {
    let s: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * pow_half(v.norm_sqr(), p))
        .sum();
    s.powf(1.0 / p)
}
