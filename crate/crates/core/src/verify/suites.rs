//! Named, seeded collections of checks.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diagnostics::*;
use super::inequalities::*;
use super::report::{Params, VerificationReport};
use crate::distance::Workspace;
use crate::error::{param, Result};
use crate::function_space::{BasisSpec, CoefFunction, Discretization};
use crate::geometry::{DomainSpec, Point};
use crate::minimizer::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Solver minimizer against the disk closed form.
    DiskOracle,
    /// `m_p(w)` against the squared and unsquared mass formulas.
    MassFormula,
    /// `ρ₂` against its closed form.
    P2Distance,
    MetricAxioms,
    /// Möbius invariance of `ρ_p` and the transformation law of `m_p`.
    Invariance,
    Reproducing,
    AppendixConstants,
    MainInequality,
    ApplicationInequality,
    /// Bidisc subadditivity of `ρ_p` and the lower bound for `B_p`.
    Product,
    TaylorInequalities,
    Holder,
    Boundary,
    PContinuity,
    /// Every suite above.
    All,
}

impl Suite {
    pub const EVERY: [Suite; 14] = [
        Suite::DiskOracle,
        Suite::MassFormula,
        Suite::P2Distance,
        Suite::MetricAxioms,
        Suite::Invariance,
        Suite::Reproducing,
        Suite::AppendixConstants,
        Suite::MainInequality,
        Suite::ApplicationInequality,
        Suite::Product,
        Suite::TaylorInequalities,
        Suite::Holder,
        Suite::Boundary,
        Suite::PContinuity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DiskOracle => "disk-oracle",
            Suite::MassFormula => "mass-formula",
            Suite::P2Distance => "p2-distance",
            Suite::MetricAxioms => "metric-axioms",
            Suite::Invariance => "invariance",
            Suite::Reproducing => "reproducing",
            Suite::AppendixConstants => "appendix-constants",
            Suite::MainInequality => "main-inequality",
            Suite::ApplicationInequality => "application-inequality",
            Suite::Product => "product",
            Suite::TaylorInequalities => "taylor-inequalities",
            Suite::Holder => "holder",
            Suite::Boundary => "boundary",
            Suite::PContinuity => "p-continuity",
            Suite::All => "all",
        }
    }

    /// Exponents used when none are configured.
    pub fn default_exponents(self) -> Vec<f64> {
        match self {
            Suite::DiskOracle | Suite::MassFormula => vec![2.0, 3.0, 4.0],
            Suite::P2Distance | Suite::Product | Suite::Boundary | Suite::PContinuity => vec![2.0],
            Suite::MetricAxioms => vec![1.5, 2.0, 4.0],
            Suite::Invariance => vec![2.0, 4.0],
            Suite::Reproducing => vec![1.5, 2.0, 3.0],
            Suite::AppendixConstants => vec![2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0],
            Suite::MainInequality => vec![3.0, 4.0],
            Suite::ApplicationInequality => vec![3.0],
            Suite::TaylorInequalities => vec![1.5, 2.0, 3.0, 4.7],
            Suite::Holder => vec![4.0, 1.5],
            Suite::All => vec![],
        }
    }

    /// `All` expanded, duplicates removed, order kept.
    pub fn expand(list: &[Suite]) -> Vec<Suite> {
        let mut out: Vec<Suite> = vec![];
        for s in list {
            let items: Vec<Suite> = if *s == Suite::All { Suite::EVERY.to_vec() } else { vec![*s] };
            for i in items {
                if !out.contains(&i) {
                    out.push(i);
                }
            }
        }
        out
    }

    pub fn parse(name: &str) -> Result<Suite> {
        Suite::EVERY
            .iter()
            .chain([Suite::All].iter())
            .find(|s| s.name() == name)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::EVERY.iter().map(|s| s.name()).chain(["all"]).collect();
                crate::Error::Config(format!("unknown suite `{name}`; valid suites: {}", names.join(", ")))
            })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sample sizes and fixed inputs of the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSettings {
    /// Triples for the metric axioms, drawn from a pool of solved points.
    pub triples: usize,
    pub pool: usize,
    /// Radius of the disk region sampled for random points.
    pub sample_radius: f64,
    /// Pairs for the p = 2 closed-form comparison.
    pub oracle_pairs: usize,
    /// `(z, f)` pairs for the two-sided bound and `(z, w)` pairs for the sharpened bound.
    pub pairs: usize,
    pub taylor_cases: usize,
    /// Bound on `|a|`, `|b|` in the scalar fuzz.
    pub taylor_radius: f64,
    pub invariance_cases: usize,
    pub reproducing_functions: usize,
    pub holder_pairs: usize,
    pub boundary_k: u32,
    pub sweep_q: Vec<f64>,
    pub product_pairs: usize,
    /// Factor discretization for bidisc distances.
    pub product_degree: usize,
    pub product_quad: (usize, usize),
    /// Factor discretization for the bidisc metric, which needs the full product table.
    pub product_metric_degree: usize,
    pub product_metric_quad: (usize, usize),
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings {
            triples: 1000,
            pool: 32,
            sample_radius: 0.6,
            oracle_pairs: 25,
            pairs: 50,
            taylor_cases: 1000,
            taylor_radius: 2.0,
            invariance_cases: 10,
            reproducing_functions: 10,
            holder_pairs: 8,
            boundary_k: 8,
            sweep_q: vec![1.8, 1.9, 1.95, 2.05, 2.1, 2.2],
            product_pairs: 20,
            product_degree: 12,
            product_quad: (16, 32),
            product_metric_degree: 3,
            product_metric_quad: (8, 16),
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Uniform in the disk `|ζ| ≤ radius`.
pub fn sample_disk<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>())
}

/// Runs suites on one disk discretization with fixed seeds.
pub struct Verifier {
    discretization: Discretization,
    solver: SolverOptions,
    seed: u64,
    exponents: Option<Vec<f64>>,
    settings: SuiteSettings,
    ws: Workspace,
    refined: OnceLock<Workspace>,
}

impl Verifier {
    /// `exponents` replaces every suite's default exponents when given.
    pub fn new(
        discretization: Discretization,
        solver: SolverOptions,
        seed: u64,
        exponents: Option<Vec<f64>>,
        settings: SuiteSettings,
    ) -> Result<Self> {
        if discretization.domain != DomainSpec::UnitDisk {
            return param("verification suites run on the unit disk (products are built from it)");
        }
        let ws = Workspace::from_discretization(&discretization, solver)?;
        Ok(Verifier {
            discretization,
            solver,
            seed,
            exponents,
            settings,
            ws,
            refined: OnceLock::new(),
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    pub fn settings(&self) -> &SuiteSettings {
        &self.settings
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(suite.name()))
    }

    fn exponents(&self, suite: Suite) -> Vec<f64> {
        self.exponents.clone().unwrap_or_else(|| suite.default_exponents())
    }

    fn refined(&self) -> Result<&Workspace> {
        if let Some(w) = self.refined.get() {
            return Ok(w);
        }
        let w = Workspace::from_discretization(&self.discretization.refined(), self.solver)?;
        Ok(self.refined.get_or_init(|| w))
    }

    /// Runs `case` on the base workspace and, if any report fails, once more at
    /// doubled degree and resolution; the second run's reports are returned.
    fn checked<F>(&self, case: F) -> Result<Vec<VerificationReport>>
    where
        F: Fn(&Workspace) -> Result<Vec<VerificationReport>>,
    {
        let first = case(&self.ws)?;
        if first.iter().all(|r| r.passed()) {
            return Ok(first);
        }
        let mut again = case(self.refined()?)?;
        for r in &mut again {
            r.refined = true;
        }
        Ok(again)
    }

    fn par_cases<T, F>(&self, cases: Vec<T>, f: F) -> Result<Vec<VerificationReport>>
    where
        T: Sync,
        F: Fn(&Workspace, &T) -> Result<Vec<VerificationReport>> + Sync,
    {
        let parts: Vec<Vec<VerificationReport>> = cases
            .par_iter()
            .map(|c| self.checked(|ws| f(ws, c)))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().flatten().collect())
    }

    pub fn run(&self, suite: Suite) -> Result<Vec<VerificationReport>> {
        let mut rng = self.rng(suite);
        let s = &self.settings;
        let ps = self.exponents(suite);
        match suite {
            Suite::All => {
                let mut out = vec![];
                for s in Suite::EVERY {
                    out.extend(self.run(s)?);
                }
                Ok(out)
            }
            Suite::DiskOracle => {
                let w: Point = 0.5.into();
                let probes: Vec<Point> = (0..20).map(|_| sample_disk(&mut rng, 0.9).into()).collect();
                self.par_cases(ps, |ws, &p| {
                    let tol = if p == 2.0 { 1e-6 } else { 1e-5 };
                    check_disk_minimizer(ws, p, &w, &probes, tol)
                })
            }
            Suite::MassFormula => self.par_cases(ps, |ws, &p| check_disk_mass(ws, p, &0.5.into(), 1e-6, 1e-2)),
            Suite::P2Distance => {
                let mut cases: Vec<(Point, Point, f64)> = vec![(0.0.into(), 0.5.into(), 1e-4)];
                for _ in 0..s.oracle_pairs {
                    let z = sample_disk(&mut rng, s.sample_radius);
                    let w = sample_disk(&mut rng, s.sample_radius);
                    cases.push((z.into(), w.into(), 1e-4));
                }
                self.par_cases(cases, |ws, (z, w, tol)| Ok(vec![check_p2_oracle(ws, z, w, *tol)?]))
            }
            Suite::MetricAxioms => {
                let pool: Vec<Point> = (0..s.pool.max(1)).map(|_| sample_disk(&mut rng, s.sample_radius).into()).collect();
                let mut triples = vec![];
                for _ in 0..s.triples {
                    let idx: [usize; 3] = std::array::from_fn(|_| rng.gen_range(0..pool.len()));
                    triples.push(idx);
                }
                let mut out = vec![];
                for p in ps {
                    pool.par_iter()
                        .map(|z| self.ws.minimizer(p, z).map(|_| ()))
                        .collect::<Result<Vec<()>>>()?;
                    out.extend(self.par_cases(triples.clone(), |ws, t| {
                        check_metric_axioms(ws, p, &pool[t[0]], &pool[t[1]], &pool[t[2]])
                    })?);
                }
                Ok(out)
            }
            Suite::Invariance => {
                let mut cases = vec![];
                for p in &ps {
                    for _ in 0..s.invariance_cases {
                        let a = sample_disk(&mut rng, 0.3);
                        let phi = TAU * rng.gen::<f64>();
                        let z = sample_disk(&mut rng, 0.3);
                        let w = sample_disk(&mut rng, 0.3);
                        cases.push((*p, Mobius::new(a, phi)?, Point::from(z), Point::from(w)));
                    }
                }
                self.par_cases(cases, |ws, (p, m, z, w)| check_invariance(ws, *p, z, w, *m, 1e-3, 1e-4))
            }
            Suite::Reproducing => {
                let basis = self.ws.basis().clone();
                let n = basis.len().min(9);
                let mut fs = vec![];
                for i in 0..s.reproducing_functions {
                    let coefs: Vec<Complex64> = (0..basis.len())
                        .map(|k| {
                            if k < n {
                                let c = sample_disk(&mut rng, 1.0);
                                c / (1 + k + i % 3) as f64
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        })
                        .collect();
                    fs.push(CoefFunction::new(basis.clone(), coefs)?);
                }
                let mut cases = vec![];
                for p in &ps {
                    for z0 in [0.0, 0.3] {
                        for f in &fs {
                            cases.push((*p, Point::from(z0), f.clone()));
                        }
                    }
                }
                self.par_cases(cases, |ws, (p, z0, f)| {
                    let f = f.transfer(ws.basis().clone())?;
                    Ok(vec![check_reproducing(ws, *p, z0, &f, 1e-5)?])
                })
            }
            Suite::AppendixConstants => {
                let mut out = vec![];
                for p in ps {
                    let k = appendix_constants(p)?;
                    let f1 = |u: f64| u.powf(p - 1.0) / (2.0 * (p - 1.0)) + u.powf(p) / p;
                    let f2 = |u: f64| u.powf(p - 1.0) / (2.0 * (p - 1.0)) - u.powf(p) / p;
                    let params = || Params::new(p);
                    out.push(VerificationReport::close("appendix-i1", params(), k.i1, f1(0.5) - f1(0.25), 1e-9));
                    out.push(VerificationReport::close("appendix-i2", params(), k.i2, f2(0.5) - f2(0.25), 1e-9));
                    out.push(VerificationReport::new("appendix-c-positive", params(), 0.0, k.c_p, 0.0));
                    // c_p x^p ≤ C_p x² on [0, 2] is tightest at x = 2
                    out.push(VerificationReport::new(
                        "appendix-bounds-consistent",
                        params().with("c_p", k.c_p).with("C_p", k.big_c_p),
                        k.c_p * 2f64.powf(p - 2.0),
                        k.big_c_p,
                        0.0,
                    ));
                }
                Ok(out)
            }
            Suite::MainInequality => {
                let basis = self.ws.basis().clone();
                let mut cases = vec![];
                for p in &ps {
                    for i in 0..s.pairs {
                        let z: Point = sample_disk(&mut rng, 0.5).into();
                        let coefs: Vec<Complex64> = (0..basis.len())
                            .map(|k| sample_disk(&mut rng, 1.0) * 0.7f64.powi(k as i32))
                            .collect();
                        // every other case is a small perturbation of the minimizer
                        let near = i % 2 == 1;
                        let size = 10f64.powf(-3.0 * rng.gen::<f64>());
                        cases.push((*p, z, coefs, near, size));
                    }
                }
                self.par_cases(cases, |ws, (p, z, coefs, near, size)| {
                    let rule = ws.rule();
                    let mut f = CoefFunction::new(self.ws.basis().clone(), coefs.clone())?.transfer(ws.basis().clone())?;
                    if *near {
                        let m = ws.minimizer(*p, z)?;
                        let g = m.minimizer.scaled(Complex64::new(1.0 / m.m_value, 0.0));
                        let fnorm = f.lp_norm(rule, *p)?;
                        f = g.add(&f.scaled(Complex64::new(size / fnorm, 0.0)))?;
                    }
                    let n = f.lp_norm(rule, *p)?;
                    let f = f.scaled(Complex64::new(1.0 / n, 0.0));
                    check_main_inequality(ws, *p, z, &f)
                })
            }
            Suite::ApplicationInequality => {
                let mut cases = vec![];
                for p in &ps {
                    for _ in 0..s.pairs {
                        let z = sample_disk(&mut rng, 0.5);
                        let w = sample_disk(&mut rng, 0.5);
                        cases.push((*p, Point::from(z), Point::from(w)));
                    }
                }
                self.par_cases(cases, |ws, (p, z, w)| Ok(vec![check_application_inequality(ws, *p, z, w)?]))
            }
            Suite::Product => self.run_product(&mut rng, &ps),
            Suite::TaylorInequalities => {
                let mut cases = vec![];
                for p in &ps {
                    for _ in 0..s.taylor_cases {
                        let a = sample_disk(&mut rng, s.taylor_radius);
                        let b = sample_disk(&mut rng, s.taylor_radius);
                        cases.push((*p, a, b));
                    }
                }
                let parts: Vec<Vec<VerificationReport>> = cases
                    .par_iter()
                    .map(|(p, a, b)| check_taylor_inequalities(*a, *b, *p))
                    .collect::<Result<_>>()?;
                Ok(parts.into_iter().flatten().collect())
            }
            Suite::Holder => {
                let mut out = vec![];
                for p in ps {
                    let seed: u64 = rng.gen();
                    out.extend(self.checked(|ws| {
                        let mut r = ChaCha8Rng::seed_from_u64(seed);
                        check_holder(ws, p, Complex64::new(0.0, 0.0), 0.2, s.holder_pairs, &mut r)
                    })?);
                }
                Ok(out)
            }
            Suite::Boundary => {
                let mut out = vec![];
                for p in ps {
                    let d = boundary_diagnostics(&BoundarySetup {
                        p,
                        z: Complex64::new(0.0, 0.0),
                        k_max: s.boundary_k,
                        monotone_from: 1,
                        threshold: 1e-2,
                        f: None,
                        cross_check: Some(&self.ws),
                    })?;
                    out.extend(d.reports);
                }
                Ok(out)
            }
            Suite::PContinuity => {
                let mut out = vec![];
                for p in ps {
                    out.extend(self.checked(|ws| {
                        Ok(p_continuity_sweep(ws, &0.0.into(), &0.5.into(), p, &s.sweep_q, 0.05)?.reports)
                    })?);
                }
                Ok(out)
            }
        }
    }

    fn run_product(&self, rng: &mut ChaCha8Rng, ps: &[f64]) -> Result<Vec<VerificationReport>> {
        let s = &self.settings;
        let bidisc = |deg: usize, (r, a): (usize, usize)| {
            Workspace::from_discretization(
                &Discretization::new(DomainSpec::bidisc(), BasisSpec::uniform(deg), r, a),
                self.solver,
            )
        };
        let ws = bidisc(s.product_degree, s.product_quad)?;
        let (left, right) = ws.factors().expect("bidisc has factors");
        let mut cases = vec![];
        for p in ps {
            for _ in 0..s.product_pairs {
                let z = Point::pair(sample_disk(rng, 0.5), sample_disk(rng, 0.5));
                let w = Point::pair(sample_disk(rng, 0.5), sample_disk(rng, 0.5));
                cases.push((*p, z, w));
            }
        }
        let mut out: Vec<VerificationReport> = cases
            .par_iter()
            .map(|(p, z, w)| check_product_subadditivity(&ws, &left, &right, *p, z, w, 1e-6))
            .collect::<Result<_>>()?;

        let mws = bidisc(s.product_metric_degree, s.product_metric_quad)?;
        let (ml, mr) = mws.factors().expect("bidisc has factors");
        let origin = Point::pair(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let x = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for &p in ps {
            out.push(check_product_metric(&mws, &ml, &mr, p, &origin, &x, 1e-3)?);
            if p == 2.0 {
                let disk = self.ws.metric(2.0, &0.0.into(), &[Complex64::new(1.0, 0.0)])?.b_value;
                out.push(VerificationReport::close("disk-metric-origin", Params::new(2.0), disk, SQRT_2, 1e-3));
                let b = mws.metric(2.0, &origin, &x)?.b_value;
                out.push(VerificationReport::new("bidisc-metric-origin", Params::new(2.0), SQRT_2, b, 1e-3));
            }
        }
        Ok(out)
    }
}
