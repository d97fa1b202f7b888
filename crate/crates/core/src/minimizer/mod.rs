//! The extremal problem `m_p(z₀) = inf{‖f‖_p : f(z₀) = 1}` and the kernels
//! derived from its minimizer.

mod closed_form;
pub(crate) mod solver;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use closed_form::{disk_bergman_kernel, disk_closed_form, disk_closed_form_mass};
pub use solver::SolverOptions;

use crate::error::{param, Error, Result};
use crate::function_space::{discrete_lp_norm, pow_half, Basis, CoefFunction};
use crate::geometry::Point;

/// The minimizer `m_p(·, z₀)` on a truncated basis together with `m_p(z₀)`.
#[derive(Debug, Clone)]
pub struct MinimizerSolution {
    pub z0: Point,
    pub p: f64,
    /// `m_p(z₀)`, the discrete `L^p` norm of the minimizer.
    pub m_value: f64,
    pub minimizer: CoefFunction,
    pub iterations: usize,
    pub gradient_residual: f64,
    pub smoothing_final: f64,
    /// Set when the smoothing could not be annealed to the general final level (`p = 1`).
    pub smoothed: bool,
    values: Arc<Vec<Complex64>>,
}

/// Serialized form: `{z0, p, m_value, coefficients, iterations, gradient_residual}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub z0: Point,
    pub p: f64,
    pub m_value: f64,
    pub coefficients: Vec<Complex64>,
    pub iterations: usize,
    pub gradient_residual: f64,
}

impl MinimizerSolution {
    /// Values of the minimizer at the nodes of the basis' quadrature rule.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn basis(&self) -> &Arc<Basis> {
        self.minimizer.basis()
    }

    /// `K_p(z₀) = m_p(z₀)^{-p}`.
    pub fn kernel(&self) -> f64 {
        kernel_diag(self)
    }

    /// Off-diagonal kernel `K_p(ζ, z₀) = K_p(z₀) m_p(ζ, z₀)` at each point.
    pub fn off_diagonal_kernel(&self, points: &[Point]) -> Result<Vec<Complex64>> {
        let k = self.kernel();
        Ok(self.minimizer.evaluate(points)?.into_iter().map(|v| v * k).collect())
    }

    /// `m_p(·,z₀)/m_p(z₀)` at the rule nodes (unit discrete norm).
    pub fn normalized_values(&self) -> Vec<Complex64> {
        let s = 1.0 / self.m_value;
        self.values.iter().map(|v| v * s).collect()
    }

    pub(crate) fn from_parts(
        basis: &Arc<Basis>,
        p: f64,
        z0: Point,
        m_value: f64,
        out: solver::Outcome,
    ) -> Result<Self> {
        Ok(MinimizerSolution {
            z0,
            p,
            m_value,
            minimizer: CoefFunction::new(basis.clone(), out.coefficients)?,
            iterations: out.iterations,
            gradient_residual: out.residual,
            smoothing_final: out.smoothing_final,
            smoothed: p <= 1.0,
            values: Arc::new(out.values),
        })
    }

    pub fn record(&self) -> SolutionRecord {
        SolutionRecord {
            z0: self.z0.clone(),
            p: self.p,
            m_value: self.m_value,
            coefficients: self.minimizer.coefficients().to_vec(),
            iterations: self.iterations,
            gradient_residual: self.gradient_residual,
        }
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return param(format!("p must be a finite real >= 1, got {p}"));
    }
    Ok(())
}

/// Solves for `m_p(·, z₀)` on `basis`.
///
/// Product bases are handled through the product rule
/// `m_{p,Ω₁×Ω₂}(·,(z₁,z₂)) = m_{p,Ω₁}(·,z₁)·m_{p,Ω₂}(·,z₂)`; use
/// [`solve_minimizer_direct`] to solve on the product table instead.
pub fn solve_minimizer(basis: &Arc<Basis>, p: f64, z0: &Point, opts: &SolverOptions) -> Result<MinimizerSolution> {
    check_exponent(p)?;
    if !basis.domain().contains(z0.coords()) {
        return param(format!("z0 = {z0} lies outside {}", basis.domain()));
    }
    match basis.factors() {
        Some((l, r)) => {
            let (z1, z2) = z0.split(l.domain().dim());
            let a = solve_minimizer(l, p, &z1, opts)?;
            let b = solve_minimizer(r, p, &z2, opts)?;
            Ok(combine_product(basis, &a, &b))
        }
        None => solve_minimizer_direct(basis, p, z0, opts),
    }
}

fn combine_product(basis: &Arc<Basis>, a: &MinimizerSolution, b: &MinimizerSolution) -> MinimizerSolution {
    let ca = a.minimizer.coefficients();
    let cb = b.minimizer.coefficients();
    let coefs: Vec<Complex64> = ca.iter().flat_map(|x| cb.iter().map(move |y| x * y)).collect();
    let values = basis.values_on_rule(&coefs);
    MinimizerSolution {
        z0: a.z0.concat(&b.z0),
        p: a.p,
        m_value: a.m_value * b.m_value,
        minimizer: CoefFunction::new(basis.clone(), coefs).expect("kronecker length"),
        iterations: a.iterations + b.iterations,
        gradient_residual: a.gradient_residual.max(b.gradient_residual),
        smoothing_final: a.smoothing_final.max(b.smoothing_final),
        smoothed: a.smoothed || b.smoothed,
        values: Arc::new(values),
    }
}

/// Solves on the full node-by-function table, including for product bases.
pub fn solve_minimizer_direct(
    basis: &Arc<Basis>,
    p: f64,
    z0: &Point,
    opts: &SolverOptions,
) -> Result<MinimizerSolution> {
    check_exponent(p)?;
    let row = basis.eval_row(z0.coords())?;
    let constraints = DMatrix::from_row_slice(1, row.len(), &row);
    let out = solve_constrained(basis, p, constraints, vec![Complex64::new(1.0, 0.0)], opts)?;
    let m_value = discrete_lp_norm(&out.values, basis.rule().weights(), p);
    let converged = out.converged;
    let sol = MinimizerSolution::from_parts(basis, p, z0.clone(), m_value, out)?;
    if !converged {
        return Err(Error::Convergence {
            iterations: sol.iterations,
            residual: sol.gradient_residual,
            best: Box::new(sol),
        });
    }
    Ok(sol)
}

pub(crate) fn solve_constrained(
    basis: &Arc<Basis>,
    p: f64,
    constraints: DMatrix<Complex64>,
    rhs: Vec<Complex64>,
    opts: &SolverOptions,
) -> Result<solver::Outcome> {
    let table = basis.dense_table();
    let pb = solver::Problem {
        table: &table,
        weights: basis.rule().weights(),
        constraints,
        rhs,
        p,
    };
    solver::minimize(&pb, opts)
}

/// `K_p(z₀) = m_p(z₀)^{-p}`.
pub fn kernel_diag(sol: &MinimizerSolution) -> f64 {
    sol.m_value.powf(-sol.p)
}

/// `|f(z₀) − m_p(z₀)^{-p} ∫ |m_p(w,z₀)|^{p−2} conj(m_p(w,z₀)) f(w) dw|`,
/// with the integral taken by the solution's own quadrature rule.
///
/// The reproducing identity is the first-order optimality condition of the
/// extremal problem, so a small value certifies the discrete solution.
pub fn reproducing_residual(f: &CoefFunction, sol: &MinimizerSolution) -> Result<f64> {
    let rule = sol.basis().rule();
    if f.basis().domain() != sol.basis().domain() {
        return param("function and solution must share the domain");
    }
    let fv = f.values_on(rule)?;
    let p = sol.p;
    let integral: Complex64 = sol
        .values()
        .iter()
        .zip(&fv)
        .zip(rule.weights())
        .map(|((m, fq), w)| {
            let s = m.norm_sqr();
            if s == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                m.conj() * fq * (w * pow_half(s, p - 2.0))
            }
        })
        .sum();
    let lhs = f.eval(&sol.z0)?;
    Ok((lhs - integral * sol.m_value.powf(-p)).norm())
}
