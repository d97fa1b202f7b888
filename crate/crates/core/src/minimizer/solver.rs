//! Smoothed `L^p` minimization over an affine slice of coefficient space.
//!
//! Minimizes `F(c) = Σ_q w_q (|E c|_q² + ε²)^{p/2}` subject to `C c = d`.
//! The constraint is eliminated through an orthonormal null-space basis, so
//! the remaining problem is smooth, convex and unconstrained. Each smoothing
//! stage runs damped Newton iterations with the exact Hessian, warm-started
//! from the previous stage; the first stage starts from the `p = 2` solution.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Cap on Newton iterations summed over all smoothing stages.
    pub max_iterations: usize,
    /// Stop a stage once `‖∇F‖₂ / F` falls below this.
    pub gradient_tolerance: f64,
    pub smoothing_initial: f64,
    pub smoothing_decay: f64,
    pub smoothing_final: f64,
    /// Final smoothing used when `p = 1`; that objective is never annealed fully.
    pub smoothing_final_p1: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            smoothing_initial: 1e-2,
            smoothing_decay: 0.1,
            smoothing_final: 1e-10,
            smoothing_final_p1: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.gradient_tolerance,
            self.smoothing_initial,
            self.smoothing_final,
            self.smoothing_final_p1,
            self.armijo,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return param("solver tolerances and smoothing levels must be positive");
        }
        if !(self.smoothing_decay > 0.0 && self.smoothing_decay < 1.0) {
            return param("smoothing decay must lie in (0,1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return param("backtracking factor must lie in (0,1)");
        }
        if self.max_iterations == 0 {
            return param("max_iterations must be positive");
        }
        Ok(())
    }

    /// Smoothing levels visited for exponent `p`.
    pub fn schedule(&self, p: f64) -> Vec<f64> {
        let last = if p <= 1.0 {
            self.smoothing_final_p1.max(self.smoothing_final)
        } else {
            self.smoothing_final
        };
        let mut eps = vec![];
        let mut e = self.smoothing_initial.max(last);
        loop {
            eps.push(e);
            if e <= last * (1.0 + 1e-12) {
                break;
            }
            e = (e * self.smoothing_decay).max(last);
        }
        eps
    }
}

pub(crate) struct Problem<'a> {
    /// Basis values, one row per node.
    pub table: &'a DMatrix<C>,
    pub weights: &'a [f64],
    /// One row per linear constraint on the coefficients.
    pub constraints: DMatrix<C>,
    pub rhs: Vec<C>,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub coefficients: Vec<C>,
    pub values: Vec<C>,
    pub iterations: usize,
    pub residual: f64,
    pub smoothing_final: f64,
    pub converged: bool,
}

/// Reduced unconstrained problem `g(y) = f0 + Ψ y` in scaled coordinates.
struct Reduced {
    scale: Vec<f64>,
    c0: DVector<C>,
    null: DMatrix<C>,
    f0: DVector<C>,
    psi: DMatrix<C>,
}

fn reduce(pb: &Problem<'_>) -> Result<Reduced> {
    let (nq, n) = pb.table.shape();
    let m = pb.constraints.nrows();
    if pb.constraints.ncols() != n || pb.rhs.len() != m || pb.weights.len() != nq {
        return param("inconsistent problem dimensions");
    }
    if m > n {
        return Err(Error::Rank(format!("{m} constraints but only {n} basis functions")));
    }
    // unit discrete L² norm per column
    let scale: Vec<f64> = (0..n)
        .map(|k| {
            let s: f64 = pb
                .table
                .column(k)
                .iter()
                .zip(pb.weights)
                .map(|(v, w)| w * v.norm_sqr())
                .sum();
            if s > 0.0 {
                1.0 / s.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut cs = pb.constraints.clone();
    for k in 0..n {
        cs.column_mut(k).scale_mut(scale[k]);
    }
    // QR of [Cᴴ | I] yields an orthonormal basis of range(Cᴴ) followed by its complement.
    let mut aug = DMatrix::from_element(n, m + n, C::new(0.0, 0.0));
    aug.view_mut((0, 0), (n, m)).copy_from(&cs.adjoint());
    for i in 0..n {
        aug[(i, m + i)] = C::new(1.0, 0.0);
    }
    let qr = aug.qr();
    let q = qr.q();
    let r = qr.r();
    let row_scale = (0..m)
        .map(|i| cs.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    for i in 0..m {
        if r[(i, i)].norm() <= 1e-10 * row_scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Rank(format!(
                "constraint {i} is linearly dependent on the others over this basis"
            )));
        }
    }
    // C_s = R11ᴴ Q1ᴴ, so c0 = Q1 x with R11ᴴ x = d.
    let r11 = r.view((0, 0), (m, m)).into_owned();
    let mut x = DVector::from_column_slice(&pb.rhs);
    let ok = r11.adjoint().solve_lower_triangular_mut(&mut x);
    if !ok {
        return Err(Error::Rank("singular constraint block".into()));
    }
    let q1 = q.view((0, 0), (n, m)).into_owned();
    let c0 = &q1 * x;
    let null = q.view((0, m), (n, n - m)).into_owned();
    let mut es = pb.table.clone();
    for k in 0..n {
        es.column_mut(k).scale_mut(scale[k]);
    }
    let f0 = &es * &c0;
    let psi = &es * &null;
    Ok(Reduced {
        scale,
        c0,
        null,
        f0,
        psi,
    })
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

fn values(red: &Reduced, y: &DVector<C>) -> DVector<C> {
    if y.is_empty() {
        red.f0.clone()
    } else {
        &red.f0 + &red.psi * y
    }
}

fn objective(g: &DVector<C>, w: &[f64], p: f64, eps2: f64) -> f64 {
    g.iter()
        .zip(w)
        .map(|(v, wq)| wq * crate::function_space::pow_half(v.norm_sqr() + eps2, p))
        .sum()
}

fn evaluate(red: &Reduced, g: &DVector<C>, w: &[f64], p: f64, eps2: f64, with_hessian: bool) -> Eval {
    let nq = g.len();
    let r = red.psi.ncols();
    let half = 0.5 * p;
    let mut value = 0.0;
    let mut d1 = vec![0.0; nq];
    let mut d2 = vec![0.0; nq];
    for q in 0..nq {
        let t = g[q].norm_sqr() + eps2;
        let tp = if p == 2.0 { 1.0 / t } else { t.powf(half - 2.0) };
        value += w[q] * tp * t * t;
        d1[q] = 2.0 * w[q] * half * tp * t;
        d2[q] = 4.0 * w[q] * half * (half - 1.0) * tp;
    }
    // G = Ψᴴ (d1 ∘ g)
    let weighted = DVector::from_iterator(nq, g.iter().zip(&d1).map(|(v, d)| v * *d));
    let gc = red.psi.ad_mul(&weighted);
    let mut grad = DVector::zeros(2 * r);
    for j in 0..r {
        grad[j] = gc[j].re;
        grad[r + j] = gc[j].im;
    }
    let mut hess = DMatrix::zeros(0, 0);
    if with_hessian && r > 0 {
        let mut b = red.psi.clone();
        for q in 0..nq {
            b.row_mut(q).scale_mut(d1[q].sqrt());
        }
        let mcx = b.ad_mul(&b);
        let mut h = DMatrix::zeros(2 * r, 2 * r);
        for i in 0..r {
            for j in 0..r {
                let v = mcx[(i, j)];
                h[(i, j)] = v.re;
                h[(r + i, r + j)] = v.re;
                h[(i, r + j)] = -v.im;
                h[(r + i, j)] = v.im;
            }
        }
        if p != 2.0 {
            let mut vmat = DMatrix::zeros(nq, 2 * r);
            let mut ve = DMatrix::zeros(nq, 2 * r);
            for q in 0..nq {
                let gq = g[q];
                for j in 0..r {
                    let u = red.psi[(q, j)].conj() * gq;
                    vmat[(q, j)] = u.re;
                    vmat[(q, r + j)] = u.im;
                    ve[(q, j)] = u.re * d2[q];
                    ve[(q, r + j)] = u.im * d2[q];
                }
            }
            h += vmat.tr_mul(&ve);
        }
        hess = h;
    }
    Eval { value, grad, hess }
}

fn to_complex(x: &DVector<f64>) -> DVector<C> {
    let r = x.len() / 2;
    DVector::from_iterator(r, (0..r).map(|j| C::new(x[j], x[r + j])))
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let n = grad.len();
    let trace: f64 = (0..n).map(|i| hess[(i, i)].abs()).sum::<f64>() / n.max(1) as f64;
    let mut shift = 0.0;
    loop {
        let mut h = hess.clone();
        for i in 0..n {
            h[(i, i)] += shift;
        }
        if let Some(ch) = Cholesky::new(h) {
            let d = ch.solve(grad);
            if d.iter().all(|v| v.is_finite()) {
                return -d;
            }
        }
        shift = if shift == 0.0 { 1e-12 * trace.max(1e-300) } else { shift * 10.0 };
        if shift > 1e6 * trace.max(1.0) {
            return -grad.clone();
        }
    }
}

/// Solves the smoothed problem. `Err` is returned only for malformed input or
/// degenerate constraints; a non-converged run comes back with `converged = false`.
pub(crate) fn minimize(pb: &Problem<'_>, opts: &SolverOptions) -> Result<Outcome> {
    opts.validate()?;
    let red = reduce(pb)?;
    let w = pb.weights;
    let p = pb.p;
    let r = red.psi.ncols();

    // p = 2 warm start: (Ψᴴ W Ψ) y = -Ψᴴ W f0
    let mut y = DVector::from_element(r, C::new(0.0, 0.0));
    if r > 0 {
        let mut wpsi = red.psi.clone();
        for q in 0..wpsi.nrows() {
            wpsi.row_mut(q).scale_mut(w[q]);
        }
        let gram = red.psi.ad_mul(&wpsi);
        let rhs = -wpsi.ad_mul(&red.f0);
        if let Some(ch) = Cholesky::new(gram.clone()) {
            y = ch.solve(&rhs);
        } else if let Some(sol) = gram.lu().solve(&rhs) {
            y = sol;
        }
    }

    let mut x = DVector::zeros(2 * r);
    for j in 0..r {
        x[j] = y[j].re;
        x[r + j] = y[j].im;
    }

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = true;
    let schedule = opts.schedule(p);
    let eps_last = *schedule.last().expect("non-empty schedule");

    'stages: for &eps in &schedule {
        let eps2 = eps * eps;
        loop {
            let g = values(&red, &to_complex(&x));
            let cheap = evaluate(&red, &g, w, p, eps2, false);
            residual = cheap.grad.norm() / cheap.value.max(f64::MIN_POSITIVE);
            if residual <= opts.gradient_tolerance || r == 0 {
                break;
            }
            if iterations >= opts.max_iterations {
                converged = false;
                break 'stages;
            }
            let ev = evaluate(&red, &g, w, p, eps2, true);
            let dir = newton_direction(&ev.hess, &ev.grad);
            let slope = ev.grad.dot(&dir);
            iterations += 1;
            if -slope <= 1e-28 * ev.value {
                // decrement at roundoff level
                break;
            }
            // below this the decrease is invisible in F itself
            let noise = 64.0 * f64::EPSILON * ev.value.abs();
            let flat = -slope <= noise;
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..opts.max_backtracks {
                let trial = &x + &dir * step;
                let ft = objective(&values(&red, &to_complex(&trial)), w, p, eps2);
                if ft <= ev.value + opts.armijo * step * slope || (flat && ft <= ev.value + noise) {
                    x = trial;
                    accepted = true;
                    break;
                }
                step *= opts.backtrack;
            }
            if !accepted {
                break;
            }
        }
    }
    if residual > opts.gradient_tolerance && r > 0 {
        // a stage that ended on a roundoff plateau still counts when the
        // residual is within a few orders of the target
        converged = converged && residual <= 1e3 * opts.gradient_tolerance;
    }

    let y = to_complex(&x);
    let cs = if r > 0 { &red.c0 + &red.null * &y } else { red.c0.clone() };
    let coefficients: Vec<C> = cs.iter().zip(&red.scale).map(|(c, s)| c * *s).collect();
    let values = values(&red, &y).as_slice().to_vec();
    Ok(Outcome {
        coefficients,
        values,
        iterations,
        residual,
        smoothing_final: eps_last,
        converged,
    })
}
