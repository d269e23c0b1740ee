//! Compiled form of a validated problem, shared by the integrator, the
//! eigenvalue solver and the combination layer: flat evaluation programs for
//! `K`, `G`, `L` and their symbolic derivatives, plus coarse coefficient
//! bounds used for step-size and frequency estimates.

use std::sync::Arc;

use crate::expr::{DomainError, Expression, Program};
use crate::problem::{BoundaryCondition, Problem, ValidationReport};
use crate::P_MAX;

#[derive(Debug)]
pub(crate) struct Context {
    pub alpha: f64,
    pub beta: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    /// Spectral shift from the validation report; `L + shift·G > 0`.
    pub shift: f64,
    pub fingerprint: u64,
    /// `K` and its derivatives, orders `0..=P_MAX-1`.
    k: Vec<Program>,
    /// `G` and its derivatives, orders `0..=P_MAX-2`.
    g: Vec<Program>,
    /// `L` and its derivatives, orders `0..=P_MAX-2`.
    l: Vec<Program>,
    pub min_k: f64,
    pub max_k: f64,
    pub min_g: f64,
    pub max_g: f64,
    pub max_abs_l: f64,
}

/// Compile `expr` together with its first `orders` symbolic derivatives.
fn chain(expr: &Expression, orders: usize) -> Vec<Program> {
    let mut programs = Vec::with_capacity(orders + 1);
    let mut current = expr.clone();
    programs.push(current.compile());
    for _ in 0..orders {
        current = current.differentiate();
        programs.push(current.compile());
    }
    programs
}

impl Context {
    pub fn new(p: &Problem, report: &ValidationReport) -> Result<Arc<Context>, DomainError> {
        let mut ctx = Context {
            alpha: p.alpha,
            beta: p.beta,
            bc_left: p.bc_left,
            bc_right: p.bc_right,
            shift: report.shift,
            fingerprint: p.fingerprint(),
            k: chain(&p.k, P_MAX - 1),
            g: chain(&p.g, P_MAX - 2),
            l: chain(&p.l, P_MAX - 2),
            min_k: f64::INFINITY,
            max_k: 0.0,
            min_g: f64::INFINITY,
            max_g: 0.0,
            max_abs_l: 0.0,
        };
        // Coarse bounds for step-size heuristics; exact positivity was the
        // validation grid's job.
        let samples = 1024usize;
        for i in 0..=samples {
            let x = ctx.alpha + (ctx.beta - ctx.alpha) * i as f64 / samples as f64;
            let kx = ctx.k[0].eval(x)?;
            let gx = ctx.g[0].eval(x)?;
            let lx = ctx.l[0].eval(x)?;
            ctx.min_k = ctx.min_k.min(kx);
            ctx.max_k = ctx.max_k.max(kx);
            ctx.min_g = ctx.min_g.min(gx);
            ctx.max_g = ctx.max_g.max(gx);
            ctx.max_abs_l = ctx.max_abs_l.max(lx.abs());
        }
        Ok(Arc::new(ctx))
    }

    pub fn span(&self) -> f64 {
        self.beta - self.alpha
    }

    /// `K^(order)(x)`, for `order <= P_MAX - 1`.
    pub fn k(&self, order: usize, x: f64) -> Result<f64, DomainError> {
        self.k[order].eval(x)
    }

    /// `G^(order)(x)`, for `order <= P_MAX - 2`.
    pub fn g(&self, order: usize, x: f64) -> Result<f64, DomainError> {
        self.g[order].eval(x)
    }

    /// `L^(order)(x)`, for `order <= P_MAX - 2`.
    pub fn l(&self, order: usize, x: f64) -> Result<f64, DomainError> {
        self.l[order].eval(x)
    }

    /// Pessimistic bound on the local oscillation frequency
    /// `sqrt((r G - L)/K)` of a solution at spectral parameter `r`.
    pub fn frequency_bound(&self, r: f64) -> f64 {
        ((r.abs() * self.max_g + self.max_abs_l) / self.min_k).sqrt()
    }
}

/// Composite Simpson quadrature over a fallible integrand; `n` is rounded up
/// to an even panel count.
pub(crate) fn simpson<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    n: usize,
) -> Result<f64, E> {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64)?;
    }
    Ok(sum * h / 3.0)
}
