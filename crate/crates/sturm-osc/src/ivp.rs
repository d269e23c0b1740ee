//! Initial-value integration of `(K V′)′ + (r G − L) V = 0` with dense
//! output, the Prüfer phase, and exact higher derivatives of solutions.
//!
//! The second-order equation is integrated as the first-order system in the
//! classical variables `V` and `W = K V′`:
//!
//! ```text
//! V′ = W / K,        W′ = (L − r G) V,
//! ```
//!
//! together with the Prüfer angle `θ = atan2(V, W)` as a third component,
//!
//! ```text
//! θ′ = cos²θ / K + (r G − L) sin²θ,
//! ```
//!
//! so the angle is tracked continuously instead of being reconstructed from
//! `atan2` branches. `θ` is strictly increasing through every multiple of
//! `π` (there `θ′ = 1/K > 0`), which is what makes it a robust zero counter:
//! `V` has exactly `floor(θ(x)/π)` zeros in `]α, x]`.
//!
//! Higher derivatives of `V` are *not* obtained from the dense polynomials;
//! they follow exactly from the ODE by Leibniz's rule (see
//! [`Trajectory::derivative`]), which is what lets zero multiplicities be
//! probed at full precision.

use std::sync::Arc;

use thiserror::Error;

use crate::context::Context;
use crate::expr::DomainError;
use crate::problem::{BoundaryCondition, Problem, ValidationReport};
use crate::P_MAX;

/// Default relative tolerance for the local error control.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Default absolute tolerance for the local error control.
pub const DEFAULT_ATOL: f64 = 1e-12;

/// Integration failure.
#[derive(Debug, Error)]
pub enum IvpError {
    /// Both initial values are zero; only the trivial solution fits.
    #[error("initial data (v0, kv0) = (0, 0) only produces the zero solution")]
    TrivialInitialData,
    /// The error controller pushed the step below the representable floor,
    /// typically because a coefficient is not actually smooth and positive.
    #[error("step size underflow near x = {x:e}")]
    StepSizeUnderflow {
        /// Location where the integration stalled.
        x: f64,
    },
    /// A coefficient expression failed to evaluate at a quadrature or stage
    /// point.
    #[error("coefficient evaluation failed during integration: {0}")]
    Coefficient(#[from] DomainError),
    /// Derivative order above [`P_MAX`] requested.
    #[error("derivative order {order} exceeds the supported maximum {P_MAX}")]
    OrderOutOfRange {
        /// Requested order.
        order: usize,
    },
}

/// One accepted step: quintic Hermite polynomials for `V` and `W` (fit to
/// values, first derivatives from the ODE right-hand side, and second
/// derivatives from the differentiated ODE at both nodes) and a cubic for
/// the Prüfer angle. Coefficients are in the scaled variable
/// `s = (x - x0)/h ∈ [0, 1]`.
#[derive(Debug, Clone)]
struct Segment {
    x0: f64,
    h: f64,
    v: [f64; 6],
    w: [f64; 6],
    th: [f64; 4],
}

/// Quintic Hermite coefficients from node values, scaled first derivatives
/// `m = h·y′` and scaled second derivatives `k = h²·y″`. Reproduces any
/// polynomial of degree ≤ 5 exactly.
fn quintic(y0: f64, y1: f64, m0: f64, m1: f64, k0: f64, k1: f64) -> [f64; 6] {
    let a = y1 - y0 - m0 - 0.5 * k0;
    let b = m1 - m0 - k0;
    let c = k1 - k0;
    [
        y0,
        m0,
        0.5 * k0,
        10.0 * a - 4.0 * b + 0.5 * c,
        -15.0 * a + 7.0 * b - c,
        6.0 * a - 3.0 * b + 0.5 * c,
    ]
}

/// Cubic Hermite coefficients from node values and scaled derivatives.
fn cubic(y0: f64, y1: f64, m0: f64, m1: f64) -> [f64; 4] {
    [
        y0,
        m0,
        3.0 * (y1 - y0) - 2.0 * m0 - m1,
        m1 + m0 - 2.0 * (y1 - y0),
    ]
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * s + ci)
}

#[cfg(test)]
fn horner_d1(c: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for i in (1..c.len()).rev() {
        acc = acc * s + i as f64 * c[i];
    }
    acc
}

/// Dense solution of the first-order system over `[alpha, beta]`.
///
/// Values of `V`, `W = K V′` and the Prüfer angle are available anywhere on
/// the interval; evaluation clamps to the endpoints so root-finders may
/// overshoot by a rounding error without panicking. Cloning is cheap for the
/// callers that need to share one (wrap in [`Arc`]); the struct itself is
/// immutable after construction.
#[derive(Debug)]
pub struct Trajectory {
    ctx: Arc<Context>,
    r: f64,
    xs: Vec<f64>,
    segments: Vec<Segment>,
    accepted: usize,
    rejected: usize,
}

impl Trajectory {
    /// Left endpoint of the integration interval.
    pub fn alpha(&self) -> f64 {
        self.ctx.alpha
    }

    /// Right endpoint of the integration interval.
    pub fn beta(&self) -> f64 {
        self.ctx.beta
    }

    /// Spectral parameter this trajectory was integrated at.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Accepted step endpoints, `alpha = x_0 < x_1 < … < x_n = beta`.
    pub fn mesh(&self) -> &[f64] {
        &self.xs
    }

    /// Number of accepted / rejected steps, for diagnostics.
    pub fn step_counts(&self) -> (usize, usize) {
        (self.accepted, self.rejected)
    }

    fn segment_at(&self, x: f64) -> (&Segment, f64) {
        let idx = match self.xs.binary_search_by(|xi| xi.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.segments.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.segments.len() - 1),
        };
        let seg = &self.segments[idx];
        let s = ((x - seg.x0) / seg.h).clamp(0.0, 1.0);
        (seg, s)
    }

    /// `V(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let (seg, s) = self.segment_at(x);
        horner(&seg.v, s)
    }

    /// `W(x) = (K V′)(x)`.
    pub fn kv(&self, x: f64) -> f64 {
        let (seg, s) = self.segment_at(x);
        horner(&seg.w, s)
    }

    /// Prüfer angle `θ(x)`, continuous and increasing through multiples of π.
    pub fn theta(&self, x: f64) -> f64 {
        let (seg, s) = self.segment_at(x);
        horner(&seg.th, s)
    }

    /// `θ(beta)`, the quantity the eigenvalue shooting targets.
    pub fn theta_end(&self) -> f64 {
        let seg = self.segments.last().unwrap();
        horner(&seg.th, 1.0)
    }

    /// Scale of the trajectory: `max(|V|, |W|)` over the mesh nodes. Strictly
    /// positive for any admissible initial data.
    pub fn sup_norm(&self) -> f64 {
        let mut sup = 0.0f64;
        for seg in &self.segments {
            sup = sup.max(seg.v[0].abs()).max(seg.w[0].abs());
        }
        let last = self.segments.last().unwrap();
        sup.max(horner(&last.v, 1.0).abs())
            .max(horner(&last.w, 1.0).abs())
    }

    /// `V^(order)(x)` for `order ≤ P_MAX`.
    ///
    /// Order 0 is the dense value, order 1 is `W/K` (exact given `W`), and
    /// orders ≥ 2 come from differentiating the ODE itself:
    /// `K V″ = (L − r G) V − K′ V′`, then Leibniz's rule for each further
    /// order. No finite differencing of the dense output is involved, so the
    /// accuracy of high orders matches the accuracy of `(V, W)` at `x`.
    pub fn derivative(&self, x: f64, order: usize) -> Result<f64, IvpError> {
        if order > P_MAX {
            return Err(IvpError::OrderOutOfRange { order });
        }
        if order == 0 {
            return Ok(self.value(x));
        }
        let v = self.value(x);
        let vp = self.kv(x) / self.ctx.k(0, x)?;
        if order == 1 {
            return Ok(vp);
        }
        let derivs = derivative_chain(&self.ctx, self.r, x, v, vp, order)?;
        Ok(derivs[order])
    }

    pub(crate) fn context(&self) -> &Arc<Context> {
        &self.ctx
    }

    /// Rescale `(V, W)` by a constant (the Prüfer angle is scale-invariant).
    /// Used to apply the normalization once the eigenvalue is found.
    pub(crate) fn scaled(mut self, factor: f64) -> Trajectory {
        for seg in &mut self.segments {
            for c in &mut seg.v {
                *c *= factor;
            }
            for c in &mut seg.w {
                *c *= factor;
            }
        }
        self
    }
}

/// Rows of Pascal's triangle used by the Leibniz recursion.
const BINOM: [[f64; 7]; 7] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0, 0.0, 0.0],
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0, 0.0],
    [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0],
];

/// Compute `V, V′, …, V^(max_order)` at `x` from the ODE, given `V` and `V′`
/// there. Differentiating `K V″ = Q V − K′ V′` (with `Q = L − r G`) `j`
/// times gives
///
/// ```text
/// K V^(j+2) = Σ_{i=0..j} C(j,i) [Q^(i) V^(j−i) − K^(i+1) V^(j−i+1)]
///           − Σ_{i=1..j} C(j,i) K^(i) V^(j−i+2)
/// ```
///
/// which resolves orders bottom-up.
pub(crate) fn derivative_chain(
    ctx: &Context,
    r: f64,
    x: f64,
    v: f64,
    vp: f64,
    max_order: usize,
) -> Result<[f64; P_MAX + 1], DomainError> {
    debug_assert!(max_order <= P_MAX);
    let mut k = [0.0; P_MAX];
    let mut q = [0.0; P_MAX - 1];
    for (i, slot) in k.iter_mut().enumerate().take(max_order.max(2)) {
        *slot = ctx.k(i, x)?;
    }
    for (i, slot) in q.iter_mut().enumerate().take(max_order.saturating_sub(1)) {
        *slot = ctx.l(i, x)? - r * ctx.g(i, x)?;
    }
    let mut d = [0.0; P_MAX + 1];
    d[0] = v;
    d[1] = vp;
    for j in 0..max_order.saturating_sub(1) {
        let mut sum = 0.0;
        for i in 0..=j {
            let c = BINOM[j][i];
            sum += c * (q[i] * d[j - i] - k[i + 1] * d[j - i + 1]);
            if i >= 1 {
                sum -= c * k[i] * d[j - i + 2];
            }
        }
        d[j + 2] = sum / k[0];
    }
    Ok(d)
}

// Dormand–Prince 5(4) tableau. The propagating weights are the seventh row
// of A (first-same-as-last), D holds b5 − b4 for the embedded error estimate.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const D: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 3];

fn rhs(ctx: &Context, r: f64, x: f64, y: &State) -> Result<State, DomainError> {
    let k = ctx.k(0, x)?;
    let g = ctx.g(0, x)?;
    let l = ctx.l(0, x)?;
    let q = l - r * g;
    let (sin_t, cos_t) = y[2].sin_cos();
    Ok([y[1] / k, q * y[0], cos_t * cos_t / k - q * sin_t * sin_t])
}

/// `(V″, W″)` at a node, from the once-differentiated system; feeds the
/// quintic dense output.
fn second_derivs(ctx: &Context, r: f64, x: f64, y: &State) -> Result<(f64, f64), DomainError> {
    let k = ctx.k(0, x)?;
    let kp = ctx.k(1, x)?;
    let g = ctx.g(0, x)?;
    let gp = ctx.g(1, x)?;
    let l = ctx.l(0, x)?;
    let lp = ctx.l(1, x)?;
    let q = l - r * g;
    let vp = y[1] / k;
    Ok(((q * y[0] - kp * vp) / k, (lp - r * gp) * y[0] + q * vp))
}

/// Left boundary data on the `(V, W)` ray selected by the condition:
/// `(0, 1)` for Dirichlet, `(1, h)` for Robin (any positive scale represents
/// the same ray; the eigenfunction is re-scaled by normalization later).
pub(crate) fn left_data(bc: BoundaryCondition) -> (f64, f64) {
    match bc {
        BoundaryCondition::Dirichlet => (0.0, 1.0),
        BoundaryCondition::Robin(h) => (1.0, h),
    }
}

pub(crate) fn integrate_ctx(
    ctx: &Arc<Context>,
    r: f64,
    v0: f64,
    kv0: f64,
    rtol: f64,
    atol: f64,
) -> Result<Trajectory, IvpError> {
    if v0 == 0.0 && kv0 == 0.0 {
        return Err(IvpError::TrivialInitialData);
    }
    let span = ctx.span();
    // Angle of the initial ray, folded into [0, π): θ only matters modulo π
    // for zero counting, and starting in [0, π) keeps floor(θ/π) equal to the
    // number of zeros crossed.
    let mut theta0 = v0.atan2(kv0);
    if theta0 < 0.0 {
        theta0 += std::f64::consts::PI;
    } else if theta0 >= std::f64::consts::PI {
        theta0 -= std::f64::consts::PI;
    }

    let h_max = span / 8.0;
    let h_min = span * 1e-13;
    let mut h = (0.1 / (ctx.frequency_bound(r) + 1.0 / span)).min(h_max);

    let mut x = ctx.alpha;
    let mut y: State = [v0, kv0, theta0];
    let mut k1 = rhs(ctx, r, x, &y)?;
    let mut d2_start = second_derivs(ctx, r, x, &y)?;

    let mut xs = vec![x];
    let mut segments: Vec<Segment> = Vec::new();
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    loop {
        let mut last = false;
        if x + h >= ctx.beta {
            h = ctx.beta - x;
            last = true;
        }

        let mut ks = [[0.0f64; 3]; 7];
        ks[0] = k1;
        let stage = |i: usize, coeffs: &[f64], ks: &[State; 7], y: &State| -> State {
            let _ = i;
            let mut out = *y;
            for (m, out_m) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, &a) in coeffs.iter().enumerate() {
                    acc += a * ks[j][m];
                }
                *out_m += h * acc;
            }
            out
        };
        ks[1] = rhs(ctx, r, x + C[1] * h, &stage(1, &A2, &ks, &y))?;
        ks[2] = rhs(ctx, r, x + C[2] * h, &stage(2, &A3, &ks, &y))?;
        ks[3] = rhs(ctx, r, x + C[3] * h, &stage(3, &A4, &ks, &y))?;
        ks[4] = rhs(ctx, r, x + C[4] * h, &stage(4, &A5, &ks, &y))?;
        ks[5] = rhs(ctx, r, x + C[5] * h, &stage(5, &A6, &ks, &y))?;
        let y1 = stage(6, &B, &ks, &y);
        let x1 = x + h;
        ks[6] = rhs(ctx, r, x1, &y1)?;

        let mut err_sq = 0.0;
        for m in 0..3 {
            let mut e = 0.0;
            for (j, &dj) in D.iter().enumerate() {
                e += dj * ks[j][m];
            }
            e *= h;
            let scale = atol + rtol * y[m].abs().max(y1[m].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / 3.0).sqrt();

        if err <= 1.0 {
            let d2_end = second_derivs(ctx, r, x1, &y1)?;
            segments.push(Segment {
                x0: x,
                h,
                v: quintic(
                    y[0],
                    y1[0],
                    h * ks[0][0],
                    h * ks[6][0],
                    h * h * d2_start.0,
                    h * h * d2_end.0,
                ),
                w: quintic(
                    y[1],
                    y1[1],
                    h * ks[0][1],
                    h * ks[6][1],
                    h * h * d2_start.1,
                    h * h * d2_end.1,
                ),
                th: cubic(y[2], y1[2], h * ks[0][2], h * ks[6][2]),
            });
            xs.push(x1);
            accepted += 1;
            x = x1;
            y = y1;
            k1 = ks[6]; // first-same-as-last
            d2_start = d2_end;
            if last {
                break;
            }
        } else {
            rejected += 1;
        }

        let mut factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        if err > 1.0 {
            factor = factor.min(1.0);
        }
        h = (h * factor).min(h_max);
        if h < h_min {
            return Err(IvpError::StepSizeUnderflow { x });
        }
    }

    Ok(Trajectory {
        ctx: Arc::clone(ctx),
        r,
        xs,
        segments,
        accepted,
        rejected,
    })
}

/// Integrate from `alpha` with initial data `(V, K V′)(alpha) = (v0, kv0)`
/// at spectral parameter `r`, with the default tolerances.
///
/// `report` must come from a successful [`crate::problem::validate`] call on
/// `p`.
pub fn integrate(
    p: &Problem,
    report: &ValidationReport,
    r: f64,
    v0: f64,
    kv0: f64,
) -> Result<Trajectory, IvpError> {
    let ctx = Context::new(p, report)?;
    integrate_ctx(&ctx, r, v0, kv0, DEFAULT_RTOL, DEFAULT_ATOL)
}

/// Integrate starting from the ray prescribed by `bc_left`, exposing the
/// Prüfer angle `θ` of the solution: `θ(alpha)` is `0` for Dirichlet and
/// `atan2(1, h) ∈ (0, π/2]` for Robin(`h`), and `V` has exactly
/// `floor(θ(x)/π)` zeros in `]alpha, x]`.
pub fn prufer_angle(
    p: &Problem,
    report: &ValidationReport,
    r: f64,
    bc_left: BoundaryCondition,
) -> Result<Trajectory, IvpError> {
    let (v0, kv0) = left_data(bc_left);
    integrate(p, report, r, v0, kv0)
}

/// Free-function form of [`Trajectory::derivative`].
pub fn derivative_at(t: &Trajectory, x: f64, order: usize) -> Result<f64, IvpError> {
    t.derivative(x, order)
}
