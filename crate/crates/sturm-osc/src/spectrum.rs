//! Eigenvalue and eigenfunction computation by Prüfer-phase shooting.
//!
//! Eigenvalues of the validated problem are characterized through the Prüfer
//! angle of the trajectory shot from the left boundary data: `θ(β; r)` is
//! continuous and strictly increasing in the spectral parameter `r`, and `r`
//! is the `i`-th eigenvalue exactly when `θ(β; r)` equals the target phase
//! determined by the right boundary condition and the index. Indexing by
//! phase rather than by scanning the boundary mismatch for sign changes makes
//! the solver immune to skipped roots: the phase tells it *which* eigenvalue
//! a bracket contains.
//!
//! The solve runs in two stages. A coarse walk in `r` (loose integrator
//! tolerance) brackets the target phase crossing and bisects until both
//! endpoints sit within one π of the target, so exactly one eigenvalue lies
//! inside. The bracket is then handed to a Brent refinement on the boundary
//! [`mismatch`] with the integrator near its round-off floor, stopping at
//! `|Δr| ≤ TOL_EIG·(1+|r|)`. The final trajectory is normalized to
//! `∫ G V² = 1` and signed so `V > 0` immediately right of `α`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::context::Context;
use crate::ivp::{integrate_ctx, left_data, Trajectory, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::problem::{BoundaryCondition, Problem, ValidationReport};
use crate::roots::brent;
use crate::zeros::{locate_zeros, ZeroFn};

/// Largest supported eigenvalue index.
pub const N_MAX: usize = 64;

/// Eigenvalue stopping rule: the bracket is shrunk to `TOL_EIG · (1 + |ρ|)`.
pub const TOL_EIG: f64 = 1e-10;

// Bracketing only needs the phase to a fraction of π, so it runs the
// integrator loose; refinement and the final trajectory run near the
// round-off floor so the eigenvalue error is dominated by the stopping rule.
const BRACKET_RTOL: f64 = 1e-6;
const BRACKET_ATOL: f64 = 1e-9;
const FINAL_RTOL: f64 = 1e-12;
const FINAL_ATOL: f64 = 1e-14;

/// Safety margin (radians) kept between a bracket endpoint's phase and the
/// neighbouring mismatch roots at target ± π, absorbing the loose stage's
/// phase error.
const PHASE_MARGIN: f64 = 0.05;

/// Failures of the eigenvalue solver and the spectral consistency checks.
#[derive(Debug, thiserror::Error)]
pub enum SpectrumError {
    /// Requested index outside `1..=N_MAX`.
    #[error("eigenvalue index {index} outside the supported range 1..={}", N_MAX)]
    IndexOutOfRange {
        /// The offending index.
        index: usize,
    },
    /// The phase walk hit the search cap without crossing the target.
    #[error("no phase crossing for eigenvalue {index} below r = {r_cap:.6e}")]
    BracketNotFound {
        /// Eigenvalue index being bracketed.
        index: usize,
        /// Upper end of the searched parameter range.
        r_cap: f64,
    },
    /// The refined root's trajectory ends at the wrong Prüfer phase, i.e.
    /// the root finder converged to something other than eigenvalue `index`.
    #[error(
        "trajectory for eigenvalue {index} ends at phase {actual:.6}, expected {expected:.6}"
    )]
    PhaseMismatch {
        /// Eigenvalue index requested.
        index: usize,
        /// Target phase `θ(β)` for that index.
        expected: f64,
        /// Phase the converged trajectory actually reached.
        actual: f64,
    },
    /// Interior zero count of an eigenfunction differs from `index - 1`.
    #[error("eigenfunction {index} has {found} interior zeros, expected {expected}")]
    OscillationMismatch {
        /// Eigenvalue index.
        index: usize,
        /// Theoretical count `index - 1`.
        expected: usize,
        /// Count reported by the zero locator.
        found: usize,
    },
    /// Interlacing was asked of non-consecutive eigenpairs.
    #[error("interlacing needs consecutive indices, got {first} and {second}")]
    NotConsecutive {
        /// Index of the first pair.
        first: usize,
        /// Index of the second pair.
        second: usize,
    },
    /// Two eigenpairs passed to a pairwise check come from different problems.
    #[error("eigenpairs come from different problems")]
    ProblemMismatch,
    /// The normalization integral `∫ G V²` was not a usable positive number.
    #[error("normalization integral for eigenvalue {index} evaluated to {integral:.6e}")]
    NormalizationFailed {
        /// Eigenvalue index.
        index: usize,
        /// Value of the offending integral.
        integral: f64,
    },
}

/// One computed eigenpair `(ρ_i, V_i)`.
///
/// The eigenfunction is stored as the integrator's dense-output trajectory,
/// rescaled so `∫ G V_i² = 1` and signed so `V_i > 0` immediately to the
/// right of `α` (the left boundary data used for shooting already points
/// that way, and normalization preserves the sign).
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// 1-based position in the increasing eigenvalue ordering.
    pub index: usize,
    /// The eigenvalue.
    pub rho: f64,
    /// Dense evaluable form of the normalized eigenfunction.
    pub trajectory: Arc<Trajectory>,
}

impl EigenPair {
    /// `V_i(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.trajectory.value(x)
    }

    /// `(K V_i′)(x)` — the natural flux variable of the equation.
    pub fn flux(&self, x: f64) -> f64 {
        self.trajectory.kv(x)
    }

    /// Sup of `|V_i|` over the integration mesh and its midpoints.
    pub fn sup_value(&self) -> f64 {
        self.scan_sup(|t, x| Ok(t.value(x))).expect("V scan is infallible")
    }

    /// Sup of `|V_i′|` over the integration mesh and its midpoints.
    pub fn sup_slope(&self) -> crate::Result<f64> {
        self.scan_sup(|t, x| t.derivative(x, 1).map_err(crate::Error::from))
    }

    fn scan_sup(
        &self,
        f: impl Fn(&Trajectory, f64) -> crate::Result<f64>,
    ) -> crate::Result<f64> {
        let t = &self.trajectory;
        let mut sup = 0.0f64;
        let mesh = t.mesh();
        for w in mesh.windows(2) {
            sup = sup.max(f(t, w[0])?.abs());
            sup = sup.max(f(t, 0.5 * (w[0] + w[1]))?.abs());
        }
        sup = sup.max(f(t, t.beta())?.abs());
        Ok(sup)
    }

    pub(crate) fn context(&self) -> &Arc<Context> {
        self.trajectory.context()
    }

    /// Spectral shift recorded by validation; `ρ + shift > 0` for every
    /// eigenvalue, which the combination layer relies on for its weights.
    pub fn shift(&self) -> f64 {
        self.context().shift
    }
}

impl ZeroFn for EigenPair {
    fn interval(&self) -> (f64, f64) {
        (self.trajectory.alpha(), self.trajectory.beta())
    }

    fn value(&self, x: f64) -> crate::Result<f64> {
        Ok(self.trajectory.value(x))
    }

    fn derivative(&self, x: f64, order: usize) -> crate::Result<f64> {
        Ok(self.trajectory.derivative(x, order)?)
    }

    fn max_frequency(&self) -> f64 {
        self.context().frequency_bound(self.rho)
    }

    fn moment(&self, order: usize) -> f64 {
        // The p-th derivative of an eigenfunction grows like ω^p; measuring
        // derivative magnitudes in these units keeps the multiplicity probe's
        // thresholds frequency-independent.
        self.max_frequency().max(1.0).powi(order as i32)
    }
}

/// Prüfer phase at `β` that characterizes eigenvalue `index`.
///
/// Dirichlet: `V(β) = 0` after `index - 1` interior sign changes means
/// `θ(β) = index·π`. Robin(H): `K V′ + H V = 0` puts the `(V, K V′)` ray at
/// angle `atan2(1, −H) ∈ [π/2, π)` modulo π, i.e. `θ(β) = index·π −
/// atan2(1, H)`; written below on the branch `(index−1)·π + atan2(1, −H)`.
/// Either way index 1 is the ground state.
fn phase_target(bc: BoundaryCondition, index: usize) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet => index as f64 * PI,
        BoundaryCondition::Robin(h) => (index as f64 - 1.0) * PI + 1.0f64.atan2(-h),
    }
}

/// One shooting integration, reduced to the two numbers the solver steers by.
struct Shot {
    theta: f64,
    mismatch: f64,
    trajectory: Trajectory,
}

fn shoot(ctx: &Arc<Context>, r: f64, rtol: f64, atol: f64) -> crate::Result<Shot> {
    let (v0, kv0) = left_data(ctx.bc_left);
    let t = integrate_ctx(ctx, r, v0, kv0, rtol, atol)?;
    let raw = match ctx.bc_right {
        BoundaryCondition::Dirichlet => t.value(t.beta()),
        BoundaryCondition::Robin(h) => t.kv(t.beta()) + h * t.value(t.beta()),
    };
    Ok(Shot {
        theta: t.theta_end(),
        mismatch: raw / t.sup_norm(),
        trajectory: t,
    })
}

/// Right-boundary residual of the trajectory shot from the left boundary
/// data at spectral parameter `r`: `K(β)V′(β) + H·V(β)` for Robin, `V(β)`
/// for Dirichlet, normalized by the trajectory's sup-norm so the value is
/// independent of the (arbitrary) scale of the shooting data. Its zeros in
/// `r` are exactly the eigenvalues, and it changes sign across each one.
pub fn mismatch(p: &Problem, report: &ValidationReport, r: f64) -> crate::Result<f64> {
    let ctx = Context::new(p, report)?;
    Ok(shoot(&ctx, r, DEFAULT_RTOL, DEFAULT_ATOL)?.mismatch)
}

/// Crude estimate of the parameter producing a phase increase `dtheta`
/// across the interval: `θ(β) − θ(α) ≈ span·sqrt((r·G − L)/K)` with the
/// coefficients frozen at mid-range constants. Only used to seed the
/// bracketing walk.
fn initial_guess(ctx: &Context, dtheta: f64) -> f64 {
    let rate = dtheta.max(0.0) / ctx.span();
    let avg_k = 0.5 * (ctx.min_k + ctx.max_k);
    let avg_g = 0.5 * (ctx.min_g + ctx.max_g);
    (avg_k * rate * rate + 0.5 * ctx.max_abs_l) / avg_g
}

pub(crate) fn compute_eigenvalue_ctx(
    ctx: &Arc<Context>,
    index: usize,
) -> crate::Result<EigenPair> {
    if index == 0 || index > N_MAX {
        return Err(SpectrumError::IndexOutOfRange { index }.into());
    }
    let target = phase_target(ctx.bc_right, index);
    let (v0, kv0) = left_data(ctx.bc_left);
    let theta_alpha = v0.atan2(kv0);

    // The shifted coefficients satisfy L + shift·G > 0, which together with
    // h, H ≥ 0 makes every Rayleigh quotient positive: no eigenvalue lies at
    // or below -shift, so the walk never searches past that floor.
    let floor = -ctx.shift + 1e-9 * (1.0 + ctx.shift.abs());
    let r_cap = 1e6 * (1.0 + initial_guess(ctx, phase_target(ctx.bc_right, 1) - theta_alpha).abs());
    let bracket_failed = || crate::Error::from(SpectrumError::BracketNotFound { index, r_cap });

    let phase = |r: f64| -> crate::Result<f64> {
        Ok(shoot(ctx, r, BRACKET_RTOL, BRACKET_ATOL)?.theta - target)
    };

    // Stage 1: walk until the target phase is straddled. θ(β; ·) is strictly
    // increasing, so doubling the distance to the floor eventually crosses
    // upward, and halving it crosses downward.
    let r0 = initial_guess(ctx, target - theta_alpha).max(floor);
    let g0 = phase(r0)?;
    let (mut r_lo, mut g_lo, mut r_hi, mut g_hi);
    if g0 < 0.0 {
        r_lo = r0;
        g_lo = g0;
        loop {
            r_hi = floor + 2.0 * (r_lo - floor) + 1.0;
            if r_hi > r_cap {
                return Err(bracket_failed());
            }
            g_hi = phase(r_hi)?;
            if g_hi >= 0.0 {
                break;
            }
            r_lo = r_hi;
            g_lo = g_hi;
        }
    } else {
        r_hi = r0;
        g_hi = g0;
        let mut width = r_hi - floor;
        loop {
            width *= 0.5;
            if width <= f64::EPSILON * (1.0 + floor.abs()) {
                return Err(bracket_failed());
            }
            r_lo = floor + width;
            g_lo = phase(r_lo)?;
            if g_lo < 0.0 {
                break;
            }
            r_hi = r_lo;
            g_hi = g_lo;
        }
    }

    // Stage 1b: bisect until both endpoint phases are within π of the
    // target (minus a margin), so the bracket contains exactly one sign
    // change of the mismatch — the eigenvalue of index `index`.
    for _ in 0..200 {
        if g_lo > -(PI - PHASE_MARGIN) && g_hi < PI - PHASE_MARGIN {
            break;
        }
        let mid = 0.5 * (r_lo + r_hi);
        if mid <= r_lo || mid >= r_hi {
            break; // bracket already at round-off width
        }
        let g_mid = phase(mid)?;
        if g_mid < 0.0 {
            r_lo = mid;
            g_lo = g_mid;
        } else {
            r_hi = mid;
            g_hi = g_mid;
        }
    }

    // Stage 2: re-evaluate the endpoints at the final tolerance. If the
    // loose phase put an endpoint on the wrong side of the target (possible
    // only when it sits within the loose stage's phase error of the root),
    // creep outward in doubling steps; the first step is tiny relative to
    // the bracket so the endpoint stays well inside the ±π window.
    let tight = |r: f64| shoot(ctx, r, FINAL_RTOL, FINAL_ATOL);
    let width = r_hi - r_lo;
    let mut lo = tight(r_lo)?;
    let mut step = (width * 1e-6).max(f64::EPSILON * (1.0 + r_lo.abs()));
    for _ in 0..80 {
        if lo.theta < target {
            break;
        }
        r_hi = r_lo;
        r_lo = (r_lo - step).max(floor);
        step *= 2.0;
        lo = tight(r_lo)?;
    }
    let mut hi = tight(r_hi)?;
    let mut step = (width * 1e-6).max(f64::EPSILON * (1.0 + r_hi.abs()));
    for _ in 0..80 {
        if hi.theta >= target {
            break;
        }
        r_hi += step;
        step *= 2.0;
        hi = tight(r_hi)?;
    }

    // Brent on the mismatch (the endpoint signs differ once the phases
    // straddle the target within ±π). Should the tight signs still agree —
    // conceivable only with both endpoints essentially on the eigenvalue —
    // fall back to the phase residual, which brackets by construction.
    let xtol = TOL_EIG * (1.0 + r_lo.abs().max(r_hi.abs()));
    let root = if lo.mismatch == 0.0 {
        r_lo
    } else if hi.mismatch == 0.0 {
        r_hi
    } else if lo.mismatch * hi.mismatch < 0.0 {
        brent(
            |r| Ok::<_, crate::Error>(tight(r)?.mismatch),
            r_lo,
            r_hi,
            lo.mismatch,
            hi.mismatch,
            xtol,
        )?
    } else {
        brent(
            |r| Ok::<_, crate::Error>(tight(r)?.theta - target),
            r_lo,
            r_hi,
            lo.theta - target,
            hi.theta - target,
            xtol,
        )?
    };

    let shot = tight(root)?;
    if (shot.theta - target).abs() > 0.1 {
        return Err(SpectrumError::PhaseMismatch {
            index,
            expected: target,
            actual: shot.theta,
        }
        .into());
    }

    // Normalize to ∫ G V² = 1: composite Simpson with four panels per
    // integrator step. The dense output is a quintic per step, so against
    // the step sizes chosen at FINAL_RTOL this quadrature error is far below
    // the 1e-8 normalization budget.
    let t = shot.trajectory;
    let mut integral = 0.0;
    for w in t.mesh().windows(2) {
        let h = (w[1] - w[0]) / 4.0;
        let mut acc = 0.0;
        for (i, wgt) in [1.0, 4.0, 2.0, 4.0, 1.0].iter().enumerate() {
            let x = w[0] + h * i as f64;
            let v = t.value(x);
            acc += wgt * ctx.g(0, x)? * v * v;
        }
        integral += acc * h / 3.0;
    }
    if !(integral.is_finite() && integral > 0.0) {
        return Err(SpectrumError::NormalizationFailed { index, integral }.into());
    }
    Ok(EigenPair {
        index,
        rho: root,
        trajectory: Arc::new(t.scaled(1.0 / integral.sqrt())),
    })
}

/// Compute the `index`-th eigenpair (1-based, increasing eigenvalue order)
/// of the validated problem.
pub fn compute_eigenvalue(
    p: &Problem,
    report: &ValidationReport,
    index: usize,
) -> crate::Result<EigenPair> {
    let ctx = Context::new(p, report)?;
    compute_eigenvalue_ctx(&ctx, index)
}

/// Compute eigenpairs `1..=n`. Distinct indices are independent shooting
/// problems and run in parallel; the output is ordered by index.
pub fn compute_eigenpairs(
    p: &Problem,
    report: &ValidationReport,
    n: usize,
) -> crate::Result<Vec<EigenPair>> {
    if n == 0 || n > N_MAX {
        return Err(SpectrumError::IndexOutOfRange { index: n }.into());
    }
    let ctx = Context::new(p, report)?;
    (1..=n)
        .into_par_iter()
        .map(|i| compute_eigenvalue_ctx(&ctx, i))
        .collect()
}

/// Count the interior zeros of `V_i` with the zero locator and check the
/// oscillation law: eigenfunction `i` vanishes and changes sign exactly
/// `i - 1` times inside the interval. Returns the count on success.
pub fn verify_oscillation(e: &EigenPair) -> crate::Result<usize> {
    let records = locate_zeros(e, e.trajectory.beta() - e.trajectory.alpha())?;
    let found = records.iter().filter(|z| !z.is_boundary).count();
    let expected = e.index - 1;
    if found == expected {
        Ok(found)
    } else {
        Err(SpectrumError::OscillationMismatch {
            index: e.index,
            expected,
            found,
        }
        .into())
    }
}

/// Check strict interlacing of interior zeros of consecutive eigenfunctions:
/// with `x` the zeros of `V_i` and `y` those of `V_{i+1}`, demand
/// `y_k < x_k < y_{k+1}` for every `k` — equivalently, between consecutive
/// zeros of `V_{i+1}` lies exactly one zero of `V_i`. Vacuously true for
/// `i = 1`. A `false` return is a finding about the functions, not an error;
/// errors are reserved for mismatched inputs.
pub fn verify_interlacing(lower: &EigenPair, upper: &EigenPair) -> crate::Result<bool> {
    if lower.context().fingerprint != upper.context().fingerprint {
        return Err(SpectrumError::ProblemMismatch.into());
    }
    if upper.index != lower.index + 1 {
        return Err(SpectrumError::NotConsecutive {
            first: lower.index,
            second: upper.index,
        }
        .into());
    }
    let span = lower.trajectory.beta() - lower.trajectory.alpha();
    let interior = |e: &EigenPair| -> crate::Result<Vec<f64>> {
        Ok(locate_zeros(e, span)?
            .into_iter()
            .filter(|z| !z.is_boundary)
            .map(|z| z.xi)
            .collect())
    };
    let xs = interior(lower)?;
    let ys = interior(upper)?;
    if xs.len() + 1 != ys.len() {
        return Ok(false);
    }
    Ok(xs
        .iter()
        .enumerate()
        .all(|(k, &x)| ys[k] < x && x < ys[k + 1]))
}
