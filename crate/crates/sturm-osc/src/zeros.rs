//! Zero location with multiplicities, and the four counting functionals.
//!
//! Everything here works on the [`ZeroFn`] trait: a function on an interval
//! that can produce values and ODE-exact derivatives up to [`P_MAX`], plus
//! two pieces of a-priori information — a bound on how fast it oscillates
//! (so the scan cannot straddle two zeros in one cell) and the expected
//! growth of its derivatives (so multiplicity thresholds are
//! scale-invariant).
//!
//! Zeros are found by two complementary routes: odd-order zeros are sign
//! changes of `f`, even-order zeros are sign changes of `f′` whose critical
//! value is compatible with zero. Both kinds are refined by Brent's method,
//! merged when closer than the merge tolerance or when `|f|` never leaves
//! the zero band between them, and then classified by the
//! derivative probe: the multiplicity of a zero `ξ` is the smallest `p` with
//! `f^(p)(ξ)` decisively nonzero, and the leading coefficient is
//! `B = f^(p)(ξ)/p!`, so that `f(x) ≈ B (x − ξ)^p` near `ξ`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::problem::BoundaryCondition;
use crate::roots::brent;
use crate::P_MAX;

/// A function on an interval exposing value, exact derivatives, and the
/// a-priori bounds the zero scan relies on.
pub trait ZeroFn {
    /// Domain `(alpha, beta)` of the function.
    fn interval(&self) -> (f64, f64);

    /// `f(x)`.
    fn value(&self, x: f64) -> crate::Result<f64>;

    /// `f^(order)(x)` for `order ≤ P_MAX`; `order = 0` is the value.
    fn derivative(&self, x: f64, order: usize) -> crate::Result<f64>;

    /// Upper bound on the local oscillation frequency: consecutive zeros are
    /// at least `π / max_frequency()` apart. Must be finite and positive.
    fn max_frequency(&self) -> f64;

    /// Expected growth of the `order`-th derivative relative to the value
    /// scale (the `order`-th spectral moment of the mode mix, at least 1).
    /// Multiplicity thresholds are `deriv_tol · scale · moment(order)`.
    fn moment(&self, order: usize) -> f64;
}

/// Zero order as certified by the derivative probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Multiplicity {
    /// The smallest `p` with `f^(p)(ξ)` decisively nonzero.
    Exact(usize),
    /// All derivatives through `P_MAX` are decisively zero at tolerance; the
    /// order is at least `P_MAX`.
    AtLeastMax,
}

impl Multiplicity {
    /// The certified order; `AtLeastMax` contributes `P_MAX` (a lower bound).
    pub fn order(&self) -> usize {
        match self {
            Multiplicity::Exact(p) => *p,
            Multiplicity::AtLeastMax => P_MAX,
        }
    }
}

/// One zero of the function, with its local structure.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ZeroRecord {
    /// Location of the zero.
    pub xi: f64,
    /// Certified order of vanishing.
    pub multiplicity: Multiplicity,
    /// `f^(p)(ξ)/p!`, so `f(x) ≈ B (x − ξ)^p` near `ξ`. `None` when the
    /// order could not be resolved below `P_MAX`.
    pub leading_coefficient: Option<f64>,
    /// Whether `f` changes sign at `ξ` — equivalent to odd multiplicity.
    pub sign_change: bool,
    /// Whether `ξ` is an endpoint of the interval.
    pub is_boundary: bool,
}

impl ZeroRecord {
    /// Certified order of this zero.
    pub fn order(&self) -> usize {
        self.multiplicity.order()
    }
}

/// The four zero-counting functionals of a function on `]alpha, beta[`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ZeroCount {
    /// Distinct interior zeros.
    pub n: usize,
    /// Interior zeros counted with multiplicity.
    pub n_m: usize,
    /// `n_m` plus the reduced multiplicities of boundary zeros.
    pub n_bar_m: usize,
    /// Interior sign changes (odd-order interior zeros).
    pub n_v: usize,
    /// Reduced multiplicity at the left endpoint (0 under Dirichlet).
    pub m_bar_alpha: usize,
    /// Reduced multiplicity at the right endpoint (0 under Dirichlet).
    pub m_bar_beta: usize,
}

/// Which endpoint of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// `alpha`.
    Left,
    /// `beta`.
    Right,
}

/// Zero-location or classification failure.
#[derive(Debug, Error)]
pub enum ZerosError {
    /// The derivative probe at a zero landed in the gray zone: no order up
    /// to `P_MAX` is decisively nonzero, yet not all are decisively zero.
    #[error("multiplicity probe inconclusive at x = {xi:e}: no derivative order <= {P_MAX} is decisive")]
    UnresolvedCluster {
        /// Location of the ambiguous zero.
        xi: f64,
    },
    /// The function vanishes on the entire scan grid.
    #[error("function is zero at every scan point; zero location is meaningless")]
    ZeroScale,
    /// [`multiplicity`] was asked to classify a point where the function
    /// does not vanish.
    #[error("f({xi:e}) = {value:e} is not a zero (threshold {threshold:e})")]
    NotAZero {
        /// Queried point.
        xi: f64,
        /// Value there.
        value: f64,
        /// `zero_tol · scale` bound it failed.
        threshold: f64,
    },
    /// Non-positive resolution hint.
    #[error("resolution hint must be positive, got {hint:e}")]
    BadResolutionHint {
        /// The offending hint.
        hint: f64,
    },
    /// A boundary zero of odd order under a Robin condition — forbidden for
    /// boundary-respecting combinations, so it signals numerical
    /// inconsistency rather than a finding.
    #[error("boundary zero at x = {xi:e} has odd order {order} under a Robin condition")]
    OddBoundaryOrder {
        /// The endpoint location.
        xi: f64,
        /// The (odd) certified order.
        order: usize,
    },
}

/// Detection and classification thresholds, centralized so every consumer
/// agrees on what counts as zero.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    /// `|f| < zero_tol · scale` marks a zero (scale = sup of `|f|` on the
    /// scan grid).
    pub zero_tol: f64,
    /// `|f^(p)| > deriv_tol · scale · moment(p)` is a decisive nonzero
    /// derivative.
    pub deriv_tol: f64,
    /// Candidates closer than `merge_tol_rel · (beta − alpha)` collapse into
    /// one zero.
    pub merge_tol_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            zero_tol: 1e-9,
            deriv_tol: 1e-6,
            merge_tol_rel: 1e-7,
        }
    }
}

/// Fraction of the decisive threshold below which a derivative counts as
/// decisively zero; the band in between is the gray zone that triggers
/// [`ZerosError::UnresolvedCluster`].
const GRAY_FRACTION: f64 = 1e-3;

/// Relative (to the interval length) location tolerance for refined zeros.
const REFINE_TOL_REL: f64 = 1e-12;

const FACTORIAL: [f64; P_MAX + 1] = [
    1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0,
];

struct Scan {
    xs: Vec<f64>,
    vals: Vec<f64>,
    scale: f64,
}

fn scan<F: ZeroFn + ?Sized>(f: &F, resolution_hint: f64) -> crate::Result<Scan> {
    let (a, b) = f.interval();
    let span = b - a;
    // Never let one scan cell span more than an eighth of the shortest
    // possible gap between zeros.
    let step = resolution_hint.min(PI / (8.0 * f.max_frequency().max(PI / span)));
    let n = ((span / step).ceil() as usize).clamp(64, 1_000_000);
    let mut xs = Vec::with_capacity(n + 1);
    let mut vals = Vec::with_capacity(n + 1);
    let mut scale = 0.0f64;
    for i in 0..=n {
        let x = if i == n { b } else { a + span * i as f64 / n as f64 };
        let v = f.value(x)?;
        scale = scale.max(v.abs());
        xs.push(x);
        vals.push(v);
    }
    Ok(Scan { xs, vals, scale })
}

/// Sup of `|f|` on the default scan grid — the scale all thresholds refer to.
fn scan_scale<F: ZeroFn + ?Sized>(f: &F) -> crate::Result<f64> {
    let (a, b) = f.interval();
    let s = scan(f, (b - a) / 64.0)?;
    Ok(s.scale)
}

/// The derivative probe: smallest `p ≤ P_MAX` with `f^(p)(ξ)` decisively
/// nonzero, plus the leading coefficient `f^(p)(ξ)/p!`.
fn probe<F: ZeroFn + ?Sized>(
    f: &F,
    xi: f64,
    scale: f64,
    th: &Thresholds,
) -> crate::Result<(Multiplicity, Option<f64>)> {
    let mut gray = false;
    for p in 1..=P_MAX {
        let d = f.derivative(xi, p)?;
        let threshold = th.deriv_tol * scale * f.moment(p);
        if d.abs() > threshold {
            return Ok((Multiplicity::Exact(p), Some(d / FACTORIAL[p])));
        }
        if d.abs() > GRAY_FRACTION * threshold {
            gray = true;
        }
    }
    if gray {
        Err(ZerosError::UnresolvedCluster { xi }.into())
    } else {
        Ok((Multiplicity::AtLeastMax, None))
    }
}

fn make_record<F: ZeroFn + ?Sized>(
    f: &F,
    xi: f64,
    scale: f64,
    th: &Thresholds,
    is_boundary: bool,
) -> crate::Result<ZeroRecord> {
    let (multiplicity, leading_coefficient) = probe(f, xi, scale, th)?;
    let sign_change = match multiplicity {
        Multiplicity::Exact(p) => p % 2 == 1,
        Multiplicity::AtLeastMax => false,
    };
    Ok(ZeroRecord {
        xi,
        multiplicity,
        leading_coefficient,
        sign_change,
        is_boundary,
    })
}

/// Locate all zeros of `f` on its interval, boundary zeros included (marked
/// with [`ZeroRecord::is_boundary`]), sorted by location.
///
/// The scan step is the smaller of `resolution_hint` and an eighth of the
/// tightest zero spacing allowed by [`ZeroFn::max_frequency`]; sign changes
/// of `f` catch odd-order zeros, critical points with near-zero value catch
/// even-order ones, and both are refined to `1e-12` of the interval length.
pub fn locate_zeros<F: ZeroFn + ?Sized>(
    f: &F,
    resolution_hint: f64,
) -> crate::Result<Vec<ZeroRecord>> {
    locate_zeros_with(f, resolution_hint, &Thresholds::default())
}

/// [`locate_zeros`] with explicit thresholds.
pub fn locate_zeros_with<F: ZeroFn + ?Sized>(
    f: &F,
    resolution_hint: f64,
    th: &Thresholds,
) -> crate::Result<Vec<ZeroRecord>> {
    if !(resolution_hint > 0.0) {
        return Err(ZerosError::BadResolutionHint {
            hint: resolution_hint,
        }
        .into());
    }
    let (a, b) = f.interval();
    let span = b - a;
    let grid = scan(f, resolution_hint)?;
    if grid.scale == 0.0 {
        return Err(ZerosError::ZeroScale.into());
    }
    let zero_abs = th.zero_tol * grid.scale;
    let xtol = REFINE_TOL_REL * span;

    // Candidates carry their route: `true` for critical points of f, `false`
    // for sign changes.  When a cluster is collapsed below, the flattest
    // route wins the probe.
    let mut candidates: Vec<(f64, bool)> = Vec::new();

    // Odd-order zeros: sign changes of f.
    for i in 0..grid.xs.len() - 1 {
        let (v0, v1) = (grid.vals[i], grid.vals[i + 1]);
        if v0 == 0.0 {
            candidates.push((grid.xs[i], false));
        } else if v0 * v1 < 0.0 {
            candidates.push((
                brent(|x| f.value(x), grid.xs[i], grid.xs[i + 1], v0, v1, xtol)?,
                false,
            ));
        }
    }
    if *grid.vals.last().unwrap() == 0.0 {
        candidates.push((b, false));
    }

    // Even-order zeros: critical points of f where the value is compatible
    // with zero.
    let mut d_prev = f.derivative(grid.xs[0], 1)?;
    for i in 0..grid.xs.len() - 1 {
        let d_next = f.derivative(grid.xs[i + 1], 1)?;
        if d_prev * d_next < 0.0 {
            let xc = brent(
                |x| f.derivative(x, 1),
                grid.xs[i],
                grid.xs[i + 1],
                d_prev,
                d_next,
                xtol,
            )?;
            if f.value(xc)?.abs() < zero_abs {
                candidates.push((xc, true));
            }
        }
        d_prev = d_next;
    }

    candidates.sort_by(|p, q| p.0.total_cmp(&q.0));
    let merge_tol = th.merge_tol_rel * span;

    // Collapse clusters of candidates that describe the same zero site.  The
    // representative is the point of smallest |f|, except that critical-point
    // members take precedence over sign changes: when a degenerate zero is
    // perturbed at working precision it splits into crossings flanking a
    // critical point, and only the critical point still has the small
    // low-order derivatives the multiplicity probe relies on.
    let mut merged: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < candidates.len() {
        let mut j = i + 1;
        while j < candidates.len()
            && same_site(f, candidates[j - 1].0, candidates[j].0, merge_tol, zero_abs)?
        {
            j += 1;
        }
        let members = &candidates[i..j];
        let prefer_critical = members.iter().any(|m| m.1);
        let mut best = members[0].0;
        let mut best_val = f64::INFINITY;
        for &(x, critical) in members {
            if prefer_critical && !critical {
                continue;
            }
            let v = f.value(x)?.abs();
            if v < best_val {
                best = x;
                best_val = v;
            }
        }
        merged.push(best);
        i = j;
    }

    let mut records = Vec::new();
    let left_is_zero = grid.vals[0].abs() < zero_abs;
    let right_is_zero = grid.vals.last().unwrap().abs() < zero_abs;
    if left_is_zero {
        records.push(make_record(f, a, grid.scale, th, true)?);
    }
    for xi in merged {
        // Candidates that re-discovered a boundary zero belong to the
        // boundary record.
        if left_is_zero && same_site(f, a, xi, merge_tol, zero_abs)? {
            continue;
        }
        if right_is_zero && same_site(f, xi, b, merge_tol, zero_abs)? {
            continue;
        }
        records.push(make_record(f, xi, grid.scale, th, false)?);
    }
    if right_is_zero {
        records.push(make_record(f, b, grid.scale, th, true)?);
    }
    Ok(records)
}

/// Whether two zero candidates at `x0 < x1` describe the same zero site:
/// either they sit within the merge tolerance of one another, or `|f|` never
/// leaves the zero band between them.  The second clause catches degenerate
/// zeros that floating-point noise in the coefficients splits into a cluster
/// of nearby crossings and critical points — the cluster can be orders of
/// magnitude wider than the merge tolerance, but the function stays
/// numerically zero across it, so it is one zero site at working precision.
fn same_site<F: ZeroFn + ?Sized>(
    f: &F,
    x0: f64,
    x1: f64,
    merge_tol: f64,
    zero_abs: f64,
) -> crate::Result<bool> {
    if x1 - x0 <= merge_tol {
        return Ok(true);
    }
    // Probe spacing must track the frequency bound, like the scan grid does:
    // a fixed subdivision count aliases against an equispaced zero set (an
    // eigenfunction's zeros are exactly that, and sixteen probes between the
    // first zero and the far endpoint land on the other sixteen zeros).
    // Spacing an eighth of the tightest possible gap puts several probes
    // strictly inside every zero-free arc.
    let spacing = PI / (8.0 * f.max_frequency().max(PI / (x1 - x0)));
    let n = (((x1 - x0) / spacing).ceil() as usize).max(16);
    for i in 1..n {
        let x = x0 + (x1 - x0) * i as f64 / n as f64;
        if f.value(x)?.abs() >= zero_abs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Order and leading coefficient of the zero of `f` at `xi`:
/// the smallest `p` with `f^(p)(xi)` decisively nonzero and `B = f^(p)/p!`.
///
/// Fails with [`ZerosError::NotAZero`] when `|f(xi)|` exceeds
/// `zero_tol · scale`, and with [`ZerosError::UnresolvedCluster`] when no
/// order up to `P_MAX` is decisive.
pub fn multiplicity<F: ZeroFn + ?Sized>(
    f: &F,
    xi: f64,
) -> crate::Result<(Multiplicity, Option<f64>)> {
    let th = Thresholds::default();
    let scale = scan_scale(f)?;
    let value = f.value(xi)?;
    let threshold = th.zero_tol * scale;
    if value.abs() >= threshold {
        return Err(ZerosError::NotAZero {
            xi,
            value,
            threshold,
        }
        .into());
    }
    probe(f, xi, scale, &th)
}

/// Reduced multiplicity of `f` at an endpoint: `0` under Dirichlet or when
/// `f` does not vanish there, otherwise `p/2` where `p` is the (necessarily
/// even, for boundary-respecting functions) order of the boundary zero.
pub fn reduced_multiplicity<F: ZeroFn + ?Sized>(
    f: &F,
    endpoint: Endpoint,
    bc: BoundaryCondition,
) -> crate::Result<usize> {
    if bc.is_dirichlet() {
        return Ok(0);
    }
    let (a, b) = f.interval();
    let x = match endpoint {
        Endpoint::Left => a,
        Endpoint::Right => b,
    };
    let th = Thresholds::default();
    let scale = scan_scale(f)?;
    if f.value(x)?.abs() >= th.zero_tol * scale {
        return Ok(0);
    }
    match probe(f, x, scale, &th)? {
        (Multiplicity::Exact(p), _) if p % 2 == 0 => Ok(p / 2),
        (Multiplicity::Exact(p), _) => Err(ZerosError::OddBoundaryOrder { xi: x, order: p }.into()),
        (Multiplicity::AtLeastMax, _) => Err(ZerosError::UnresolvedCluster { xi: x }.into()),
    }
}

/// Assemble the four counting functionals from located zeros.
///
/// Interior records contribute to all four counts (`AtLeastMax` orders count
/// as `P_MAX`, a lower bound); boundary records contribute their reduced
/// multiplicity — half the order under Robin, nothing under Dirichlet.
pub fn count(
    records: &[ZeroRecord],
    interval: (f64, f64),
    bc_left: BoundaryCondition,
    bc_right: BoundaryCondition,
) -> ZeroCount {
    let (a, b) = interval;
    let mut out = ZeroCount {
        n: 0,
        n_m: 0,
        n_bar_m: 0,
        n_v: 0,
        m_bar_alpha: 0,
        m_bar_beta: 0,
    };
    for r in records {
        if r.is_boundary {
            let left = (r.xi - a).abs() <= (r.xi - b).abs();
            let bc = if left { bc_left } else { bc_right };
            let reduced = if bc.is_dirichlet() { 0 } else { r.order() / 2 };
            if left {
                out.m_bar_alpha = reduced;
            } else {
                out.m_bar_beta = reduced;
            }
        } else {
            out.n += 1;
            out.n_m += r.order();
            if r.sign_change {
                out.n_v += 1;
            }
        }
    }
    out.n_bar_m = out.n_m + out.m_bar_alpha + out.m_bar_beta;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form test double: `f = Σ amp · sin(freq·x + phase)`, with
    /// `f^(p) = Σ amp · freq^p · sin(freq·x + phase + p·π/2)`.
    struct SinCombo {
        interval: (f64, f64),
        terms: Vec<(f64, f64, f64)>,
    }

    impl ZeroFn for SinCombo {
        fn interval(&self) -> (f64, f64) {
            self.interval
        }
        fn value(&self, x: f64) -> crate::Result<f64> {
            self.derivative(x, 0)
        }
        fn derivative(&self, x: f64, order: usize) -> crate::Result<f64> {
            Ok(self
                .terms
                .iter()
                .map(|&(amp, freq, phase)| {
                    amp * freq.powi(order as i32)
                        * (freq * x + phase + order as f64 * PI / 2.0).sin()
                })
                .sum())
        }
        fn max_frequency(&self) -> f64 {
            self.terms
                .iter()
                .map(|t| t.1.abs())
                .fold(1.0, f64::max)
        }
        fn moment(&self, order: usize) -> f64 {
            let mass: f64 = self.terms.iter().map(|t| t.0.abs()).sum();
            let weighted: f64 = self
                .terms
                .iter()
                .map(|t| t.0.abs() * t.1.abs().max(1.0).powi(order as i32))
                .sum();
            weighted / mass
        }
    }

    fn dirichlet() -> BoundaryCondition {
        BoundaryCondition::Dirichlet
    }

    #[test]
    fn simple_zeros_of_a_pure_mode() {
        // sin 5x on (0, π): interior zeros at kπ/5, all simple.
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 5.0, 0.0)],
        };
        let records = locate_zeros(&f, 0.05).unwrap();
        let interior: Vec<_> = records.iter().filter(|r| !r.is_boundary).collect();
        assert_eq!(interior.len(), 4);
        for (k, r) in interior.iter().enumerate() {
            let want = (k + 1) as f64 * PI / 5.0;
            assert!((r.xi - want).abs() < 1e-11, "zero {k} at {}", r.xi);
            assert_eq!(r.multiplicity, Multiplicity::Exact(1));
            assert!(r.sign_change);
        }
        // B at π/5 is f′(π/5) = 5 cos π = −5.
        let b = interior[0].leading_coefficient.unwrap();
        assert!((b + 5.0).abs() < 1e-7);

        // Both endpoints are (simple) boundary zeros of sin 5x.
        assert!(records.first().unwrap().is_boundary);
        assert!(records.last().unwrap().is_boundary);

        let counts = count(&records, (0.0, PI), dirichlet(), dirichlet());
        assert_eq!(
            counts,
            ZeroCount {
                n: 4,
                n_m: 4,
                n_bar_m: 4,
                n_v: 4,
                m_bar_alpha: 0,
                m_bar_beta: 0
            }
        );
    }

    #[test]
    fn double_zero_is_found_without_a_sign_change() {
        // sin x + sin 3x = 2 sin 2x cos x: double zero at π/2, no sign change.
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 1.0, 0.0), (1.0, 3.0, 0.0)],
        };
        let records = locate_zeros(&f, 0.05).unwrap();
        let interior: Vec<_> = records.iter().filter(|r| !r.is_boundary).collect();
        assert_eq!(interior.len(), 1);
        let r = interior[0];
        assert!((r.xi - PI / 2.0).abs() < 1e-10);
        assert_eq!(r.multiplicity, Multiplicity::Exact(2));
        assert!(!r.sign_change);
        // f ≈ 4 (x − π/2)²: B = f″(π/2)/2! = 8/2 = +4.
        assert!((r.leading_coefficient.unwrap() - 4.0).abs() < 1e-6);

        let counts = count(&records, (0.0, PI), dirichlet(), dirichlet());
        assert_eq!(
            counts,
            ZeroCount {
                n: 1,
                n_m: 2,
                n_bar_m: 2,
                n_v: 0,
                m_bar_alpha: 0,
                m_bar_beta: 0
            }
        );
    }

    #[test]
    fn triple_zero_changes_sign() {
        // sin 3x = 3 sin x − 4 sin³x, so 3 sin x − sin 3x = 4 sin³x: a
        // triple zero at every multiple of π. Straddle the one at π.
        let f = SinCombo {
            interval: (1.0, 2.0 * PI - 1.0),
            terms: vec![(3.0, 1.0, 0.0), (-1.0, 3.0, 0.0)],
        };
        let records = locate_zeros(&f, 0.05).unwrap();
        let interior: Vec<_> = records.iter().filter(|r| !r.is_boundary).collect();
        assert_eq!(interior.len(), 1);
        let r = interior[0];
        assert!((r.xi - PI).abs() < 1e-9);
        assert_eq!(r.multiplicity, Multiplicity::Exact(3));
        assert!(r.sign_change);
        // 4 sin³x ≈ −4 (x − π)³ near π.
        assert!((r.leading_coefficient.unwrap() + 4.0).abs() < 1e-4);
    }

    #[test]
    fn function_without_interior_zeros_yields_no_interior_records() {
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 1.0, 0.0)],
        };
        let records = locate_zeros(&f, 0.05).unwrap();
        assert!(records.iter().all(|r| r.is_boundary));
        let counts = count(&records, (0.0, PI), dirichlet(), dirichlet());
        assert_eq!(counts.n, 0);
        assert_eq!(counts.n_bar_m, 0);
    }

    #[test]
    fn multiplicity_rejects_non_zeros() {
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 1.0, 0.0)],
        };
        assert!(matches!(
            multiplicity(&f, 1.0),
            Err(crate::Error::Zeros(ZerosError::NotAZero { .. }))
        ));
        let (m, b) = multiplicity(&f, PI).unwrap();
        assert_eq!(m, Multiplicity::Exact(1));
        assert!((b.unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn neumann_boundary_zero_has_reduced_multiplicity_one() {
        // cos x − 1: order-2 zero at 0 (cos x − 1 ~ −x²/2), nothing at π.
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 1.0, PI / 2.0), (-1.0, 0.0, PI / 2.0)],
        };
        assert_eq!(f.value(0.0).unwrap(), 0.0);
        let robin0 = BoundaryCondition::Robin(0.0);
        assert_eq!(
            reduced_multiplicity(&f, Endpoint::Left, robin0).unwrap(),
            1
        );
        assert_eq!(
            reduced_multiplicity(&f, Endpoint::Right, robin0).unwrap(),
            0
        );
        // Under Dirichlet the reduced multiplicity is 0 by definition.
        assert_eq!(
            reduced_multiplicity(&f, Endpoint::Left, dirichlet()).unwrap(),
            0
        );

        let records = locate_zeros(&f, 0.05).unwrap();
        let counts = count(&records, (0.0, PI), robin0, robin0);
        assert_eq!(
            counts,
            ZeroCount {
                n: 0,
                n_m: 0,
                n_bar_m: 1,
                n_v: 0,
                m_bar_alpha: 1,
                m_bar_beta: 0
            }
        );
    }

    #[test]
    fn odd_boundary_order_under_robin_is_flagged() {
        // sin x vanishes simply at 0; a Robin condition there is
        // incompatible, and the evenness check must say so.
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 1.0, 0.0)],
        };
        assert!(matches!(
            reduced_multiplicity(&f, Endpoint::Left, BoundaryCondition::Robin(0.0)),
            Err(crate::Error::Zeros(ZerosError::OddBoundaryOrder { order: 1, .. }))
        ));
    }

    #[test]
    fn bad_resolution_hints_are_rejected() {
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 1.0, 0.0)],
        };
        assert!(matches!(
            locate_zeros(&f, 0.0),
            Err(crate::Error::Zeros(ZerosError::BadResolutionHint { .. }))
        ));
    }

    #[test]
    fn coarse_hints_still_find_tight_zero_pairs() {
        // Zeros of sin 12x are π/12 apart; a hint far coarser than that must
        // not merge them, because the frequency bound caps the cell size.
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(1.0, 12.0, 0.0)],
        };
        let records = locate_zeros(&f, 1.0).unwrap();
        assert_eq!(records.iter().filter(|r| !r.is_boundary).count(), 11);
    }

    #[test]
    fn counting_is_stable_under_hint_refinement() {
        let f = SinCombo {
            interval: (0.0, PI),
            terms: vec![(0.8, 1.0, 0.0), (0.5, 3.0, 0.3), (0.2, 5.0, -0.4)],
        };
        let reference = count(
            &locate_zeros(&f, 0.2).unwrap(),
            (0.0, PI),
            dirichlet(),
            dirichlet(),
        );
        for hint in [0.1, 0.05, 0.025, 0.0125] {
            let counts = count(
                &locate_zeros(&f, hint).unwrap(),
                (0.0, PI),
                dirichlet(),
                dirichlet(),
            );
            assert_eq!(counts, reference, "hint {hint}");
        }
    }
}
