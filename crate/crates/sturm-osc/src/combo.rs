//! Finite linear combinations of eigenfunctions and the two classical
//! weight families built on them.
//!
//! A [`Combination`] is `Y = Σ_j A_j V_j` over consecutive eigenpair indices
//! `m..=n` of a single problem, in normal form (`A_m·A_n ≠ 0`). Attached to
//! it is an integer exponent `k` and a [`Family`] that together define the
//! weighted iterates
//!
//! ```text
//! SturmPowers:       Y_k = (−1)^k Σ_j (ρ_j + shift)^k A_j V_j
//! LiouvilleShifted:  Y_k =       Σ_p (ρ_1 − ρ_p)^k   A_p V_p
//! ```
//!
//! The Sturm family always runs on the shifted spectrum recorded by problem
//! validation, so the weights stay positive for negative `k`; the alternating
//! sign is kept because the iterates satisfy `G·Y_{k+1} = K·Y_k″ + K′·Y_k′ −
//! (L + shift·G)·Y_k` only with it. The Liouville family damps every mode
//! below the top one geometrically, which is what the limit certificate
//! exploits: for `k` beyond a computable threshold, `Y_k` has exactly one
//! zero near each zero of `V_n` and none elsewhere.
//!
//! Zero location runs on a rescaled surrogate (weights divided by the
//! largest weight magnitude) so counts remain computable for exponents far
//! beyond the range where the true-scale values overflow; [`Combination::evaluate`]
//! itself is always true-scale.

use std::sync::Arc;

use serde::Serialize;

use crate::context::{simpson, Context};
use crate::spectrum::EigenPair;
use crate::zeros::{locate_zeros, ZeroFn};

/// Weight family attached to a [`Combination`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Weights `(−1)^k (ρ_j + shift)^k` — Sturm's iterated combinations.
    SturmPowers,
    /// Weights `(ρ_1 − ρ_p)^k` — the ground mode drops out for `k ≥ 1`.
    LiouvilleShifted,
}

/// Failures in combination construction and the operations on them.
#[derive(Debug, thiserror::Error)]
pub enum ComboError {
    /// Every supplied coefficient is zero.
    #[error("combination is identically zero (all coefficients vanish)")]
    IdenticallyZero,
    /// Members come from different problems.
    #[error("eigenpairs come from different problems")]
    ProblemMismatch,
    /// Two coefficients address the same eigenpair index.
    #[error("duplicate coefficient for eigenpair index {index}")]
    DuplicateIndex {
        /// The repeated index.
        index: usize,
    },
    /// A pair in the active range `m..=n` was not supplied.
    #[error("eigenpair index {index} missing from the supplied pairs")]
    MissingMember {
        /// The absent index.
        index: usize,
    },
    /// The Liouville family needs the problem's first eigenpair even when
    /// its coefficient is zero — the weights reference `ρ_1`.
    #[error("Liouville weights need the ground eigenpair (index 1)")]
    LiouvilleNeedsGround,
    /// An operation restricted to one family was called on the other.
    #[error("{operation} requires the {needed:?} family")]
    FamilyMismatch {
        /// What was attempted.
        operation: &'static str,
        /// The family it requires.
        needed: Family,
    },
    /// Negative power of a zero weight base: the Liouville ground mode at
    /// `k < 0` with a nonzero coefficient.
    #[error("weight of eigenpair {index} is 0^{k}, undefined")]
    UndefinedWeight {
        /// Offending member index.
        index: usize,
        /// Exponent requested.
        k: i32,
    },
    /// True-scale evaluation left the finite range.
    #[error("combination value overflowed at x = {x}")]
    NonFinite {
        /// Evaluation point.
        x: f64,
    },
    /// Orthogonality integral called with overlapping index ranges.
    #[error("index ranges overlap: Y starts at {y_min}, W ends at {w_max}")]
    OverlappingIndices {
        /// Smallest active index of `Y`.
        y_min: usize,
        /// Largest active index of `W`.
        w_max: usize,
    },
    /// Halving the quadrature grid moved the integral more than the
    /// smoothness of the integrand allows — an implementation bug upstream.
    #[error("quadrature refinement moved the integral by {difference:.3e}")]
    QuadratureInconsistent {
        /// Change under one refinement.
        difference: f64,
    },
    /// Determinant evaluation points must be strictly increasing and
    /// strictly inside the interval.
    #[error("determinant points must be strictly increasing inside the interval")]
    PointsNotIncreasing,
    /// All cofactors of the fixed point-columns vanished: the block is
    /// numerically rank-deficient.
    #[error("determinant point block is rank-deficient (cofactor scale {scale:.3e})")]
    DegenerateBlock {
        /// Magnitude against which the cofactors were judged.
        scale: f64,
    },
    /// A limit certificate needs at least two modes (`n ≥ 2`).
    #[error("limit certificate needs a combination reaching past the ground mode")]
    CertificateNeedsTwoModes,
    /// No exponent below the cap makes the tail small enough.
    #[error("no certifiable exponent below k = {cap}; spectrum is near-degenerate")]
    NoCertificate {
        /// Search cap on `k_star`.
        cap: i32,
    },
    /// The certified window does not contain exactly one zero.
    #[error("window ({lo:.6}, {hi:.6}) contains {found} zeros, expected exactly 1")]
    WindowZeroCount {
        /// Window lower edge.
        lo: f64,
        /// Window upper edge.
        hi: f64,
        /// Zeros actually found inside.
        found: usize,
    },
    /// A zero of the certified iterate lies outside every window.
    #[error("zero at x = {xi:.6} lies outside every certified window")]
    ZeroOutsideWindows {
        /// Location of the stray zero.
        xi: f64,
    },
}

#[derive(Debug, Clone)]
struct Member {
    pair: EigenPair,
    coeff: f64,
}

/// A finite combination `Σ A_j V_j` of eigenfunctions of one problem, with
/// the family exponent `k` selecting the weighted iterate `Y_k`.
#[derive(Debug, Clone)]
pub struct Combination {
    /// All indices `m..=n`, ascending; interior coefficients may be zero.
    members: Vec<Member>,
    /// First eigenvalue, present whenever the index-1 pair was supplied;
    /// always present for the Liouville family.
    rho1: Option<f64>,
    family: Family,
    k: i32,
    shift: f64,
    ctx: Arc<Context>,
}

impl Combination {
    /// Build a combination from computed eigenpairs and sparse coefficients
    /// `(index, A)`. The active range is trimmed to normal form (`A_m·A_n ≠
    /// 0`); every index in `m..=n` must be present in `pairs`, and the
    /// Liouville family additionally needs the index-1 pair for its weights.
    pub fn new(
        pairs: &[EigenPair],
        coeffs: &[(usize, f64)],
        family: Family,
        k: i32,
    ) -> crate::Result<Combination> {
        let mut seen = std::collections::BTreeMap::new();
        for &(index, a) in coeffs {
            if seen.insert(index, a).is_some() {
                return Err(ComboError::DuplicateIndex { index }.into());
            }
        }
        let m = match seen.iter().find(|(_, a)| **a != 0.0) {
            Some((&i, _)) => i,
            None => return Err(ComboError::IdenticallyZero.into()),
        };
        let n = *seen.iter().rfind(|(_, a)| **a != 0.0).expect("nonzero exists").0;

        let find = |index: usize| pairs.iter().find(|e| e.index == index);
        let fingerprint = match pairs.first() {
            Some(e) => e.context().fingerprint,
            None => return Err(ComboError::MissingMember { index: m }.into()),
        };
        if pairs.iter().any(|e| e.context().fingerprint != fingerprint) {
            return Err(ComboError::ProblemMismatch.into());
        }

        let mut members = Vec::with_capacity(n - m + 1);
        for index in m..=n {
            let pair = find(index).ok_or(ComboError::MissingMember { index })?;
            members.push(Member {
                pair: pair.clone(),
                coeff: seen.get(&index).copied().unwrap_or(0.0),
            });
        }
        let rho1 = find(1).map(|e| e.rho);
        if family == Family::LiouvilleShifted && rho1.is_none() {
            return Err(ComboError::LiouvilleNeedsGround.into());
        }
        let ctx = members[0].pair.context().clone();
        let shift = ctx.shift;
        Ok(Combination {
            members,
            rho1,
            family,
            k,
            shift,
            ctx,
        })
    }

    /// The weight family.
    pub fn family(&self) -> Family {
        self.family
    }

    /// The current exponent `k`.
    pub fn k(&self) -> i32 {
        self.k
    }

    /// Smallest index with a nonzero coefficient.
    pub fn min_index(&self) -> usize {
        self.members
            .iter()
            .find(|m| m.coeff != 0.0)
            .expect("normal form")
            .pair
            .index
    }

    /// Largest index with a nonzero coefficient.
    pub fn max_index(&self) -> usize {
        self.members
            .iter()
            .rfind(|m| m.coeff != 0.0)
            .expect("normal form")
            .pair
            .index
    }

    /// The members `m..=n` with their coefficients, ascending by index.
    pub fn members(&self) -> impl Iterator<Item = (&EigenPair, f64)> {
        self.members.iter().map(|m| (&m.pair, m.coeff))
    }

    /// Same combination with the exponent moved by `dk`; evaluation honors
    /// the new weights. `shift_k(dk).shift_k(-dk)` is the identity.
    pub fn shift_k(&self, dk: i32) -> Combination {
        let mut c = self.clone();
        c.k += dk;
        c
    }

    pub(crate) fn context(&self) -> &Arc<Context> {
        &self.ctx
    }

    /// Weight base of one member: what gets raised to the `k`-th power
    /// (the sign convention is applied separately).
    fn base(&self, pair: &EigenPair) -> f64 {
        match self.family {
            Family::SturmPowers => pair.rho + self.shift,
            Family::LiouvilleShifted => {
                self.rho1.expect("checked at construction") - pair.rho
            }
        }
    }

    /// True-scale weight of one member, alternating sign included.
    fn weight(&self, pair: &EigenPair) -> crate::Result<f64> {
        let base = self.base(pair);
        if base == 0.0 && self.k < 0 {
            return Err(ComboError::UndefinedWeight {
                index: pair.index,
                k: self.k,
            }
            .into());
        }
        let w = base.powi(self.k);
        Ok(match self.family {
            Family::SturmPowers if self.k % 2 != 0 => -w,
            _ => w,
        })
    }

    /// `Y_k^{(order)}(x)` at true scale: `Σ weight_j · A_j · V_j^{(order)}(x)`.
    ///
    /// Large exponents overflow the true scale and are reported as
    /// [`ComboError::NonFinite`]; zero location is immune because it runs on
    /// the rescaled surrogate instead.
    pub fn evaluate(&self, x: f64, order: usize) -> crate::Result<f64> {
        let mut sum = 0.0;
        for m in &self.members {
            if m.coeff == 0.0 {
                continue;
            }
            let w = self.weight(&m.pair)?;
            if w == 0.0 {
                continue;
            }
            sum += w * m.coeff * m.pair.trajectory.derivative(x, order)?;
        }
        if sum.is_finite() {
            Ok(sum)
        } else {
            Err(ComboError::NonFinite { x }.into())
        }
    }

    /// Weights divided by the largest weight magnitude among active members:
    /// the surrogate `Y_k / max_j |weight_j|` has the same zeros, signs and
    /// multiplicities as `Y_k` but stays finite for any `k` (ratios are ≤ 1,
    /// so extreme exponents underflow harmlessly to zero instead of
    /// overflowing).
    fn surrogate_weights(&self) -> crate::Result<Vec<f64>> {
        let neg = if self.k % 2 != 0 { -1.0 } else { 1.0 };
        let mut reference = 0.0f64;
        for m in &self.members {
            if m.coeff == 0.0 {
                continue;
            }
            let b = self.base(&m.pair).abs();
            if b == 0.0 {
                if self.k < 0 {
                    return Err(ComboError::UndefinedWeight {
                        index: m.pair.index,
                        k: self.k,
                    }
                    .into());
                }
                continue;
            }
            if self.k >= 0 {
                reference = reference.max(b);
            } else if reference == 0.0 {
                reference = b;
            } else {
                reference = reference.min(b);
            }
        }
        self.members
            .iter()
            .map(|m| {
                if m.coeff == 0.0 {
                    return Ok(0.0);
                }
                let b = self.base(&m.pair).abs();
                if self.k == 0 {
                    return Ok(1.0); // every weight has magnitude 1 at k = 0
                }
                if b == 0.0 {
                    return Ok(0.0); // dropped mode (Liouville ground, k ≥ 1)
                }
                Ok(neg * (b / reference).powi(self.k))
            })
            .collect()
    }

    /// Sup over a 512-point grid of the defect in the differential relation
    /// `G·Y_{k+1} = K·Y_k″ + K′·Y_k′ − (L + shift·G)·Y_k`, normalized by the
    /// largest term magnitude seen on the grid. Small (≤ 1e-6) when the
    /// eigenpairs are consistent; a corrupted eigenvalue shows up at the
    /// size of the corruption.
    pub fn relation_residual(&self) -> crate::Result<f64> {
        if self.family != Family::SturmPowers {
            return Err(ComboError::FamilyMismatch {
                operation: "relation_residual",
                needed: Family::SturmPowers,
            }
            .into());
        }
        let next = self.shift_k(1);
        let (alpha, beta) = (self.ctx.alpha, self.ctx.beta);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..512 {
            let x = alpha + (beta - alpha) * i as f64 / 511.0;
            let g = self.ctx.g(0, x)?;
            let kx = self.ctx.k(0, x)?;
            let kp = self.ctx.k(1, x)?;
            let l_eff = self.ctx.l(0, x)? + self.shift * g;
            let lhs = g * next.evaluate(x, 0)?;
            let t2 = kx * self.evaluate(x, 2)?;
            let t1 = kp * self.evaluate(x, 1)?;
            let t0 = l_eff * self.evaluate(x, 0)?;
            worst = worst.max((lhs - (t2 + t1 - t0)).abs());
            scale = scale.max(lhs.abs() + t2.abs() + t1.abs() + t0.abs());
        }
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(worst / scale)
    }
}

impl ZeroFn for Combination {
    fn interval(&self) -> (f64, f64) {
        (self.ctx.alpha, self.ctx.beta)
    }

    fn value(&self, x: f64) -> crate::Result<f64> {
        self.derivative(x, 0)
    }

    fn derivative(&self, x: f64, order: usize) -> crate::Result<f64> {
        let weights = self.surrogate_weights()?;
        let mut sum = 0.0;
        for (m, w) in self.members.iter().zip(&weights) {
            if *w == 0.0 {
                continue;
            }
            sum += w * m.coeff * m.pair.trajectory.derivative(x, order)?;
        }
        Ok(sum)
    }

    fn max_frequency(&self) -> f64 {
        // The top active mode oscillates fastest; its frequency bounds the
        // zero spacing of the whole combination.
        let top = self
            .members
            .iter()
            .rfind(|m| m.coeff != 0.0)
            .expect("normal form");
        self.ctx.frequency_bound(top.pair.rho)
    }

    fn moment(&self, order: usize) -> f64 {
        self.max_frequency().max(1.0).powi(order as i32)
    }
}

/// `∫ G·Y·W` over the interval by composite Simpson on 4096 panels, checked
/// once against the 2048-panel value. When `W` is spanned by indices
/// strictly below every active index of `Y`, eigenfunction orthogonality
/// forces the result to vanish; overlapping ranges are a precondition error.
pub fn orthogonality_integral(y: &Combination, w: &Combination) -> crate::Result<f64> {
    if y.ctx.fingerprint != w.ctx.fingerprint {
        return Err(ComboError::ProblemMismatch.into());
    }
    let (y_min, w_max) = (y.min_index(), w.max_index());
    if w_max >= y_min {
        return Err(ComboError::OverlappingIndices { y_min, w_max }.into());
    }
    let (alpha, beta) = (y.ctx.alpha, y.ctx.beta);
    let f = |x: f64| -> crate::Result<f64> {
        Ok(y.ctx.g(0, x)? * y.evaluate(x, 0)? * w.evaluate(x, 0)?)
    };
    let coarse = simpson(f, alpha, beta, 2048)?;
    let fine = simpson(f, alpha, beta, 4096)?;
    // Both grids integrate a smooth integrand; a visible gap between them
    // means a member trajectory is broken, not that more panels are needed.
    let difference = (fine - coarse).abs();
    let scale = sup_product_scale(y, w)?;
    if difference > 1e-6 * scale.max(1.0) {
        return Err(ComboError::QuadratureInconsistent { difference }.into());
    }
    Ok(fine)
}

/// Crude scale for the orthogonality contract: `max|Y| · max|W|` over a
/// coarse grid.
fn sup_product_scale(y: &Combination, w: &Combination) -> crate::Result<f64> {
    let (alpha, beta) = (y.ctx.alpha, y.ctx.beta);
    let mut sup_y = 0.0f64;
    let mut sup_w = 0.0f64;
    for i in 0..=256 {
        let x = alpha + (beta - alpha) * i as f64 / 256.0;
        sup_y = sup_y.max(y.evaluate(x, 0)?.abs());
        sup_w = sup_w.max(w.evaluate(x, 0)?.abs());
    }
    Ok(sup_y * sup_w)
}

/// Determinant of the matrix with rows `V_1..V_{μ+1}` evaluated at the
/// columns `(a_1, …, a_μ, x)`, as a function of `x`.
///
/// Expanding along the last column shows this is itself a combination
/// `Σ_q c_q V_q` whose coefficients are signed cofactors of the fixed point
/// block — computed once here, after which the result can be evaluated,
/// scanned for zeros, or fed to any other combination operation. By
/// construction it vanishes at every `a_i` (repeated column).
pub fn determinant_combination(
    pairs: &[EigenPair],
    points: &[f64],
) -> crate::Result<Combination> {
    let mu = points.len();
    let first = pairs.first().ok_or(ComboError::MissingMember { index: 1 })?;
    let (alpha, beta) = (first.trajectory.alpha(), first.trajectory.beta());
    let increasing = points.windows(2).all(|w| w[0] < w[1]);
    let interior = points.iter().all(|&a| alpha < a && a < beta);
    if mu == 0 || !increasing || !interior {
        return Err(ComboError::PointsNotIncreasing.into());
    }

    // Rows are eigenpair indices 1..=μ+1 in order.
    let mut rows = Vec::with_capacity(mu + 1);
    for index in 1..=mu + 1 {
        let pair = pairs
            .iter()
            .find(|e| e.index == index)
            .ok_or(ComboError::MissingMember { index })?;
        let values: Vec<f64> = points.iter().map(|&a| pair.value(a)).collect();
        rows.push((pair, values));
    }

    // Cofactor of row q against the fixed μ columns, with the sign of the
    // last-column expansion: c_q = (−1)^{q + μ + 1} · minor_q.
    let mut coeffs = Vec::with_capacity(mu + 1);
    let mut largest = 0.0f64;
    for q in 0..=mu {
        let minor: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != q)
            .map(|(_, (_, vals))| vals.clone())
            .collect();
        let sign = if (q + mu) % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * det_lu(minor);
        largest = largest.max(c.abs());
        coeffs.push((q + 1, c));
    }

    // Judge degeneracy against the natural size of the minors: the product
    // over columns of the largest eigenfunction value in that column.
    let mut scale = 1.0f64;
    for j in 0..mu {
        let col_max = rows
            .iter()
            .map(|(_, vals)| vals[j].abs())
            .fold(0.0f64, f64::max);
        scale *= col_max;
    }
    if largest <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(ComboError::DegenerateBlock { scale }.into());
    }

    Combination::new(pairs, &coeffs, Family::SturmPowers, 0)
}

/// Value at `x` of the determinant built by [`determinant_combination`].
pub fn liouville_determinant(
    pairs: &[EigenPair],
    points: &[f64],
    x: f64,
) -> crate::Result<f64> {
    determinant_combination(pairs, points)?.evaluate(x, 0)
}

/// Determinant by LU decomposition with partial pivoting; `m` is square and
/// small (one row per eigenpair).
fn det_lu(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("nonempty");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for j in col + 1..n {
                let upper = m[col][j];
                m[row][j] -= factor * upper;
            }
        }
    }
    det
}

/// Cap on the certified exponent: spectra needing more damping than this
/// are reported as near-degenerate rather than certified.
const K_STAR_CAP: i32 = 10_000;

/// Proof data for the large-`k` limit of a Liouville-family combination:
/// beyond `k_star`, every zero of `Y_k` lies in a small window around a zero
/// of the top mode `V_n`, one per window.
#[derive(Debug, Clone, Serialize)]
pub struct LimitCertificate {
    /// Geometric damping ratio `(ρ_{n−1} − ρ_1)/(ρ_n − ρ_1)` of the tail.
    pub damping: f64,
    /// `damping^k` at the certified exponent `max(k, k_star)` — the factor
    /// by which the tail bounds below are suppressed.
    pub omega: f64,
    /// Bound on the suppressed tail `sup Σ_{p<n} |A_p/A_n| sup|V_p|`.
    pub tail_sup: f64,
    /// Same bound for the tail's derivative.
    pub tail_slope_sup: f64,
    /// Separation margin: inside each window `|V_n′|` stays above it,
    /// outside all of them `|V_n|` does.
    pub margin: f64,
    /// Half-width of the windows.
    pub window_radius: f64,
    /// Smallest exponent at which `omega·max(tail bounds) ≤ margin/2`.
    pub k_star: i32,
    /// Window of radius `window_radius` around each interior zero of `V_n`.
    pub windows: Vec<(f64, f64)>,
    /// Dirichlet end at `α`: the common boundary zero persists for every
    /// `k` and is excluded from the window bookkeeping.
    pub boundary_zone_left: bool,
    /// Same for `β`.
    pub boundary_zone_right: bool,
    /// The exponent at which the one-zero-per-window claim was mechanically
    /// checked; `None` when the requested `k` was below `k_star`.
    pub verified_at_k: Option<i32>,
}

/// Build the limit certificate for a Liouville-family combination and, when
/// `k ≥ k_star`, mechanically verify the claim at exponent `k`: exactly one
/// zero of `Y_k` inside each window, none outside (Dirichlet boundary zeros
/// excepted — they are common to every member and flagged separately).
pub fn limit_certificate(c: &Combination, k: i32) -> crate::Result<LimitCertificate> {
    if c.family != Family::LiouvilleShifted {
        return Err(ComboError::FamilyMismatch {
            operation: "limit_certificate",
            needed: Family::LiouvilleShifted,
        }
        .into());
    }
    let n = c.max_index();
    if n < 2 {
        return Err(ComboError::CertificateNeedsTwoModes.into());
    }
    let rho1 = c.rho1.expect("Liouville family carries rho_1");
    let top = c
        .members
        .iter()
        .rfind(|m| m.coeff != 0.0)
        .expect("normal form");
    let a_n = top.coeff;
    let v_n = &top.pair;

    // Damping ratio of the slowest-decaying suppressed mode. Index n−1 is
    // present because members cover m..=n; when n−1 is the ground mode the
    // numerator vanishes and one application of the weights kills the tail.
    let rho_prev = c
        .members
        .iter()
        .rev()
        .find(|m| m.pair.index == n - 1)
        .map(|m| m.pair.rho)
        .unwrap_or(rho1);
    let damping = ((rho_prev - rho1) / (v_n.rho - rho1)).max(0.0);

    // Tail bounds relative to the top coefficient (the ground mode drops
    // out for k ≥ 1 and never enters the tail).
    let mut tail_sup = 0.0;
    let mut tail_slope_sup = 0.0;
    for m in &c.members {
        if m.coeff == 0.0 || m.pair.index == n || m.pair.index == 1 {
            continue;
        }
        let ratio = (m.coeff / a_n).abs();
        tail_sup += ratio * m.pair.sup_value();
        tail_slope_sup += ratio * m.pair.sup_slope()?;
    }

    // Interior zeros of the top mode are the window centers.
    let span = c.ctx.beta - c.ctx.alpha;
    let zeros_n = locate_zeros(v_n, span)?;
    let centers: Vec<f64> = zeros_n
        .iter()
        .filter(|z| !z.is_boundary)
        .map(|z| z.xi)
        .collect();
    let boundary_zone_left = c.ctx.bc_left.is_dirichlet();
    let boundary_zone_right = c.ctx.bc_right.is_dirichlet();

    // Largest window half-width keeping windows disjoint, inside the
    // interval, and clear of the boundary zones.
    let mut gap = span;
    if let (Some(&first), Some(&last)) = (centers.first(), centers.last()) {
        gap = gap.min(first - c.ctx.alpha).min(c.ctx.beta - last);
    }
    for w in centers.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    let g_max = 0.45 * gap;

    // Scan dyadic half-widths for the smallest certifiable exponent.
    // Shrinking δ raises the off-window floor of |V_n| but the windows must
    // stay wide enough that the slope floor certifies monotonicity through each
    // zero; neither extreme wins in general.
    let mut best: Option<(f64, f64, i32)> = None; // (delta, epsilon, k_star)
    for j in 1..=12 {
        let delta = g_max * 0.5f64.powi(j - 1);
        let epsilon = separation_margin(c, v_n, &centers, delta)?;
        if !(epsilon > 0.0) {
            continue;
        }
        let need = 2.0 * tail_sup.max(tail_slope_sup) / epsilon;
        let k_star = if need <= 1.0 || damping == 0.0 {
            1
        } else if damping >= 1.0 {
            K_STAR_CAP + 1
        } else {
            // smallest k ≥ 1 with damping^k ≤ 1/need
            let k = (-(need.ln()) / damping.ln()).ceil();
            if k.is_finite() && k <= f64::from(K_STAR_CAP) {
                (k as i32).max(1)
            } else {
                K_STAR_CAP + 1
            }
        };
        if best.map_or(true, |(_, _, b)| k_star < b) {
            best = Some((delta, epsilon, k_star));
        }
    }
    let (window_radius, margin, k_star) = best.ok_or(ComboError::NoCertificate { cap: K_STAR_CAP })?;
    if k_star > K_STAR_CAP {
        return Err(ComboError::NoCertificate { cap: K_STAR_CAP }.into());
    }

    let windows: Vec<(f64, f64)> = centers.iter().map(|&xi| (xi - window_radius, xi + window_radius)).collect();
    let k_eff = k.max(k_star);
    let omega = damping.powi(k_eff);

    // Mechanical check at the requested exponent, once it is in the
    // certified regime.
    let verified_at_k = if k >= k_star {
        let y_k = Combination { k, ..c.clone() };
        let found = locate_zeros(&y_k, span)?;
        for z in found.iter().filter(|z| !z.is_boundary) {
            if !windows.iter().any(|&(lo, hi)| lo < z.xi && z.xi < hi) {
                return Err(ComboError::ZeroOutsideWindows { xi: z.xi }.into());
            }
        }
        for &(lo, hi) in &windows {
            let inside = found
                .iter()
                .filter(|z| !z.is_boundary && lo < z.xi && z.xi < hi)
                .count();
            if inside != 1 {
                return Err(ComboError::WindowZeroCount {
                    lo,
                    hi,
                    found: inside,
                }
                .into());
            }
        }
        Some(k)
    } else {
        None
    };

    Ok(LimitCertificate {
        damping,
        omega,
        tail_sup,
        tail_slope_sup,
        margin,
        window_radius,
        k_star,
        windows,
        boundary_zone_left,
        boundary_zone_right,
        verified_at_k,
    })
}

/// Separation margin of a window system: inside each window (and each
/// Dirichlet boundary zone) the
/// slope floor `min |V_n′|`, outside them the value floor `min |V_n|`,
/// sampled on a grid fine against the mode's wavelength.
fn separation_margin(
    c: &Combination,
    v_n: &EigenPair,
    centers: &[f64],
    delta: f64,
) -> crate::Result<f64> {
    let (alpha, beta) = (c.ctx.alpha, c.ctx.beta);
    let mut eps = f64::INFINITY;

    // Window slope floors, 128 samples each.
    for &xi in centers {
        for i in 0..=128 {
            let x = (xi - delta) + 2.0 * delta * i as f64 / 128.0;
            eps = eps.min(v_n.trajectory.derivative(x, 1)?.abs());
        }
    }
    // Dirichlet boundary zones behave like half-windows anchored at the end
    // point: the combination vanishes there for every k, and a slope floor
    // keeps any further zero out of the zone.
    if c.ctx.bc_left.is_dirichlet() {
        for i in 0..=64 {
            let x = alpha + delta * i as f64 / 64.0;
            eps = eps.min(v_n.trajectory.derivative(x, 1)?.abs());
        }
    }
    if c.ctx.bc_right.is_dirichlet() {
        for i in 0..=64 {
            let x = (beta - delta) + delta * i as f64 / 64.0;
            eps = eps.min(v_n.trajectory.derivative(x, 1)?.abs());
        }
    }

    // Off-window value floor, sampled densely over the rest of the interval.
    let samples = 2048;
    'outer: for i in 0..=samples {
        let x = alpha + (beta - alpha) * i as f64 / samples as f64;
        for &xi in centers {
            if (x - xi).abs() < delta {
                continue 'outer;
            }
        }
        if c.ctx.bc_left.is_dirichlet() && x - alpha < delta {
            continue;
        }
        if c.ctx.bc_right.is_dirichlet() && beta - x < delta {
            continue;
        }
        eps = eps.min(v_n.value(x).abs());
    }
    Ok(if eps.is_finite() { eps } else { 0.0 })
}
