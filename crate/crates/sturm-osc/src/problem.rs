//! Problem definition: interval, coefficient expressions, boundary
//! conditions, positivity validation, and the spectral shift constant.
//!
//! A [`Problem`] is plain immutable data; nothing is computed at
//! construction. [`validate`] checks the standing assumptions on a finite
//! grid and produces the [`ValidationReport`] that the eigenvalue solver
//! consumes (notably the shift `c` that makes `L + cG > 0`, so shooting
//! always happens on a positive-potential problem).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::expr::{self, Expression};

/// Boundary condition at one endpoint.
///
/// `Robin(h)` imposes `K V′ = h V` at the left end and `K V′ = -H V` at the
/// right end, with `h, H ≥ 0`; `h = 0` is the Neumann case. `Dirichlet`
/// (`V = 0`) is the `h → ∞` limit and is kept as its own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// `V = 0` at the endpoint.
    Dirichlet,
    /// `K V′ = ±h V` at the endpoint, with the sign fixed by the side.
    Robin(f64),
}

impl BoundaryCondition {
    /// True for the Dirichlet variant.
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet)
    }
}

/// How much regularity the coefficients are assumed to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// `K, G, L > 0` on the whole interval.
    Strong,
    /// Only `K, G > 0`; `L` may change sign as long as `L/G` is bounded
    /// below. Eigenvalues may then be negative.
    Weak,
}

/// A Sturm–Liouville problem `(K V′)′ + (r G − L) V = 0` on `]alpha, beta[`.
///
/// All fields are public; the struct carries no caches, so instances can be
/// built literally (see the crate-level example) and shared freely across
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    /// Left endpoint.
    pub alpha: f64,
    /// Right endpoint, `beta > alpha`.
    pub beta: f64,
    /// Stiffness coefficient `K`, positive on `[alpha, beta]`.
    pub k: Expression,
    /// Weight `G`, positive on `[alpha, beta]`.
    pub g: Expression,
    /// Potential `L`; sign constraints depend on [`Regularity`].
    pub l: Expression,
    /// Condition at `alpha`.
    pub bc_left: BoundaryCondition,
    /// Condition at `beta`.
    pub bc_right: BoundaryCondition,
    /// Assumption mode checked by [`validate`].
    pub regularity: Regularity,
}

impl Problem {
    /// Interval length `beta - alpha`.
    pub fn span(&self) -> f64 {
        self.beta - self.alpha
    }

    /// Stable digest of the full problem definition, used to reject
    /// cross-problem mixing of eigenpairs.
    pub(crate) fn fingerprint(&self) -> u64 {
        fnv1a(format_problem(self).as_bytes())
    }
}

/// What [`validate`] measured, plus the spectral shift.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    /// Number of uniform grid points the checks ran on.
    pub grid_points: usize,
    /// Minimum of `K` over the grid.
    pub min_k: f64,
    /// Minimum of `G` over the grid.
    pub min_g: f64,
    /// Minimum of `L` over the grid.
    pub min_l: f64,
    /// Minimum of `L/G` over the grid (the weak-mode lower bound).
    pub ratio_floor: f64,
    /// Shift `c ≥ 0` with `L + cG > 0` on the grid. Zero in strong mode and
    /// whenever `L` is already positive; the solver works on the shifted
    /// problem and un-shifts reported eigenvalues.
    pub shift: f64,
}

/// Grid resolution used by the command-line tools when none is given.
pub const DEFAULT_GRID: usize = 4096;

/// Smallest accepted interval length.
pub const MIN_SPAN: f64 = 1e-8;

/// Added on top of `-min(L/G)` so the shifted potential is strictly positive.
const SHIFT_MARGIN: f64 = 1e-6;

/// Problem construction, validation, or file-format failure.
#[derive(Debug, Error)]
pub enum ProblemError {
    /// Endpoints are non-finite, reversed, or closer than [`MIN_SPAN`].
    #[error("invalid interval [{alpha:e}, {beta:e}]: need beta - alpha >= {MIN_SPAN:e}")]
    InvalidInterval {
        /// Left endpoint as given.
        alpha: f64,
        /// Right endpoint as given.
        beta: f64,
    },
    /// Fewer than 64 validation grid points requested.
    #[error("validation grid of {grid_points} points is too coarse (need >= 64)")]
    GridTooCoarse {
        /// Requested grid size.
        grid_points: usize,
    },
    /// A Robin constant is negative or non-finite.
    #[error("robin constant at {side} endpoint must be finite and >= 0, got {h:e}")]
    InvalidRobinConstant {
        /// `"left"` or `"right"`.
        side: &'static str,
        /// Offending constant.
        h: f64,
    },
    /// `K` or `G` fails strict positivity on the grid.
    #[error("{coefficient} must be positive: {coefficient}({x:e}) = {value:e}")]
    PositivityViolation {
        /// `"K"` or `"G"`.
        coefficient: &'static str,
        /// Grid point where positivity fails.
        x: f64,
        /// Value there.
        value: f64,
    },
    /// `L` fails strict positivity on the grid in strong mode.
    #[error("strong regularity requires L > 0: L({x:e}) = {value:e} (use weak mode to allow this)")]
    NegativeL {
        /// Grid point where `L` is non-positive.
        x: f64,
        /// Value there.
        value: f64,
    },
    /// A coefficient hit a domain error somewhere on the grid.
    #[error("{coefficient} is not evaluable on the interval: {source}")]
    Domain {
        /// `"K"`, `"G"`, or `"L"`.
        coefficient: &'static str,
        /// Underlying evaluation failure.
        source: expr::DomainError,
    },
    /// Problem file could not be read.
    #[error("failed to read {path}: {source}")]
    Io {
        /// Path as given.
        path: PathBuf,
        /// Underlying I/O error.
        source: std::io::Error,
    },
    /// Problem file line does not match the format.
    #[error("problem file line {line}: {message}")]
    FileParse {
        /// 1-based line number.
        line: usize,
        /// What went wrong.
        message: String,
    },
    /// A required key never appeared in the problem file.
    #[error("problem file is missing key `{key}`")]
    MissingKey {
        /// The absent key.
        key: &'static str,
    },
}

/// Check the standing assumptions on a uniform grid of `grid_points` points
/// (endpoints included) and compute the spectral shift.
///
/// Positivity is established on the grid only, not symbolically; a
/// coefficient that dips negative strictly between grid points will pass.
/// `grid_points` must be at least 64; the command-line tools use
/// [`DEFAULT_GRID`].
pub fn validate(p: &Problem, grid_points: usize) -> Result<ValidationReport, ProblemError> {
    if !(p.alpha.is_finite() && p.beta.is_finite()) || p.beta - p.alpha < MIN_SPAN {
        return Err(ProblemError::InvalidInterval {
            alpha: p.alpha,
            beta: p.beta,
        });
    }
    if grid_points < 64 {
        return Err(ProblemError::GridTooCoarse { grid_points });
    }
    for (side, bc) in [("left", p.bc_left), ("right", p.bc_right)] {
        if let BoundaryCondition::Robin(h) = bc {
            if !h.is_finite() || h < 0.0 {
                return Err(ProblemError::InvalidRobinConstant { side, h });
            }
        }
    }

    let eval = |e: &Expression, name: &'static str, x: f64| {
        e.evaluate(x)
            .map_err(|source| ProblemError::Domain {
                coefficient: name,
                source,
            })
    };

    let mut min_k = f64::INFINITY;
    let mut min_g = f64::INFINITY;
    let mut min_l = f64::INFINITY;
    let mut ratio_floor = f64::INFINITY;
    let step = (p.beta - p.alpha) / (grid_points - 1) as f64;
    for i in 0..grid_points {
        let x = if i + 1 == grid_points {
            p.beta
        } else {
            p.alpha + step * i as f64
        };
        let kx = eval(&p.k, "K", x)?;
        if kx <= 0.0 {
            return Err(ProblemError::PositivityViolation {
                coefficient: "K",
                x,
                value: kx,
            });
        }
        let gx = eval(&p.g, "G", x)?;
        if gx <= 0.0 {
            return Err(ProblemError::PositivityViolation {
                coefficient: "G",
                x,
                value: gx,
            });
        }
        let lx = eval(&p.l, "L", x)?;
        if p.regularity == Regularity::Strong && lx <= 0.0 {
            return Err(ProblemError::NegativeL { x, value: lx });
        }
        min_k = min_k.min(kx);
        min_g = min_g.min(gx);
        min_l = min_l.min(lx);
        ratio_floor = ratio_floor.min(lx / gx);
    }

    // After the strong-mode check above, ratio_floor > 0 implies shift = 0,
    // so a strong-accepted problem re-validated as weak also gets c = 0.
    let shift = if ratio_floor > 0.0 {
        0.0
    } else {
        -ratio_floor + SHIFT_MARGIN
    };

    Ok(ValidationReport {
        grid_points,
        min_k,
        min_g,
        min_l,
        ratio_floor,
        shift,
    })
}

/// Read and parse a problem file. Validation is *not* run; call [`validate`]
/// on the result.
pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem, ProblemError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text)
}

/// Parse the line-oriented `key = value` problem format:
///
/// ```text
/// interval = [0, 3.141592653589793]
/// K = "1"
/// G = "1"
/// L = "1"
/// bc_left = dirichlet
/// bc_right = robin 1.0
/// regularity = strong
/// ```
///
/// Blank lines and `#` comments are ignored. Every key is required and may
/// appear only once.
pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let mut interval: Option<(f64, f64)> = None;
    let mut coeffs: [Option<Expression>; 3] = [None, None, None];
    let mut bc_left: Option<BoundaryCondition> = None;
    let mut bc_right: Option<BoundaryCondition> = None;
    let mut regularity: Option<Regularity> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ProblemError::FileParse {
                line,
                message: format!("expected `key = value`, got `{trimmed}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let fail = |message: String| ProblemError::FileParse { line, message };
        match key {
            "interval" => {
                if interval.is_some() {
                    return Err(fail("duplicate key `interval`".into()));
                }
                interval = Some(parse_interval(value).map_err(fail)?);
            }
            "K" | "G" | "L" => {
                let slot = match key {
                    "K" => &mut coeffs[0],
                    "G" => &mut coeffs[1],
                    _ => &mut coeffs[2],
                };
                if slot.is_some() {
                    return Err(fail(format!("duplicate key `{key}`")));
                }
                let inner = value
                    .strip_prefix('"')
                    .and_then(|v| v.strip_suffix('"'))
                    .ok_or_else(|| fail(format!("{key} must be a double-quoted expression")))?;
                let parsed = Expression::parse(inner).map_err(|e| ProblemError::FileParse {
                    line,
                    message: format!("in {key} expression: {e}"),
                })?;
                *slot = Some(parsed);
            }
            "bc_left" | "bc_right" => {
                let slot = if key == "bc_left" {
                    &mut bc_left
                } else {
                    &mut bc_right
                };
                if slot.is_some() {
                    return Err(fail(format!("duplicate key `{key}`")));
                }
                *slot = Some(parse_bc(value).map_err(fail)?);
            }
            "regularity" => {
                if regularity.is_some() {
                    return Err(fail("duplicate key `regularity`".into()));
                }
                regularity = Some(match value {
                    "strong" => Regularity::Strong,
                    "weak" => Regularity::Weak,
                    other => {
                        return Err(fail(format!(
                            "regularity must be `strong` or `weak`, got `{other}`"
                        )))
                    }
                });
            }
            other => {
                return Err(fail(format!("unknown key `{other}`")));
            }
        }
    }

    let (alpha, beta) = interval.ok_or(ProblemError::MissingKey { key: "interval" })?;
    let [k, g, l] = coeffs;
    Ok(Problem {
        alpha,
        beta,
        k: k.ok_or(ProblemError::MissingKey { key: "K" })?,
        g: g.ok_or(ProblemError::MissingKey { key: "G" })?,
        l: l.ok_or(ProblemError::MissingKey { key: "L" })?,
        bc_left: bc_left.ok_or(ProblemError::MissingKey { key: "bc_left" })?,
        bc_right: bc_right.ok_or(ProblemError::MissingKey { key: "bc_right" })?,
        regularity: regularity.ok_or(ProblemError::MissingKey { key: "regularity" })?,
    })
}

/// Render a problem in the file format accepted by [`parse_problem`].
pub fn format_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "interval = [{}, {}]", p.alpha, p.beta);
    let _ = writeln!(out, "K = \"{}\"", p.k);
    let _ = writeln!(out, "G = \"{}\"", p.g);
    let _ = writeln!(out, "L = \"{}\"", p.l);
    let _ = writeln!(out, "bc_left = {}", format_bc(p.bc_left));
    let _ = writeln!(out, "bc_right = {}", format_bc(p.bc_right));
    let _ = writeln!(
        out,
        "regularity = {}",
        match p.regularity {
            Regularity::Strong => "strong",
            Regularity::Weak => "weak",
        }
    );
    out
}

fn format_bc(bc: BoundaryCondition) -> String {
    match bc {
        BoundaryCondition::Dirichlet => "dirichlet".into(),
        BoundaryCondition::Robin(h) => format!("robin {h}"),
    }
}

fn parse_float(text: &str) -> Result<f64, String> {
    // Tolerate the Unicode minus sign in hand-written files.
    let ascii = text.replace('\u{2212}', "-");
    ascii
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("malformed number `{text}`"))
}

fn parse_interval(value: &str) -> Result<(f64, f64), String> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| format!("interval must look like `[a, b]`, got `{value}`"))?;
    let Some((a, b)) = inner.split_once(',') else {
        return Err(format!("interval must have two comma-separated endpoints, got `{value}`"));
    };
    Ok((parse_float(a)?, parse_float(b)?))
}

fn parse_bc(value: &str) -> Result<BoundaryCondition, String> {
    if value == "dirichlet" {
        return Ok(BoundaryCondition::Dirichlet);
    }
    if let Some(rest) = value.strip_prefix("robin") {
        let h = parse_float(rest)?;
        if !h.is_finite() || h < 0.0 {
            return Err(format!("robin constant must be >= 0, got {h}"));
        }
        return Ok(BoundaryCondition::Robin(h));
    }
    Err(format!(
        "boundary condition must be `dirichlet` or `robin <h>`, got `{value}`"
    ))
}

/// 64-bit FNV-1a, used for problem fingerprints and report digests.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
