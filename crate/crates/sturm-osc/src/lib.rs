//! Sturm–Liouville eigenproblems on an interval, and mechanical verification
//! of the classical oscillation theorems for linear combinations of
//! eigenfunctions.
//!
//! The library computes eigenpairs of
//!
//! ```text
//! (K V′)′ + (r G − L) V = 0   on ]α, β[
//! (K V′ − h V)(α) = 0,        (K V′ + H V)(β) = 0
//! ```
//!
//! with `K, G > 0` and Robin (`h, H ≥ 0`) or Dirichlet ends, by shooting on
//! the Prüfer phase. On top of the eigenpairs it provides zero location with
//! multiplicities, the reweighted `Y_k` families of a combination, and
//! executable checks of the zero-count chain, the count monotonicity in `k`,
//! heat-flow zero decay, and the large-`k` localization certificate.
//!
//! ```
//! use sturm_osc::expr::Expression;
//! use sturm_osc::problem::{BoundaryCondition, Problem, Regularity, validate};
//! use sturm_osc::spectrum::compute_eigenvalue;
//!
//! let p = Problem {
//!     alpha: 0.0,
//!     beta: std::f64::consts::PI,
//!     k: Expression::parse("1").unwrap(),
//!     g: Expression::parse("1").unwrap(),
//!     l: Expression::parse("1").unwrap(),
//!     bc_left: BoundaryCondition::Dirichlet,
//!     bc_right: BoundaryCondition::Dirichlet,
//!     regularity: Regularity::Strong,
//! };
//! let report = validate(&p, 256).unwrap();
//! let ground = compute_eigenvalue(&p, &report, 1).unwrap();
//! assert!((ground.rho - 2.0).abs() < 1e-8); // -V″ + V = r V on [0, π]
//! ```

#![warn(missing_docs)]

pub mod combo;
pub mod expr;
pub mod ivp;
pub mod problem;
pub mod spectrum;
pub mod verify;
pub mod zeros;

mod context;
mod roots;

pub use combo::{Combination, Family, LimitCertificate};
pub use ivp::Trajectory;
pub use problem::{BoundaryCondition, Problem, Regularity, ValidationReport};
pub use spectrum::EigenPair;
pub use verify::{CheckResult, VerificationReport};
pub use zeros::{ZeroCount, ZeroFn, ZeroRecord};

/// Highest derivative order the library evaluates and the largest zero
/// multiplicity it can certify. Zeros of order `>= P_MAX` are reported with a
/// flag instead of an exact multiplicity.
pub const P_MAX: usize = 8;

/// Shared error type for all numerical operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Expression could not be parsed.
    #[error("expression parse error: {0}")]
    Parse(#[from] expr::ParseError),
    /// A coefficient expression hit a domain error during evaluation.
    #[error("coefficient evaluation failed: {0}")]
    Domain(#[from] expr::DomainError),
    /// Problem definition or validation failure.
    #[error("{0}")]
    Problem(#[from] problem::ProblemError),
    /// Initial-value integration failure.
    #[error("{0}")]
    Ivp(#[from] ivp::IvpError),
    /// Eigenvalue computation failure.
    #[error("{0}")]
    Spectrum(#[from] spectrum::SpectrumError),
    /// Zero location or counting failure.
    #[error("{0}")]
    Zeros(#[from] zeros::ZerosError),
    /// Combination-level failure.
    #[error("{0}")]
    Combo(#[from] combo::ComboError),
    /// Verification harness failure (infrastructure, not a theorem finding).
    #[error("{0}")]
    Verify(#[from] verify::VerifyError),
}

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
