//! Shared fixtures for the integration suites: canonical problems, a
//! perturbed-problem generator, and a random expression-text generator.
//!
//! Every helper is deterministic given its inputs; randomized callers seed
//! their own `ChaCha8Rng` so failures replay exactly.

#![allow(dead_code)]

use rand::Rng;
use sturm_osc::problem::{parse_problem, validate};
use sturm_osc::spectrum::compute_eigenpairs;
use sturm_osc::{EigenPair, Problem, ValidationReport};

/// Unit-coefficient problem on `]0, π[` with Dirichlet ends.  Eigenvalues are
/// `j² + 1` and eigenfunctions are multiples of `sin(j·x)`, which makes it the
/// oracle of choice whenever a closed form is needed.
pub const SINE: &str = r#"
interval = [0, 3.14159265358979323846]
K = "1"
G = "1"
L = "1"
bc_left = dirichlet
bc_right = dirichlet
regularity = strong
"#;

/// Same operator with Neumann (`h = 0`) ends; eigenfunctions are multiples of
/// `cos(j·x)` starting from the constant mode.
pub const NEUMANN: &str = r#"
interval = [0, 3.14159265358979323846]
K = "1"
G = "1"
L = "1"
bc_left = robin 0
bc_right = robin 0
regularity = strong
"#;

/// Parse a problem from text and validate it on the standard grid.
pub fn problem_from(text: &str) -> (Problem, ValidationReport) {
    let p = parse_problem(text).expect("fixture problem should parse");
    let report = validate(&p, 512).expect("fixture problem should validate");
    (p, report)
}

pub fn sine() -> (Problem, ValidationReport) {
    problem_from(SINE)
}

/// First `n` eigenpairs of the sine problem.
pub fn sine_pairs(n: usize) -> Vec<EigenPair> {
    let (p, report) = sine();
    compute_eigenpairs(&p, &report, n).expect("sine eigenpairs")
}

/// One smooth coefficient of the form `base + a·sin(b·x + φ)` with `a` capped
/// so the coefficient stays well away from zero.
fn perturbed_coefficient(rng: &mut impl Rng, max_amplitude: f64) -> String {
    let a = rng.gen_range(0.05..=max_amplitude);
    let b = rng.gen_range(0.5..3.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    format!("\"1 + {a:.4}*sin({b:.4}*x + {phi:.4})\"")
}

fn random_bc(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.5) {
        "dirichlet".to_string()
    } else {
        format!("robin {:.4}", rng.gen_range(0.0..2.0))
    }
}

/// Problem text on `]0, π[` whose coefficients are smooth perturbations of the
/// unit profile, with amplitudes bounded by `max_amplitude` and boundary
/// conditions drawn uniformly from Dirichlet and Robin.
pub fn perturbed_text(rng: &mut impl Rng, max_amplitude: f64) -> String {
    format!(
        "interval = [0, 3.14159265358979323846]\n\
         K = {}\nG = {}\nL = {}\n\
         bc_left = {}\nbc_right = {}\nregularity = strong\n",
        perturbed_coefficient(rng, max_amplitude),
        perturbed_coefficient(rng, max_amplitude),
        perturbed_coefficient(rng, max_amplitude),
        random_bc(rng),
        random_bc(rng),
    )
}

/// Random expression text covering the whole surface grammar.
///
/// Guarded forms keep `log`, `sqrt`, and division away from their domain
/// edges so callers can evaluate anywhere in `[-2, 2]` without babysitting:
/// the point of the generator is to exercise the parser and differentiator,
/// not the error paths.
pub fn random_expression(rng: &mut impl Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..3) {
            0 => "x".to_string(),
            1 => format!("{:.3}", rng.gen_range(0.1..3.0)),
            _ => format!("-{:.3}", rng.gen_range(0.1..3.0)),
        };
    }
    let a = random_expression(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => format!("({a} + {})", random_expression(rng, depth - 1)),
        1 => format!("({a} - {})", random_expression(rng, depth - 1)),
        2 => format!("({a} * {})", random_expression(rng, depth - 1)),
        3 => format!("({a} / (2.5 + sin({})))", random_expression(rng, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("tanh({a})"),
        7 => format!("exp(0.4*sin({a}))"),
        8 => format!("log(2.5 + sin({a}))"),
        9 => format!("sqrt(2.5 + cos({a}))"),
        _ => format!("({a})^{}", rng.gen_range(1..4)),
    }
}
