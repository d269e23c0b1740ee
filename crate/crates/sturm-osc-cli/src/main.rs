//! Command-line front end: problem files in, machine-readable results out.
//!
//! Every subcommand is a pure function of its inputs (problem file, flags,
//! seed): identical invocations produce byte-identical output. Floats are
//! printed with a fixed `%.12e`-style format in the text and CSV renderers;
//! JSON goes through `serde_json`, whose float encoding is shortest-exact.
//!
//! Exit codes: `0` on success, `1` on precondition or I/O errors (bad flags,
//! unreadable files, invalid problems), `2` when a theorem check fails —
//! the latter means a numerical finding, not a crash, and the diagnostics
//! land on the error stream.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sturm_osc::problem::{load_problem, validate};
use sturm_osc::spectrum::compute_eigenpairs;
use sturm_osc::verify::{
    check_count_chain, check_monotonicity, evolve_heat, random_suite, relaxation_time,
    ProblemGenerator, VerifyError,
};
use sturm_osc::zeros::{count, locate_zeros, Multiplicity};
use sturm_osc::{
    Combination, EigenPair, Family, Problem, ValidationReport, VerificationReport, ZeroCount,
    ZeroFn, ZeroRecord, P_MAX,
};

/// Grid density for the positivity/regularity validation scan.
const VALIDATION_GRID: usize = 512;

/// Sample count (panels) for `--emit-samples` dumps.
const SAMPLE_PANELS: usize = 512;

#[derive(Parser)]
#[command(
    name = "sturm-osc",
    version,
    about = "Sturm–Liouville eigenpairs and zero counts of eigenfunction combinations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the first n eigenpairs and tabulate index, eigenvalue, zero count
    Spectrum {
        #[command(flatten)]
        problem: ProblemArg,
        /// Number of eigenpairs, starting at index 1
        #[arg(short = 'n', long = "count", default_value_t = 10)]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Locate the zeros of a combination, with multiplicities and the four counts
    Zeros {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        combo: ComboArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate a family iterate and its differential-relation residual
    Combo {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        combo: ComboArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a theorem check and report each inequality as pass or fail
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Evolve a combination under heat flow and track its zero count over time
    Evolve {
        #[command(flatten)]
        problem: ProblemArg,
        /// Coefficients as comma-separated "A@index" pairs, e.g. "1@1,-0.5@3"
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        coeffs: String,
        /// Time grid as start:end:step
        #[arg(long = "t", value_name = "START:END:STEP", default_value = "0:5:0.1")]
        t: String,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Count-chain inequalities m-1 <= N_v <= N <= N_m <= N_bar_m <= n-1
    St2 {
        #[command(flatten)]
        problem: ProblemArg,
        /// Coefficients as comma-separated "A@index" pairs, e.g. "1@1,-0.5@3"
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        coeffs: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monotonicity of the count functionals in the iteration exponent
    Mono {
        #[command(flatten)]
        problem: ProblemArg,
        /// Coefficients as comma-separated "A@index" pairs, e.g. "1@1,-0.5@3"
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        coeffs: String,
        /// Lowest iteration exponent
        #[arg(long, default_value_t = -2, allow_negative_numbers = true)]
        k_min: i32,
        /// Highest iteration exponent
        #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
        k_max: i32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Randomized corpus: chain and monotonicity checks on perturbed problems
    Suite {
        /// Seed of the reproducible problem generator
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of independent trials
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct ProblemArg {
    /// Problem description file
    #[arg(short = 'p', long = "problem", value_name = "FILE")]
    path: PathBuf,
}

#[derive(Args)]
struct ComboArgs {
    /// Coefficients as comma-separated "A@index" pairs, e.g. "1@1,-0.5@3"
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    coeffs: String,
    /// Weight family of the iteration
    #[arg(long, value_enum, default_value_t = FamilyArg::Sturm)]
    family: FamilyArg,
    /// Iteration exponent
    #[arg(short = 'k', long, default_value_t = 0, allow_negative_numbers = true)]
    k: i32,
}

#[derive(Args)]
struct OutputArgs {
    /// Output serialization
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also dump (x, Y(x)) samples of the combination to a CSV file
    #[arg(long, value_name = "FILE")]
    emit_samples: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Sturm,
    Liouville,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Sturm => Family::SturmPowers,
            FamilyArg::Liouville => Family::LiouvilleShifted,
        }
    }
}

/// A command that ran to completion either verified everything it checked or
/// produced findings; findings exit with code 2.
enum Outcome {
    Clean,
    CheckFailed,
}

/// Abort: the error text goes to stderr and the process exits with code 1.
enum CliError {
    Message(String),
    Lib(sturm_osc::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Message(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<sturm_osc::Error> for CliError {
    fn from(e: sturm_osc::Error) -> Self {
        CliError::Lib(e)
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Message(message.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here too; only genuine usage errors
            // are failures.
            let failed = err.use_stderr();
            let _ = err.print();
            return if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

/// Honor `STURM_OSC_THREADS` by pinning the global worker pool before any
/// parallel work starts.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("STURM_OSC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("STURM_OSC_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| usage(format!("cannot configure {threads} worker threads: {e}")))
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Spectrum { problem, n, out } => cmd_spectrum(&problem.path, n, &out),
        Command::Zeros { problem, combo, out } => cmd_zeros(&problem.path, &combo, &out),
        Command::Combo { problem, combo, out } => cmd_combo(&problem.path, &combo, &out),
        Command::Verify { check } => match check {
            VerifyCommand::St2 { problem, coeffs, out } => {
                cmd_verify_st2(&problem.path, &coeffs, &out)
            }
            VerifyCommand::Mono {
                problem,
                coeffs,
                k_min,
                k_max,
                out,
            } => cmd_verify_mono(&problem.path, &coeffs, k_min, k_max, &out),
            VerifyCommand::Suite { seed, trials, out } => cmd_verify_suite(seed, trials, &out),
        },
        Command::Evolve {
            problem,
            coeffs,
            t,
            out,
        } => cmd_evolve(&problem.path, &coeffs, &t, &out),
    }
}

// ---------------------------------------------------------------------------
// Input assembly
// ---------------------------------------------------------------------------

fn load(path: &Path) -> Result<(Problem, ValidationReport), CliError> {
    let problem = load_problem(path).map_err(sturm_osc::Error::from)?;
    let report = validate(&problem, VALIDATION_GRID).map_err(sturm_osc::Error::from)?;
    Ok((problem, report))
}

/// Parse the "A@index" list; order and duplicates are left to the library,
/// which reports them with proper context.
fn parse_coeffs(text: &str) -> Result<Vec<(usize, f64)>, CliError> {
    let mut coeffs = Vec::new();
    for (pos, piece) in text.split(',').enumerate() {
        let piece = piece.trim();
        let context = || format!("coefficient {} ({piece:?})", pos + 1);
        let (a, index) = piece
            .split_once('@')
            .ok_or_else(|| usage(format!("{}: expected A@index", context())))?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| usage(format!("{}: bad amplitude", context())))?;
        let index: usize = index
            .trim()
            .parse()
            .map_err(|_| usage(format!("{}: bad mode index", context())))?;
        coeffs.push((index, a));
    }
    Ok(coeffs)
}

/// Eigenpairs 1..=max referenced index, then the combination on top of them.
fn build_combination(
    problem: &Problem,
    report: &ValidationReport,
    coeffs: &[(usize, f64)],
    family: Family,
    k: i32,
) -> Result<Combination, CliError> {
    let top = coeffs.iter().map(|&(i, _)| i).max().unwrap_or(0);
    if top == 0 {
        return Err(usage("--coeffs must reference at least mode 1"));
    }
    let pairs = compute_eigenpairs(problem, report, top)?;
    Ok(Combination::new(&pairs, coeffs, family, k)?)
}

/// Expand "start:end:step" into an inclusive grid.
fn parse_time_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || usage(format!("--t must be start:end:step, got {text:?}"));
    let mut parts = text.split(':');
    let (start, end, step) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), Some(c), None) => (
            a.trim().parse::<f64>().map_err(|_| bad())?,
            b.trim().parse::<f64>().map_err(|_| bad())?,
            c.trim().parse::<f64>().map_err(|_| bad())?,
        ),
        _ => return Err(bad()),
    };
    if !(step > 0.0 && start.is_finite() && end >= start) {
        return Err(usage(format!(
            "--t needs end >= start and step > 0, got {text:?}"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0u64;
    loop {
        let t = start + step * i as f64;
        if t > end + 1e-9 * step {
            break;
        }
        grid.push(t);
        i += 1;
    }
    Ok(grid)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Fixed 12-digit scientific float format shared by the text and CSV paths.
fn fe(x: f64) -> String {
    format!("{x:.12e}")
}

/// One CSV field, quoted only when the content requires it.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn order_label(m: Multiplicity) -> String {
    match m {
        Multiplicity::Exact(p) => p.to_string(),
        Multiplicity::AtLeastMax => format!(">={P_MAX}"),
    }
}

fn json_out<T: serde::Serialize>(value: &T) -> Result<Outcome, CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| usage(format!("serializing output: {e}")))?;
    println!("{text}");
    Ok(Outcome::Clean)
}

fn print_report(report: &VerificationReport, format: Format) -> Result<Outcome, CliError> {
    match format {
        Format::Json => {
            json_out(report)?;
        }
        Format::Csv => {
            println!("name,passed,details");
            for c in &report.checks {
                println!(
                    "{},{},{}",
                    csv_field(&c.name),
                    c.passed,
                    csv_field(&c.details)
                );
            }
        }
        Format::Text => {
            let seed = report
                .seed
                .map(|s| format!(" seed={s}"))
                .unwrap_or_default();
            println!("{} digest={:016x}{}", report.tag, report.digest, seed);
            for c in &report.checks {
                let flag = if c.passed { "PASS" } else { "FAIL" };
                println!("  {flag}  {:<34}  {}", c.name, c.details);
            }
            let ok = report.checks.iter().filter(|c| c.passed).count();
            println!("{ok}/{} checks passed", report.checks.len());
        }
    }
    if report.passed() {
        Ok(Outcome::Clean)
    } else {
        Ok(Outcome::CheckFailed)
    }
}

/// Dump `(x, Y(x))` pairs over the whole interval for external plotting.
fn emit_samples(path: &Path, c: &Combination) -> Result<(), CliError> {
    let (a, b) = c.interval();
    let mut out = String::from("x,y\n");
    for i in 0..=SAMPLE_PANELS {
        let x = a + (b - a) * i as f64 / SAMPLE_PANELS as f64;
        let y = c.evaluate(x, 0)?;
        out.push_str(&fe(x));
        out.push(',');
        out.push_str(&fe(y));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| usage(format!("writing {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct SpectrumRow {
    index: usize,
    rho: f64,
    zeros: usize,
}

fn cmd_spectrum(path: &Path, n: usize, out: &OutputArgs) -> Result<Outcome, CliError> {
    if out.emit_samples.is_some() {
        return Err(usage("--emit-samples applies to combination commands only"));
    }
    let (problem, report) = load(path)?;
    let pairs = compute_eigenpairs(&problem, &report, n)?;
    let rows = pairs
        .iter()
        .map(|pair| {
            let records = interior_records(pair)?;
            Ok(SpectrumRow {
                index: pair.index,
                rho: pair.rho,
                zeros: records,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    match out.format {
        Format::Json => json_out(&rows),
        Format::Csv => {
            println!("index,rho,zeros");
            for r in &rows {
                println!("{},{},{}", r.index, fe(r.rho), r.zeros);
            }
            Ok(Outcome::Clean)
        }
        Format::Text => {
            println!("{:<6} {:<22} {}", "index", "rho", "zeros");
            for r in &rows {
                println!("{:<6} {:<22} {}", r.index, fe(r.rho), r.zeros);
            }
            Ok(Outcome::Clean)
        }
    }
}

fn interior_records(pair: &EigenPair) -> Result<usize, CliError> {
    let (a, b) = pair.interval();
    let records = locate_zeros(pair, b - a)?;
    Ok(records.iter().filter(|r| !r.is_boundary).count())
}

#[derive(serde::Serialize)]
struct ZerosOut {
    records: Vec<ZeroRecord>,
    count: ZeroCount,
}

fn cmd_zeros(path: &Path, combo: &ComboArgs, out: &OutputArgs) -> Result<Outcome, CliError> {
    let (problem, report) = load(path)?;
    let coeffs = parse_coeffs(&combo.coeffs)?;
    let c = build_combination(&problem, &report, &coeffs, combo.family.into(), combo.k)?;
    if let Some(samples) = &out.emit_samples {
        emit_samples(samples, &c)?;
    }
    let (a, b) = c.interval();
    let records = locate_zeros(&c, b - a)?;
    let counts = count(&records, (a, b), problem.bc_left, problem.bc_right);
    match out.format {
        Format::Json => json_out(&ZerosOut {
            records,
            count: counts,
        }),
        Format::Csv => {
            println!("xi,order,sign_change,is_boundary,leading_coefficient");
            for r in &records {
                let lead = r.leading_coefficient.map(fe).unwrap_or_default();
                println!(
                    "{},{},{},{},{}",
                    fe(r.xi),
                    order_label(r.multiplicity),
                    r.sign_change,
                    r.is_boundary,
                    lead
                );
            }
            println!();
            println!("n,n_m,n_bar_m,n_v,m_bar_alpha,m_bar_beta");
            println!(
                "{},{},{},{},{},{}",
                counts.n, counts.n_m, counts.n_bar_m, counts.n_v, counts.m_bar_alpha,
                counts.m_bar_beta
            );
            Ok(Outcome::Clean)
        }
        Format::Text => {
            println!(
                "zeros on ]{}, {}[ of the combination of modes {}..={}",
                fe(a),
                fe(b),
                c.min_index(),
                c.max_index()
            );
            println!(
                "{:<22} {:<6} {:<12} {:<9} {}",
                "xi", "order", "sign_change", "boundary", "leading"
            );
            for r in &records {
                let lead = r
                    .leading_coefficient
                    .map(fe)
                    .unwrap_or_else(|| "-".to_string());
                println!(
                    "{:<22} {:<6} {:<12} {:<9} {}",
                    fe(r.xi),
                    order_label(r.multiplicity),
                    r.sign_change,
                    r.is_boundary,
                    lead
                );
            }
            println!(
                "counts: N={} N_m={} N_bar_m={} N_v={} m_bar(alpha)={} m_bar(beta)={}",
                counts.n, counts.n_m, counts.n_bar_m, counts.n_v, counts.m_bar_alpha,
                counts.m_bar_beta
            );
            Ok(Outcome::Clean)
        }
    }
}

#[derive(serde::Serialize)]
struct ComboOut {
    family: Family,
    k: i32,
    modes: Vec<ModeOut>,
    evaluations: Vec<SampleOut>,
    relation_residual: Option<f64>,
}

#[derive(serde::Serialize)]
struct ModeOut {
    index: usize,
    coeff: f64,
}

#[derive(serde::Serialize)]
struct SampleOut {
    x: f64,
    value: f64,
    slope: f64,
}

fn cmd_combo(path: &Path, combo: &ComboArgs, out: &OutputArgs) -> Result<Outcome, CliError> {
    let (problem, report) = load(path)?;
    let coeffs = parse_coeffs(&combo.coeffs)?;
    let family: Family = combo.family.into();
    let c = build_combination(&problem, &report, &coeffs, family, combo.k)?;
    if let Some(samples) = &out.emit_samples {
        emit_samples(samples, &c)?;
    }
    let (a, b) = c.interval();
    let evaluations = (0..=8)
        .map(|i| {
            let x = a + (b - a) * i as f64 / 8.0;
            Ok(SampleOut {
                x,
                value: c.evaluate(x, 0)?,
                slope: c.evaluate(x, 1)?,
            })
        })
        .collect::<Result<Vec<_>, sturm_osc::Error>>()?;
    let relation_residual = match family {
        Family::SturmPowers => Some(c.relation_residual()?),
        Family::LiouvilleShifted => None,
    };
    let modes = c
        .members()
        .map(|(pair, coeff)| ModeOut {
            index: pair.index,
            coeff,
        })
        .collect();
    let result = ComboOut {
        family,
        k: c.k(),
        modes,
        evaluations,
        relation_residual,
    };
    match out.format {
        Format::Json => json_out(&result),
        Format::Csv => {
            println!("x,value,slope");
            for s in &result.evaluations {
                println!("{},{},{}", fe(s.x), fe(s.value), fe(s.slope));
            }
            if let Some(res) = result.relation_residual {
                println!();
                println!("relation_residual");
                println!("{}", fe(res));
            }
            Ok(Outcome::Clean)
        }
        Format::Text => {
            let family_label = match family {
                Family::SturmPowers => "sturm",
                Family::LiouvilleShifted => "liouville",
            };
            println!(
                "family={family_label} k={} modes {}..={}",
                result.k,
                c.min_index(),
                c.max_index()
            );
            println!("{:<22} {:<22} {}", "x", "value", "slope");
            for s in &result.evaluations {
                println!("{:<22} {:<22} {}", fe(s.x), fe(s.value), fe(s.slope));
            }
            if let Some(res) = result.relation_residual {
                println!("relation residual = {}", fe(res));
            }
            Ok(Outcome::Clean)
        }
    }
}

fn cmd_verify_st2(path: &Path, coeffs: &str, out: &OutputArgs) -> Result<Outcome, CliError> {
    let (problem, report) = load(path)?;
    let coeffs = parse_coeffs(coeffs)?;
    let c = build_combination(&problem, &report, &coeffs, Family::SturmPowers, 0)?;
    if let Some(samples) = &out.emit_samples {
        emit_samples(samples, &c)?;
    }
    print_report(&check_count_chain(&c)?, out.format)
}

fn cmd_verify_mono(
    path: &Path,
    coeffs: &str,
    k_min: i32,
    k_max: i32,
    out: &OutputArgs,
) -> Result<Outcome, CliError> {
    let (problem, report) = load(path)?;
    let coeffs = parse_coeffs(coeffs)?;
    let c = build_combination(&problem, &report, &coeffs, Family::SturmPowers, 0)?;
    if let Some(samples) = &out.emit_samples {
        emit_samples(samples, &c)?;
    }
    print_report(&check_monotonicity(&c, k_min, k_max)?, out.format)
}

fn cmd_verify_suite(seed: u64, trials: usize, out: &OutputArgs) -> Result<Outcome, CliError> {
    if out.emit_samples.is_some() {
        return Err(usage("--emit-samples applies to combination commands only"));
    }
    let report = random_suite(seed, trials, &ProblemGenerator::default())?;
    print_report(&report, out.format)
}

#[derive(serde::Serialize)]
struct EvolveOut {
    series: Vec<EvolvePoint>,
    relaxation_time: Option<f64>,
}

#[derive(serde::Serialize)]
struct EvolvePoint {
    t: f64,
    count: ZeroCount,
}

fn cmd_evolve(path: &Path, coeffs: &str, t: &str, out: &OutputArgs) -> Result<Outcome, CliError> {
    let (problem, report) = load(path)?;
    let coeffs = parse_coeffs(coeffs)?;
    let grid = parse_time_grid(t)?;
    let c = build_combination(&problem, &report, &coeffs, Family::SturmPowers, 0)?;
    if let Some(samples) = &out.emit_samples {
        emit_samples(samples, &c)?;
    }
    let counts = match evolve_heat(&c, &grid) {
        Ok(counts) => counts,
        // A count that grows along the flow is a theorem violation, not a
        // precondition problem: report it and exit through the finding path.
        Err(err @ sturm_osc::Error::Verify(VerifyError::HeatCountIncreased { .. })) => {
            eprintln!("error: {err}");
            return Ok(Outcome::CheckFailed);
        }
        Err(err) => return Err(err.into()),
    };
    let result = EvolveOut {
        series: grid
            .iter()
            .zip(&counts)
            .map(|(&t, &count)| EvolvePoint { t, count })
            .collect(),
        relaxation_time: relaxation_time(&c),
    };
    match out.format {
        Format::Json => json_out(&result),
        Format::Csv => {
            println!("t,n,n_v");
            for p in &result.series {
                println!("{},{},{}", fe(p.t), p.count.n, p.count.n_v);
            }
            if let Some(relax) = result.relaxation_time {
                println!();
                println!("relaxation_time");
                println!("{}", fe(relax));
            }
            Ok(Outcome::Clean)
        }
        Format::Text => {
            println!("{:<22} {:<4} {}", "t", "N", "N_v");
            for p in &result.series {
                println!("{:<22} {:<4} {}", fe(p.t), p.count.n, p.count.n_v);
            }
            if let Some(relax) = result.relaxation_time {
                println!("relaxation time ~ {} (diagnostic)", fe(relax));
            }
            Ok(Outcome::Clean)
        }
    }
}
