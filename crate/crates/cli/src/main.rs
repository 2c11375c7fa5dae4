use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ripm_core::diagnostics::{fd_validate, rate_report, regularity_check, theta_band};
use ripm_core::problem::ProblemInstance;
use ripm_core::ripm::{BarrierSchedule, ForcingFunctions, OuterConfig, SolveStatus};
use ripm_core::riptrm::TrustRegionConfig;
use ripm_core::suite::{run_suite, solve, Algorithm};
use ripm_core::trace::{read_trace, write_trace};
use ripm_core::Error;

#[derive(Parser)]
#[command(name = "ripm", version, about = "Riemannian interior point solvers and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a built-in or file-defined problem.
    Solve(SolveArgs),
    /// Finite-difference and regularity checks for a problem.
    Check(CheckArgs),
    /// Convergence-order analysis of an existing trace.
    Rate(RateArgs),
    /// Run every validation criterion.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Ripm,
    Riptrm,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Ripm => Algorithm::Ripm,
            AlgorithmArg::Riptrm => Algorithm::Riptrm,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Built-in name (T1..T4) or path to a problem file.
    #[arg(long)]
    problem: String,
    #[arg(long, value_enum, default_value = "ripm")]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 0.1)]
    mu0: f64,
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    #[arg(long, default_value_t = 0.9)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    c_grad: f64,
    #[arg(long, default_value_t = 1.0)]
    c_compl: f64,
    #[arg(long, default_value_t = 1.0)]
    c_eq: f64,
    #[arg(long, default_value_t = 1.0)]
    c_sosp: f64,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[arg(long, default_value_t = 100)]
    max_inner: usize,
    #[arg(long, default_value_t = 1e-10)]
    kkt_tol: f64,
    #[arg(long, default_value_t = 1e12)]
    condition_cap: f64,
    #[arg(long, default_value_t = 0.995)]
    tau: f64,
    #[arg(long, default_value_t = 10.0)]
    max_radius: f64,
    #[arg(long, default_value_t = 1.0)]
    initial_radius: f64,
    #[arg(long, default_value_t = 0.1)]
    min_initial_radius: f64,
    /// Trace output (comma-separated); printed to stdout when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary output (TOML); printed to stderr when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

impl SolveArgs {
    fn config(&self) -> TrustRegionConfig {
        TrustRegionConfig {
            outer: OuterConfig {
                schedule: BarrierSchedule {
                    mu0: self.mu0,
                    kappa: self.kappa,
                    theta: self.theta,
                },
                forcing: ForcingFunctions {
                    c_grad: self.c_grad,
                    c_compl: self.c_compl,
                    c_eq: self.c_eq,
                    c_sosp: self.c_sosp,
                },
                max_outer: self.max_outer,
                kkt_stop_tol: self.kkt_tol,
                condition_cap: self.condition_cap,
                tau: self.tau,
                max_inner: self.max_inner,
            },
            max_radius: self.max_radius,
            initial_radius: self.initial_radius,
            min_initial_radius: self.min_initial_radius,
            ..TrustRegionConfig::default()
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Activity and regularity tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Number of trailing rows for the error/mu band.
    #[arg(long, default_value_t = 5)]
    last: usize,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for trace files and the criterion report.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::UnknownProblem(_)
            | Error::ProblemFile(_)
            | Error::Trace(_)
            | Error::EqualityConstraintsUnsupported
            | Error::NotStrictlyFeasible(_)
            | Error::DimensionMismatch { .. } => Failure::Config(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

fn run_solve(args: &SolveArgs) -> Result<bool, Failure> {
    let config = args.config();
    config.validate()?;
    let inst = ProblemInstance::resolve(&args.problem)?;
    let report = solve(&inst, args.algorithm.into(), &config)?;
    match &args.trace {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
            write_trace(&report.trace, file)?;
        }
        None => write_trace(&report.trace, std::io::stdout().lock())?,
    }
    let summary = report.summary(&inst.problem)?.to_toml()?;
    match &args.summary {
        Some(path) => fs::write(path, summary).map_err(|e| io_err(path, e))?,
        None => eprint!("{summary}"),
    }
    Ok(report.status == SolveStatus::Converged)
}

fn run_check(args: &CheckArgs) -> Result<bool, Failure> {
    let inst = ProblemInstance::resolve(&args.problem)?;
    let prob = &inst.problem;
    let fd = fd_validate(prob, args.samples, args.seed)?;
    println!(
        "fd: {} (gradient {:.2e}, jacobian {:.2e}, {} samples)",
        if fd.passed { "pass" } else { "fail" },
        fd.max_grad_error,
        fd.max_jacobian_error,
        fd.samples
    );
    let mut ok = fd.passed;
    match &inst.reference {
        Some(r) => {
            let reg = regularity_check(prob, &r.point, args.tol)?;
            println!(
                "licq: {} (sigma_min {:.3e})",
                if reg.licq.passed { "pass" } else { "fail" },
                reg.licq.sigma_min
            );
            println!(
                "sc: {} (min max(y, g) {:.3e})",
                if reg.sc.passed { "pass" } else { "fail" },
                reg.sc.min_max_yg
            );
            println!("sosc: {:?} (cone dimension {})", reg.sosc.status, reg.sosc.cone_dim);
            ok &= reg.passed();
        }
        None => println!("regularity: skipped (no reference point)"),
    }
    Ok(ok)
}

fn run_rate(args: &RateArgs) -> Result<bool, Failure> {
    let file = fs::File::open(&args.trace).map_err(|e| io_err(&args.trace, e))?;
    let rows = read_trace(file)?;
    let rate = rate_report(&rows)?;
    for (k, p) in rate.orders.iter().enumerate() {
        match p {
            Some(p) => println!("order[{}] = {p:.6}", k + 2),
            None => println!("order[{}] = undefined", k + 2),
        }
    }
    match rate.fitted_order {
        Some(p) => println!("fitted order: {p:.6}"),
        None => println!("fitted order: undefined"),
    }
    if let Some(b) = theta_band(&rows, args.last) {
        println!("error/mu band: [{:.6e}, {:.6e}] ratio {:.4}", b.min, b.max, b.ratio);
    }
    Ok(rate.fitted_order.is_some())
}

fn run_suite_cmd(args: &SuiteArgs) -> Result<bool, Failure> {
    let result = run_suite(args.seed);
    let mut lines = String::new();
    for o in &result.outcomes {
        println!("{o}");
        lines.push_str(&format!(
            "criterion {} {}: {}\n",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name
        ));
    }
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for (name, body) in &result.traces {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        }
        let path = dir.join("criteria.txt");
        fs::write(&path, lines).map_err(|e| io_err(&path, e))?;
    }
    Ok(result.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Check(a) => run_check(a),
        Command::Rate(a) => run_rate(a),
        Command::Suite(a) => run_suite_cmd(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
