//! `handsoff`: sparsest-control solver CLI.
//!
//! Subcommands: `solve` (one initial state → solution JSON), `sweep` (value
//! function along a line → CSV), `verify` (property suites → report JSON),
//! and `oracle1d` (closed-form quantities for scalar plants).
//!
//! Exit codes: 0 success / all checks pass, 1 usage or internal error,
//! 2 infeasible target or failed verification.

mod files;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use handsoff::analysis::{self, ConvexityOptions, LineSpec};
use handsoff::solver;
use handsoff::{Error as SolverError, PropertyReport, Scalar1dSystem, ValidatedSystem};

use files::{
    atomic_write, parse_vector, to_json_bytes, SolutionFile, SystemSpecFile, VerifyFile,
};

const DEFAULT_CELLS: usize = 1000;

#[derive(Parser)]
#[command(
    name = "handsoff",
    version,
    about = "Maximum hands-off (sparsest) control of linear time-invariant systems"
)]
struct Cli {
    /// Worker thread cap; overrides the HANDSOFF_THREADS environment
    /// variable.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the sparsest admissible control for one initial state.
    Solve {
        /// Plant description JSON ({"A": .., "B": .., "T": .., "N": ..}).
        #[arg(long)]
        system: PathBuf,
        /// Initial state, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        /// Grid cells (default: the system file's N, then 1000).
        #[arg(long)]
        n: Option<usize>,
        /// Output path for the solution JSON (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the value function along a line of initial states.
    Sweep {
        #[arg(long)]
        system: PathBuf,
        /// Line start, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// Line end, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Number of sample points along the line.
        #[arg(long)]
        points: usize,
        #[arg(long)]
        n: Option<usize>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run property-verification suites and write a report.
    Verify {
        #[arg(long)]
        system: PathBuf,
        /// Which suite to run.
        #[arg(long, value_enum)]
        suite: SuiteName,
        /// Seed for the sampled states and directions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample count per suite (suite-specific defaults when omitted).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Output report JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print closed-form quantities for a scalar plant with a < 0, b ≠ 0.
    Oracle1d {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, allow_hyphen_values = true)]
        xi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "lowercase")]
enum SuiteName {
    Bangoffbang,
    Convexity,
    Continuity,
    Levelset,
    Oracle1d,
    All,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    configure_threads(cli.threads);

    match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads(flag: Option<usize>) {
    let from_env = std::env::var("HANDSOFF_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(threads) = flag.or(from_env).filter(|&t| t > 0) {
        // Ignore failure: the global pool may already be initialized.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Solve { system, xi, n, out } => cmd_solve(&system, &xi, n, out.as_deref()),
        Command::Sweep {
            system,
            from,
            to,
            points,
            n,
            out,
        } => cmd_sweep(&system, &from, &to, points, n, &out),
        Command::Verify {
            system,
            suite,
            seed,
            samples,
            n,
            out,
        } => cmd_verify(&system, suite, seed, samples, n, &out),
        Command::Oracle1d { a, b, horizon, xi } => cmd_oracle1d(a, b, horizon, xi),
    }
}

fn load_system(path: &std::path::Path, n: Option<usize>) -> Result<(ValidatedSystem, usize), String> {
    let spec = SystemSpecFile::load(path)?;
    let cells = n.or(spec.default_cells).unwrap_or(DEFAULT_CELLS);
    let sys = spec.build()?;
    Ok((sys, cells))
}

fn cmd_solve(
    system: &std::path::Path,
    xi_text: &str,
    n: Option<usize>,
    out: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let (sys, cells) = load_system(system, n)?;
    let xi_values = parse_vector(xi_text)?;
    let xi = DVector::from_column_slice(&xi_values);

    let (solution, code) = match solver::solve_hands_off(&sys, &xi, cells) {
        Ok(report) => (SolutionFile::from_report(&report), ExitCode::SUCCESS),
        Err(SolverError::Infeasible { phase1_residual }) => (
            SolutionFile::infeasible(&xi_values, sys.horizon(), cells, phase1_residual),
            ExitCode::from(2),
        ),
        Err(other) => return Err(other.to_string()),
    };

    let bytes = to_json_bytes(&solution)?;
    match out {
        Some(path) => atomic_write(path, &bytes)?,
        None => {
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| e.to_string())?;
        }
    }
    Ok(code)
}

fn cmd_sweep(
    system: &std::path::Path,
    from_text: &str,
    to_text: &str,
    points: usize,
    n: Option<usize>,
    out: &std::path::Path,
) -> Result<ExitCode, String> {
    let (sys, cells) = load_system(system, n)?;
    let from = parse_vector(from_text)?;
    let to = parse_vector(to_text)?;
    if from.len() != to.len() {
        return Err("`--from` and `--to` must have the same dimension".into());
    }
    let origin = DVector::from_column_slice(&from);
    let direction = DVector::from_column_slice(&to) - &origin;
    let line = LineSpec {
        origin,
        direction,
        range: (0.0, 1.0),
        points,
    };
    let table = analysis::sweep_value(&sys, cells, &line).map_err(|e| e.to_string())?;

    let mut csv = String::new();
    csv.push('s');
    for i in 1..=sys.dim() {
        csv.push_str(&format!(",xi_{i}"));
    }
    csv.push_str(",V,status\n");
    for point in &table {
        csv.push_str(&format!("{}", point.s));
        for component in point.xi.iter() {
            csv.push_str(&format!(",{component}"));
        }
        match point.value {
            Some(v) => csv.push_str(&format!(",{v},optimal\n")),
            None => csv.push_str(",,infeasible\n"),
        }
    }
    atomic_write(out, csv.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn default_level_budgets(horizon: f64) -> Vec<f64> {
    [0.05, 0.1, 0.2, 0.4].iter().map(|f| f * horizon).collect()
}

fn cmd_verify(
    system: &std::path::Path,
    suite: SuiteName,
    seed: u64,
    samples: Option<usize>,
    n: Option<usize>,
    out: &std::path::Path,
) -> Result<ExitCode, String> {
    let (sys, cells) = load_system(system, n)?;

    let run_one = |name: SuiteName| -> Result<PropertyReport, String> {
        let report = match name {
            SuiteName::Bangoffbang => {
                analysis::bang_off_bang_suite(&sys, cells, samples.unwrap_or(50), seed)
            }
            SuiteName::Convexity => analysis::convexity_suite(
                &sys,
                cells,
                samples.unwrap_or(100),
                seed,
                ConvexityOptions::default(),
            ),
            SuiteName::Continuity => {
                analysis::continuity_suite(&sys, cells, samples.unwrap_or(100), seed)
            }
            SuiteName::Levelset => analysis::level_set_suite(
                &sys,
                cells,
                &default_level_budgets(sys.horizon()),
                samples.map(|s| (s / 10).max(1)).unwrap_or(8),
                seed,
            ),
            SuiteName::Oracle1d => {
                analysis::oracle_comparison_suite(&sys, cells, samples.unwrap_or(50), seed)
            }
            SuiteName::All => unreachable!("expanded by the caller"),
        };
        report.map_err(|e| e.to_string())
    };

    let mut suites = Vec::new();
    match suite {
        SuiteName::All => {
            for name in [
                SuiteName::Bangoffbang,
                SuiteName::Convexity,
                SuiteName::Continuity,
                SuiteName::Levelset,
            ] {
                suites.push(run_one(name)?);
            }
            // The closed-form suite only applies to scalar decaying plants.
            let has_oracle = sys.dim() == 1
                && Scalar1dSystem::new(sys.a()[(0, 0)], sys.b()[0], sys.horizon()).is_ok();
            if has_oracle {
                suites.push(run_one(SuiteName::Oracle1d)?);
            }
        }
        single => suites.push(run_one(single)?),
    }

    let pass = suites.iter().all(|s| s.pass);
    let report = VerifyFile {
        seed,
        cells,
        pass,
        suites,
    };
    atomic_write(out, &to_json_bytes(&report)?)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_oracle1d(a: f64, b: f64, horizon: f64, xi: f64) -> Result<ExitCode, String> {
    let plant = Scalar1dSystem::new(a, b, horizon).map_err(|e| e.to_string())?;
    let (_, reach) = plant.reachable_interval();
    match (plant.switching_time(xi), plant.value(xi)) {
        (Ok(tau), Ok(value)) => {
            println!("x1 = {reach}");
            println!("tau = {tau}");
            println!("V = {value}");
            Ok(ExitCode::SUCCESS)
        }
        (Err(SolverError::OutOfReach { .. }), _) | (_, Err(SolverError::OutOfReach { .. })) => {
            println!("x1 = {reach}");
            eprintln!("error: state {xi} outside the reachable interval [-{reach}, {reach}]");
            Ok(ExitCode::from(2))
        }
        (Err(other), _) | (_, Err(other)) => Err(other.to_string()),
    }
}
