//! Thin command-line front end: parse flags, merge configuration, call the
//! library, serialize the results.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or usage
//! error, 3 branch/problem precondition error, 4 non-convergence.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use diracdisk::basis::{build_basis, BasisSet};
use diracdisk::config::{Config, ConfigError, Overrides};
use diracdisk::io::{self, ExportKind};
use diracdisk::operators::OperatorError;
use diracdisk::solver::{self, SolverError};
use diracdisk::verify;

#[derive(Parser)]
#[command(
    name = "diracdisk",
    version,
    about = "Spectra of the Dirac operator with infinite-mass boundary conditions on a disk, \
             and stationary states of the Dirac-Hartree equation",
    after_help = "Configuration precedence: file (--config) < DIRACDISK_* environment < flags.\n\
                  Exit codes: 0 ok, 1 verification failure, 2 config/usage, 3 precondition, 4 non-convergence."
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Frequency of the stationary ansatz.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Coupling constant of the self-consistent potential.
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Largest angular channel M.
    #[arg(long = "m-max", global = true)]
    m_max: Option<usize>,
    /// Radial roots per channel and sign.
    #[arg(long = "n-max", global = true)]
    n_max: Option<usize>,
    /// Seed of every randomised check.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the truncated spectrum and the gap report.
    Spectrum,
    /// Solve one branch: scaled-eigenmode init, optional flow, Newton.
    Solve {
        /// 1-based mode index seeding the branch.
        #[arg(long)]
        branch: usize,
    },
    /// Solve the first `count` eligible branches.
    Ladder {
        #[arg(long)]
        count: usize,
    },
    /// Run the verification suite; exit 0 iff every check passes.
    Verify {
        /// Ladder length for the solution checks.
        #[arg(long)]
        count: Option<usize>,
        /// Corrupt one eigenvalue copy to demonstrate a failing report.
        #[arg(long, default_value_t = false)]
        inject_fault: bool,
    },
    /// Export a stored solution's fields on the grid as CSV.
    Export {
        /// Solution JSON produced by `solve` or extracted from a ladder.
        #[arg(long)]
        solution: PathBuf,
        /// density | potential | spinor
        #[arg(long)]
        what: String,
        /// Output CSV path; defaults to <out>/<what>.csv.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        Failure::new(2, err.to_string())
    }
}

impl From<OperatorError> for Failure {
    fn from(err: OperatorError) -> Self {
        let code = match err {
            OperatorError::OmegaInSpectrum { .. } => 3,
            _ => 2,
        };
        Failure::new(code, err.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(err: SolverError) -> Self {
        let code = match &err {
            SolverError::BranchUnavailable { .. } | SolverError::BranchOutOfRange { .. } => 3,
            SolverError::Operator(inner) => return Failure::from(inner.clone()),
            SolverError::InvalidOptions(_) => 2,
            SolverError::NonConvergence { .. }
            | SolverError::SingularSystem { .. }
            | SolverError::FlowDiverged { .. }
            | SolverError::NonpositiveQuarticForm { .. }
            | SolverError::AllBranchesFailed(_) => 4,
        };
        Failure::new(code, err.to_string())
    }
}

impl From<io::IoError> for Failure {
    fn from(err: io::IoError) -> Self {
        Failure::new(2, err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn effective_config(cli: &Cli) -> Result<Config, Failure> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    config.apply_env()?;
    config.apply_overrides(&Overrides {
        omega: cli.omega,
        kappa: cli.kappa,
        m_max: cli.m_max,
        n_max: cli.n_max,
        seed: cli.seed,
        output_dir: cli.out.as_ref().map(|p| p.display().to_string()),
    });
    config.validate()?;
    Ok(config)
}

fn build(config: &Config) -> Result<BasisSet, Failure> {
    build_basis(config.domain()?, config.lattice()?, config.truncation())
        .map_err(|err| Failure::from(ConfigError::from(err)))
}

fn out_path(config: &Config, name: &str) -> PathBuf {
    PathBuf::from(&config.run.output_dir).join(name)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let config = effective_config(&cli)?;
    match &cli.command {
        Command::Spectrum => {
            let basis = build(&config)?;
            let file = io::spectrum_file(&basis, &config);
            let path = out_path(&config, "spectrum.json");
            io::write_spectrum(&path, &file)?;
            print!("{}", io::spectrum_table(&file));
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::Solve { branch } => {
            let basis = build(&config)?;
            let params = config.params();
            params.validate(&basis)?;
            let options = config.solver_options();
            let mut init = solver::branch_init(&basis, &params, *branch)?;
            if options.flow_enabled {
                init = solver::saddle_flow(&basis, &init, &params, &options)?;
            }
            let solution =
                solver::newton_solve_deflated(&basis, &init, &params, &options, &[], Some(*branch))?;
            let file = io::solution_file(&solution, &config);
            let path = out_path(&config, &format!("solution-branch-{branch}.json"));
            io::write_solution(&path, &file)?;
            println!(
                "branch {branch}: lambda = {:.12}, action = {:.12}, residual = {:.3e}, iterations = {}",
                solution.lambda.unwrap_or(f64::NAN),
                solution.action,
                solution.residual_norm,
                solution.iterations
            );
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::Ladder { count } => {
            if *count == 0 {
                return Err(Failure::new(2, "--count must be at least 1"));
            }
            let basis = build(&config)?;
            let params = config.params();
            params.validate(&basis)?;
            let records = solver::ladder(&basis, &params, *count, &config.solver_options())?;
            let file = io::ladder_file(&records, &config);
            let path = out_path(&config, "ladder.json");
            io::write_ladder(&path, &file)?;
            print!("{}", io::ladder_table(&file));
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::Verify {
            count,
            inject_fault,
        } => {
            let basis = build(&config)?;
            let params = config.params();
            params.validate(&basis)?;
            let mut vcfg = config.verify_config(*inject_fault);
            if let Some(count) = count {
                if *count == 0 {
                    return Err(Failure::new(2, "--count must be at least 1"));
                }
                vcfg.branches = *count;
            }
            let started = Instant::now();
            let report = verify::run_all(&basis, &params, &config.solver_options(), &vcfg)?;
            let total_ms = started.elapsed().as_secs_f64() * 1e3;
            let file = io::verify_file(&report, &config, total_ms);
            let path = out_path(&config, "verify.json");
            io::write_verify(&path, &file)?;
            print!("{}", verify::render_table(&report));
            eprintln!("wrote {}", path.display());
            Ok(if report.overall_pass { 0 } else { 1 })
        }
        Command::Export {
            solution,
            what,
            file,
        } => {
            let kind: ExportKind = what
                .parse()
                .map_err(|message: String| Failure::new(2, message))?;
            let basis = build(&config)?;
            let stored = io::read_solution(solution)?;
            let state = io::solution_state(&stored, &basis)?;
            let path = file
                .clone()
                .unwrap_or_else(|| out_path(&config, &format!("{what}.csv")));
            io::export_csv(&path, &basis, &state, kind, &config)?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
    }
}
