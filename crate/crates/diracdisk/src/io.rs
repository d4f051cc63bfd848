//! Serialization of spectra, solutions, ladders, verification reports and
//! field exports.
//!
//! Every file starts from the same `meta` header (config hash, seed, tool
//! version). JSON numbers use the shortest round-trip form, which restores
//! the exact binary value on read-back; coefficient arrays are `[re, im]`
//! pairs in the deterministic mode order. Writes go through a temp file and
//! an atomic rename. Verification reports keep wall-clock timings in a
//! separate `timing` object so the `payload` object is reproducible
//! byte-for-byte.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::basis::{BasisSet, EnergySign};
use crate::config::Config;
use crate::operators::{self, OperatorError, SpinorState};
use crate::solver::{BranchRecord, Solution};
use crate::verify::VerifyReport;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: String,
        source: serde_json::Error,
    },
    #[error("solution file does not match the basis: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Basis(#[from] crate::basis::BasisError),
}

/// Provenance header carried by every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Meta {
    pub fn new(config: &Config) -> Self {
        Self {
            tool: "diracdisk".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash(),
            seed: config.run.seed,
        }
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let wrap = |source: std::io::Error| IoError::Write {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(wrap)?;
        }
    }
    let tmp: PathBuf = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp).map_err(wrap)?;
        file.write_all(bytes).map_err(wrap)?;
        file.sync_all().map_err(wrap)?;
    }
    std::fs::rename(&tmp, path).map_err(wrap)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

// ---------------------------------------------------------------------------
// spectrum

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumMode {
    pub index: usize,
    pub m: i32,
    pub n: usize,
    pub sign: i8,
    pub k: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub meta: Meta,
    /// `2 pi / area`, the lower bound satisfied by every `lambda^2`.
    pub gap_bound: f64,
    pub min_lambda_sq: f64,
    pub modes: Vec<SpectrumMode>,
}

pub fn spectrum_file(basis: &BasisSet, config: &Config) -> SpectrumFile {
    let modes = basis
        .dirac_modes()
        .iter()
        .enumerate()
        .map(|(idx, mode)| SpectrumMode {
            index: idx + 1,
            m: mode.m,
            n: mode.n,
            sign: match mode.sign {
                EnergySign::Plus => 1,
                EnergySign::Minus => -1,
            },
            k: mode.k,
            lambda: mode.eigenvalue,
        })
        .collect();
    SpectrumFile {
        meta: Meta::new(config),
        gap_bound: 2.0 * std::f64::consts::PI / basis.domain().area(),
        min_lambda_sq: basis.min_abs_eigenvalue().powi(2),
        modes,
    }
}

pub fn write_spectrum(path: &Path, file: &SpectrumFile) -> Result<(), IoError> {
    write_json(path, file)
}

pub fn spectrum_table(file: &SpectrumFile) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "gap bound 2*pi/area = {:.12}; min lambda^2 = {:.12}\n",
        file.gap_bound, file.min_lambda_sq
    ));
    out.push_str(&format!(
        "{:>5} {:>4} {:>3} {:>4} {:>18} {:>18}\n",
        "index", "m", "n", "sign", "k", "lambda"
    ));
    for mode in &file.modes {
        out.push_str(&format!(
            "{:>5} {:>4} {:>3} {:>4} {:>18.12} {:>18.12}\n",
            mode.index, mode.m, mode.n, mode.sign, mode.k, mode.lambda
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// solutions

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub meta: Meta,
    pub omega: f64,
    pub kappa: f64,
    pub branch: Option<usize>,
    pub lambda: Option<f64>,
    pub action: f64,
    pub q_value: f64,
    pub residual_norm: f64,
    pub x_norm: f64,
    pub x_norm_plus: f64,
    pub x_norm_minus: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gauge_defect: f64,
    pub identity_defect: f64,
    pub restarts: u32,
    pub damped_steps: usize,
    /// `[re, im]` pairs in the deterministic mode order of the basis.
    pub coefficients: Vec<[f64; 2]>,
}

pub fn solution_file(solution: &Solution, config: &Config) -> SolutionFile {
    SolutionFile {
        meta: Meta::new(config),
        omega: solution.params.omega,
        kappa: solution.params.kappa,
        branch: solution.branch,
        lambda: solution.lambda,
        action: solution.action,
        q_value: solution.q_value,
        residual_norm: solution.residual_norm,
        x_norm: solution.x_norm,
        x_norm_plus: solution.x_norm_plus,
        x_norm_minus: solution.x_norm_minus,
        iterations: solution.iterations,
        converged: solution.converged,
        gauge_defect: solution.gauge_defect,
        identity_defect: solution.nehari_defect,
        restarts: solution.restarts,
        damped_steps: solution.damped_steps,
        coefficients: solution
            .state
            .coeffs()
            .iter()
            .map(|c| [c.re, c.im])
            .collect(),
    }
}

pub fn write_solution(path: &Path, file: &SolutionFile) -> Result<(), IoError> {
    write_json(path, file)
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Decode {
        path: path.display().to_string(),
        source,
    })
}

/// Rehydrates the coefficient vector against a basis, checking the length.
pub fn solution_state(file: &SolutionFile, basis: &BasisSet) -> Result<SpinorState, IoError> {
    if file.coefficients.len() != basis.dirac_modes().len() {
        return Err(IoError::Mismatch(format!(
            "file has {} coefficients, basis has {} modes",
            file.coefficients.len(),
            basis.dirac_modes().len()
        )));
    }
    let coeffs = file
        .coefficients
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    Ok(SpinorState::from_coeffs(basis, coeffs)?)
}

// ---------------------------------------------------------------------------
// ladder

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderEntry {
    pub branch: usize,
    pub lambda: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderFile {
    pub meta: Meta,
    pub omega: f64,
    pub kappa: f64,
    /// Branch labels are the linear eigenmode indices; the correspondence
    /// with critical levels is heuristic.
    pub branch_labelling: String,
    pub entries: Vec<LadderEntry>,
}

pub fn ladder_file(records: &[BranchRecord], config: &Config) -> LadderFile {
    LadderFile {
        meta: Meta::new(config),
        omega: config.problem.omega,
        kappa: config.problem.kappa,
        branch_labelling: "branches are indexed by the seeding linear eigenmode; \
                           the ordering against critical levels is heuristic"
            .into(),
        entries: records
            .iter()
            .map(|record| match &record.outcome {
                Ok(sol) => LadderEntry {
                    branch: record.branch,
                    lambda: record.lambda,
                    status: "converged".into(),
                    action: Some(sol.action),
                    residual_norm: Some(sol.residual_norm),
                    iterations: Some(sol.iterations),
                    coefficients: Some(
                        sol.state.coeffs().iter().map(|c| [c.re, c.im]).collect(),
                    ),
                },
                Err(err) => LadderEntry {
                    branch: record.branch,
                    lambda: record.lambda,
                    status: format!("failed: {err}"),
                    action: None,
                    residual_norm: None,
                    iterations: None,
                    coefficients: None,
                },
            })
            .collect(),
    }
}

pub fn write_ladder(path: &Path, file: &LadderFile) -> Result<(), IoError> {
    write_json(path, file)
}

pub fn ladder_table(file: &LadderFile) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>6} {:>14} {:>16} {:>12} {:>6}  status\n",
        "branch", "lambda", "action", "residual", "iters"
    ));
    for entry in &file.entries {
        out.push_str(&format!(
            "{:>6} {:>14.8} {:>16} {:>12} {:>6}  {}\n",
            entry.branch,
            entry.lambda,
            entry
                .action
                .map(|a| format!("{a:.10}"))
                .unwrap_or_else(|| "-".into()),
            entry
                .residual_norm
                .map(|r| format!("{r:.2e}"))
                .unwrap_or_else(|| "-".into()),
            entry
                .iterations
                .map(|i| i.to_string())
                .unwrap_or_else(|| "-".into()),
            entry.status
        ));
    }
    out.push_str("note: branch indices follow the linear eigenmode ordering (heuristic level labels)\n");
    out
}

// ---------------------------------------------------------------------------
// verification report

#[derive(Debug, Clone, Serialize)]
pub struct VerifyFile<'a> {
    pub meta: Meta,
    /// Deterministic given (config, seed): compare this subtree for
    /// reproducibility.
    pub payload: &'a VerifyReport,
    /// Wall-clock companion, excluded from determinism comparisons.
    pub timing: VerifyTiming,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyTiming {
    pub per_check_ms: Vec<(String, f64)>,
    pub total_ms: f64,
}

pub fn verify_file<'a>(report: &'a VerifyReport, config: &Config, total_ms: f64) -> VerifyFile<'a> {
    VerifyFile {
        meta: Meta::new(config),
        payload: report,
        timing: VerifyTiming {
            per_check_ms: report.timings_ms(),
            total_ms,
        },
    }
}

pub fn write_verify(path: &Path, file: &VerifyFile) -> Result<(), IoError> {
    write_json(path, file)
}

// ---------------------------------------------------------------------------
// field export

/// Which field of a solution to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    Density,
    Potential,
    Spinor,
}

impl std::str::FromStr for ExportKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "density" => Ok(Self::Density),
            "potential" => Ok(Self::Potential),
            "spinor" => Ok(Self::Spinor),
            other => Err(format!(
                "unknown field '{other}' (expected density, potential or spinor)"
            )),
        }
    }
}

/// CSV of one field over the grid, row-major over (radial node, angular
/// node), with a comment header naming the provenance.
pub fn export_csv(
    path: &Path,
    basis: &BasisSet,
    state: &SpinorState,
    kind: ExportKind,
    config: &Config,
) -> Result<(), IoError> {
    let grid = basis.grid();
    let nt = grid.angular_count();
    let meta = Meta::new(config);
    let mut out = String::new();
    out.push_str(&format!(
        "# tool={} version={} config_hash={} seed={}\n",
        meta.tool, meta.version, meta.config_hash, meta.seed
    ));
    match kind {
        ExportKind::Density => {
            let d = operators::density(basis, state)?;
            out.push_str("r,theta,density\n");
            for (i, &r) in grid.radial().iter().enumerate() {
                for (j, &theta) in grid.theta().iter().enumerate() {
                    out.push_str(&format!("{r:.17e},{theta:.17e},{:.17e}\n", d[i * nt + j]));
                }
            }
        }
        ExportKind::Potential => {
            let v = operators::hartree_potential(basis, state)?;
            out.push_str("r,theta,potential\n");
            for (i, &r) in grid.radial().iter().enumerate() {
                for (j, &theta) in grid.theta().iter().enumerate() {
                    out.push_str(&format!(
                        "{r:.17e},{theta:.17e},{:.17e}\n",
                        v.values()[i * nt + j]
                    ));
                }
            }
        }
        ExportKind::Spinor => {
            let values = basis.synth_spinor(state.coeffs())?;
            out.push_str("r,theta,re_up,im_up,re_dn,im_dn\n");
            for (i, &r) in grid.radial().iter().enumerate() {
                for (j, &theta) in grid.theta().iter().enumerate() {
                    let node = i * nt + j;
                    out.push_str(&format!(
                        "{r:.17e},{theta:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                        values.up[node].re,
                        values.up[node].im,
                        values.dn[node].re,
                        values.dn[node].im
                    ));
                }
            }
        }
    }
    atomic_write(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Domain, LatticeParameter};
    use crate::operators::ProblemParams;
    use crate::solver::{branch_init, newton_solve, SolverOptions};

    fn small_setup() -> (BasisSet, Config) {
        let mut config = Config::default();
        config.truncation = crate::config::TruncationSection {
            m_max: 1,
            n_radial: 2,
            dirichlet_radial: 4,
            radial_nodes: 32,
            angular_nodes: 16,
        };
        let basis = build_basis(
            Domain::unit(),
            LatticeParameter::one(),
            config.truncation(),
        )
        .unwrap();
        (basis, config)
    }

    #[test]
    fn solution_files_round_trip_losslessly() {
        let (basis, config) = small_setup();
        let params = ProblemParams::default();
        let init = branch_init(&basis, &params, 1).unwrap();
        let sol = newton_solve(&basis, &init, &params, &SolverOptions::default()).unwrap();
        let file = solution_file(&sol, &config);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("solution.json");
        write_solution(&path, &file).unwrap();
        let back = read_solution(&path).unwrap();
        let state = solution_state(&back, &basis).unwrap();
        assert_eq!(state.coeffs(), sol.state.coeffs(), "bit-exact round trip");
        assert_eq!(back.action.to_bits(), sol.action.to_bits());
        assert_eq!(back.meta.config_hash, config.hash());
    }

    #[test]
    fn rewriting_the_same_solution_is_byte_identical() {
        let (basis, config) = small_setup();
        let params = ProblemParams::default();
        let init = branch_init(&basis, &params, 1).unwrap();
        let sol = newton_solve(&basis, &init, &params, &SolverOptions::default()).unwrap();
        let file = solution_file(&sol, &config);
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        write_solution(&a, &file).unwrap();
        write_solution(&b, &file).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn spectrum_table_lists_every_mode() {
        let (basis, config) = small_setup();
        let file = spectrum_file(&basis, &config);
        assert_eq!(file.modes.len(), basis.dirac_modes().len());
        let table = spectrum_table(&file);
        assert!(table.contains("gap bound"));
        // symmetric extremes
        let lambdas: Vec<f64> = file.modes.iter().map(|m| m.lambda).collect();
        let max = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((max + min).abs() < 1e-12);
    }

    #[test]
    fn csv_export_shapes_and_nonnegativity() {
        let (basis, config) = small_setup();
        let params = ProblemParams::default();
        let init = branch_init(&basis, &params, 1).unwrap();
        let sol = newton_solve(&basis, &init, &params, &SolverOptions::default()).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("density.csv");
        export_csv(&path, &basis, &sol.state, ExportKind::Density, &config).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# tool=diracdisk"));
        assert_eq!(lines.next().unwrap(), "r,theta,density");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), basis.grid().node_count());
        for row in rows {
            let value: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert!(value >= 0.0, "density must be nonnegative");
        }

        let zpath = dir.path().join("zero.csv");
        let zero = SpinorState::zero(&basis);
        export_csv(&zpath, &basis, &zero, ExportKind::Spinor, &config).unwrap();
        let ztext = std::fs::read_to_string(&zpath).unwrap();
        for row in ztext.lines().skip(2) {
            for field in row.split(',').skip(2) {
                assert_eq!(field.parse::<f64>().unwrap(), 0.0);
            }
        }
    }
}
