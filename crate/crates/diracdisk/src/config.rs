//! Run configuration: one TOML file of `key = value` sections, overridden
//! first by `DIRACDISK_*` environment variables and then by command-line
//! flags (flags win). The effective configuration hashes to a short token
//! recorded in every output file, so identical configs are recognisable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

use crate::basis::{BasisError, Domain, LatticeParameter, Truncation};
use crate::operators::ProblemParams;
use crate::solver::SolverOptions;
use crate::verify::VerifyConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub radius: f64,
    /// Lattice parameter as `[re, im]`.
    pub lambda: [f64; 2],
}

impl Default for DomainSection {
    fn default() -> Self {
        Self {
            radius: 1.0,
            lambda: [1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub m_max: usize,
    pub n_radial: usize,
    pub dirichlet_radial: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        let t = Truncation::default();
        Self {
            m_max: t.m_max,
            n_radial: t.n_radial,
            dirichlet_radial: t.dirichlet_radial,
            radial_nodes: t.radial_nodes,
            angular_nodes: t.angular_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub omega: f64,
    pub kappa: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            omega: 0.0,
            kappa: -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub backtrack_factor: f64,
    pub min_step: f64,
    pub flow_enabled: bool,
    pub flow_step: f64,
    pub flow_max_steps: usize,
    pub deflation_shift: Option<f64>,
    pub max_restarts: u32,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            max_iterations: o.max_iterations,
            tolerance: o.tolerance,
            backtrack_factor: o.backtrack_factor,
            min_step: o.min_step,
            flow_enabled: o.flow_enabled,
            flow_step: o.flow_step,
            flow_max_steps: o.flow_max_steps,
            deflation_shift: o.deflation_shift,
            max_restarts: o.max_restarts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    /// Ladder length used by `verify`.
    pub verify_branches: usize,
    pub output_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 7,
            verify_branches: 5,
            output_dir: "out".into(),
        }
    }
}

/// The full run configuration; every field has a default, unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub domain: DomainSection,
    pub truncation: TruncationSection,
    pub problem: ProblemSection,
    pub solver: SolverSection,
    pub run: RunSection,
}

/// Flag-level overrides; `None` leaves the config value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub omega: Option<f64>,
    pub kappa: Option<f64>,
    pub m_max: Option<usize>,
    pub n_max: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// Environment overrides with the `DIRACDISK_` prefix; applied between
    /// the file and the flags.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(name: &str) -> Result<Option<T>, ConfigError> {
            match std::env::var(name) {
                Ok(text) => text
                    .parse::<T>()
                    .map(Some)
                    .map_err(|_| ConfigError::Invalid(format!("cannot parse ${name} = {text}"))),
                Err(_) => Ok(None),
            }
        }
        if let Some(v) = parse::<f64>("DIRACDISK_OMEGA")? {
            self.problem.omega = v;
        }
        if let Some(v) = parse::<f64>("DIRACDISK_KAPPA")? {
            self.problem.kappa = v;
        }
        if let Some(v) = parse::<u64>("DIRACDISK_SEED")? {
            self.run.seed = v;
        }
        if let Some(v) = parse::<String>("DIRACDISK_OUT")? {
            self.run.output_dir = v;
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, overrides: &Overrides) {
        if let Some(v) = overrides.omega {
            self.problem.omega = v;
        }
        if let Some(v) = overrides.kappa {
            self.problem.kappa = v;
        }
        if let Some(v) = overrides.m_max {
            self.truncation.m_max = v;
            // keep the anti-aliasing rule satisfied for shrunken runs
            self.truncation.angular_nodes = self.truncation.angular_nodes.max(4 * v + 8);
        }
        if let Some(v) = overrides.n_max {
            self.truncation.n_radial = v;
        }
        if let Some(v) = overrides.seed {
            self.run.seed = v;
        }
        if let Some(v) = &overrides.output_dir {
            self.run.output_dir = v.clone();
        }
    }

    /// Canonical serialized form; the basis of the config hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }

    pub fn domain(&self) -> Result<Domain, ConfigError> {
        Ok(Domain::new(self.domain.radius)?)
    }

    pub fn lattice(&self) -> Result<LatticeParameter, ConfigError> {
        Ok(LatticeParameter::new(Complex64::new(
            self.domain.lambda[0],
            self.domain.lambda[1],
        ))?)
    }

    pub fn truncation(&self) -> Truncation {
        Truncation {
            m_max: self.truncation.m_max,
            n_radial: self.truncation.n_radial,
            dirichlet_radial: self.truncation.dirichlet_radial,
            radial_nodes: self.truncation.radial_nodes,
            angular_nodes: self.truncation.angular_nodes,
        }
    }

    pub fn params(&self) -> ProblemParams {
        ProblemParams::new(self.problem.omega, self.problem.kappa)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.solver.max_iterations,
            tolerance: self.solver.tolerance,
            backtrack_factor: self.solver.backtrack_factor,
            min_step: self.solver.min_step,
            flow_enabled: self.solver.flow_enabled,
            flow_step: self.solver.flow_step,
            flow_max_steps: self.solver.flow_max_steps,
            deflation_shift: self.solver.deflation_shift,
            perturb_seed: self.run.seed,
            max_restarts: self.solver.max_restarts,
        }
    }

    pub fn verify_config(&self, inject_fault: bool) -> VerifyConfig {
        VerifyConfig {
            seed: self.run.seed,
            branches: self.run.verify_branches,
            inject_fault,
            ..VerifyConfig::default()
        }
    }

    /// Validates everything the modules will check later, so a bad config
    /// fails before any computation starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.domain()?;
        self.lattice()?;
        self.truncation().validate()?;
        if !self.problem.omega.is_finite() || !self.problem.kappa.is_finite() {
            return Err(ConfigError::Invalid(
                "omega and kappa must be finite".into(),
            ));
        }
        if self.problem.kappa == 0.0 {
            return Err(ConfigError::Invalid("kappa must be nonzero".into()));
        }
        if self.run.verify_branches == 0 {
            return Err(ConfigError::Invalid(
                "run.verify_branches must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_hash_stably() {
        let config = Config::default();
        config.validate().unwrap();
        assert_eq!(config.hash(), Config::default().hash());
        assert_eq!(config.hash().len(), 16);
    }

    #[test]
    fn parse_round_trip_and_unknown_keys() {
        let config = Config::default();
        let text = config.canonical();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(config, back);

        let bad = "[problem]\nomega = 0.1\nunknown_key = 3\n";
        assert!(toml::from_str::<Config>(bad).is_err());
    }

    #[test]
    fn overrides_win_and_change_the_hash() {
        let mut config = Config::default();
        let base_hash = config.hash();
        config.apply_overrides(&Overrides {
            omega: Some(0.5),
            m_max: Some(1),
            ..Overrides::default()
        });
        assert_eq!(config.problem.omega, 0.5);
        assert_eq!(config.truncation.m_max, 1);
        assert_ne!(config.hash(), base_hash);
    }

    #[test]
    fn partial_files_fill_with_defaults() {
        let config: Config = toml::from_str("[problem]\nomega = 0.25\n").unwrap();
        assert_eq!(config.problem.omega, 0.25);
        assert_eq!(config.problem.kappa, -1.0);
        assert_eq!(config.truncation.m_max, Truncation::default().m_max);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = Config::default();
        config.problem.kappa = 0.0;
        assert!(config.validate().is_err());

        let mut config = Config::default();
        config.domain.radius = -2.0;
        assert!(config.validate().is_err());

        let mut config = Config::default();
        config.truncation.angular_nodes = 4;
        assert!(config.validate().is_err());
    }
}
