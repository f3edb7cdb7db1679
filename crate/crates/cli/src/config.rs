//! Scenario configuration file (JSON, `schema: 1`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PlanePlane,
    CasimirPolder,
    Grating,
    Asymptotics,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub mode: Mode,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(rename = "temperature_K", default)]
    pub temperature_k: f64,
    #[serde(default)]
    pub materials: Materials,
    pub atom: Option<AtomConfig>,
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub numerics: Numerics,
}

/// Lengths in nanometres. Which ones are required depends on the mode.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub a_nm: Option<f64>,
    #[serde(rename = "L_nm")]
    pub l_nm: Option<f64>,
    pub s_nm: Option<f64>,
    pub d_nm: Option<f64>,
    pub h_nm: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Materials {
    pub side1: Option<MaterialConfig>,
    pub side2: Option<MaterialConfig>,
    pub surface: Option<MaterialConfig>,
    pub lower: Option<MaterialConfig>,
    pub upper: Option<MaterialConfig>,
}

fn default_fine_structure() -> f64 {
    1.0 / 137.036
}

fn default_species() -> u32 {
    4
}

fn default_fermi_velocity() -> f64 {
    1.0 / 300.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaterialConfig {
    Ideal,
    Constant {
        eps: f64,
    },
    Plasma {
        #[serde(rename = "omega_p_eV")]
        omega_p_ev: f64,
    },
    Drude {
        #[serde(rename = "omega_p_eV")]
        omega_p_ev: f64,
        #[serde(rename = "gamma_eV")]
        gamma_ev: f64,
    },
    /// CSV file with header `omega_eV,eps_iw`, relative to the config file.
    Tabulated {
        file: PathBuf,
    },
    Graphene {
        #[serde(default = "default_fine_structure")]
        alpha: f64,
        #[serde(rename = "N", default = "default_species")]
        species: u32,
        #[serde(rename = "v_F", default = "default_fermi_velocity")]
        fermi_velocity: f64,
    },
    Superconductor {
        #[serde(rename = "m0_eV")]
        m0_ev: f64,
        gamma: f64,
        /// Normal-state permittivity used at nonzero Matsubara frequencies.
        normal: Box<MaterialConfig>,
    },
    /// Perfectly conducting sinusoidal grating of depth `geometry.h_nm`.
    PcSinusoid,
    /// Perfectly conducting triangular grating of depth `geometry.h_nm`.
    PcTriangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum AlphaUnits {
    #[default]
    HL,
    Gaussian,
}

/// Atomic polarizability in nm³; `omega0_eV` absent means a static response.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub alpha0_nm3: f64,
    #[serde(rename = "omega0_eV")]
    pub omega0_ev: Option<f64>,
    /// Normal component, if different from the in-plane one.
    pub alpha0_zz_nm3: Option<f64>,
    #[serde(rename = "omega0_zz_eV")]
    pub omega0_zz_ev: Option<f64>,
    #[serde(default)]
    pub units: AlphaUnits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_order() -> usize {
    3
}

fn default_max_terms() -> usize {
    10_000
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(rename = "J", default = "default_order")]
    pub order: usize,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
    /// Also compute the pressure or force column.
    #[serde(default = "default_true")]
    pub force: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { tol: default_tol(), order: default_order(), max_terms: default_max_terms(), force: true }
    }
}

/// A parsed config together with the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ScenarioConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if config.schema != SCHEMA_VERSION {
        return Err(CliError::Config(format!("schema: unsupported version {} (expected {SCHEMA_VERSION})", config.schema)));
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base_dir })
}
