//! Validation of a scenario config into the list of points to evaluate.

use std::path::Path;

use casimir::gratings::{GratingProfile, PcProfile};
use casimir::materials::{DielectricModel, GrapheneZeroModeModel, SuperconductorModel, TabulatedPermittivity};
use casimir::reflection::Surface;
use serde::Deserialize;

use crate::config::{AlphaUnits, AtomConfig, LoadedConfig, MaterialConfig, Mode, Numerics, ScenarioConfig, Spacing};
use crate::error::CliError;
use crate::units;

/// Quantity that varies across the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    A,
    L,
    S,
    D,
    H,
    Temperature,
}

impl Variable {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "a_nm" => Self::A,
            "L_nm" => Self::L,
            "s_nm" => Self::S,
            "d_nm" => Self::D,
            "h_nm" => Self::H,
            "temperature_K" => Self::Temperature,
            _ => return None,
        })
    }

    /// Config field that supplies the value when not swept.
    pub fn field(self) -> &'static str {
        match self {
            Self::A => "geometry.a_nm",
            Self::L => "geometry.L_nm",
            Self::S => "geometry.s_nm",
            Self::D => "geometry.d_nm",
            Self::H => "geometry.h_nm",
            Self::Temperature => "temperature_K",
        }
    }

    /// Output column holding the value in SI units.
    pub fn column(self) -> &'static str {
        match self {
            Self::A => "a_m",
            Self::L => "L_m",
            Self::S => "s_m",
            Self::D => "d_m",
            Self::H => "h_m",
            Self::Temperature => "temperature_K",
        }
    }

    /// Converts a config value (nm or K) to the SI output column.
    pub fn to_si(self, value: f64) -> f64 {
        match self {
            Self::Temperature => value,
            _ => value * units::LENGTH,
        }
    }
}

/// Geometry and temperature of one point, in config units (nm, K).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointParams {
    pub a_nm: f64,
    pub l_nm: f64,
    pub s_nm: f64,
    pub d_nm: f64,
    pub h_nm: f64,
    pub temperature_k: f64,
}

impl PointParams {
    pub fn get(&self, v: Variable) -> f64 {
        match v {
            Variable::A => self.a_nm,
            Variable::L => self.l_nm,
            Variable::S => self.s_nm,
            Variable::D => self.d_nm,
            Variable::H => self.h_nm,
            Variable::Temperature => self.temperature_k,
        }
    }

    fn set(&mut self, v: Variable, value: f64) {
        match v {
            Variable::A => self.a_nm = value,
            Variable::L => self.l_nm = value,
            Variable::S => self.s_nm = value,
            Variable::D => self.d_nm = value,
            Variable::H => self.h_nm = value,
            Variable::Temperature => self.temperature_k = value,
        }
    }

    pub fn temperature(&self) -> f64 {
        units::kelvin_to_natural(self.temperature_k)
    }
}

/// A material with its parameters converted to natural units.
#[derive(Debug, Clone)]
pub enum Material {
    Bulk(DielectricModel),
    Graphene { alpha: f64, species: u32, fermi_velocity: f64 },
    Superconductor { model: SuperconductorModel, normal: DielectricModel },
    PcSinusoid,
    PcTriangle,
}

impl Material {
    fn is_grating(&self) -> bool {
        matches!(self, Self::PcSinusoid | Self::PcTriangle)
    }

    fn is_ideal(&self) -> bool {
        matches!(self, Self::Bulk(DielectricModel::IdealConductor))
    }

    /// Planar surface at temperature `t` (natural units).
    pub fn surface(&self, t: f64) -> casimir::Result<Surface> {
        Ok(match self {
            Self::Bulk(m) => Surface::Bulk(m.clone()),
            Self::Graphene { alpha, species, fermi_velocity } => {
                Surface::Layer(std::sync::Arc::new(GrapheneZeroModeModel::new(*alpha, *species, *fermi_velocity, t)?))
            }
            Self::Superconductor { model, normal } => Surface::Superconductor { zero_mode: *model, normal: normal.clone() },
            Self::PcSinusoid | Self::PcTriangle => {
                return Err(casimir::Error::InvalidInput("grating profile used as a planar surface".into()))
            }
        })
    }

    /// Grating profile with depth `h` and period `d` (nm).
    pub fn grating_profile(&self, h: f64, d: f64) -> casimir::Result<GratingProfile> {
        Ok(match self {
            Self::PcSinusoid => GratingProfile::PerfectConductor(PcProfile::sinusoid(h, d)?),
            Self::PcTriangle => GratingProfile::PerfectConductor(PcProfile::triangle(h, d)?),
            other => GratingProfile::Flat(other.surface(0.0)?),
        })
    }
}

/// Atom response in natural units, Heaviside–Lorentz normalisation.
#[derive(Debug, Clone, Copy)]
pub struct Atom {
    pub alpha0: f64,
    pub omega0: Option<f64>,
    pub alpha0_zz: f64,
    pub omega0_zz: Option<f64>,
}

/// Pair of surfaces for which closed high-temperature forms exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticPair {
    IdealIdeal,
    /// Graphene on side 1 or 2 facing an ideal metal.
    GrapheneMetal { graphene_first: bool },
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub mode: Mode,
    pub variable: Variable,
    pub points: Vec<PointParams>,
    pub numerics: Numerics,
    /// Plane-plane and asymptotics: the two sides; grating: lower and upper; Casimir–Polder: the surface only.
    pub materials: Vec<Material>,
    pub atom: Option<Atom>,
    pub asymptotic_pair: Option<AsymptoticPair>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{field} must be > 0 (got {v})")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{field} must be >= 0 (got {v})")))
    }
}

#[derive(Debug, Deserialize)]
struct TableRow {
    #[serde(rename = "omega_eV")]
    omega_ev: f64,
    eps_iw: f64,
}

fn read_table(field: &str, path: &Path) -> Result<TabulatedPermittivity, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| config_err(format!("{field}: cannot read {}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| config_err(format!("{field}: {}: {e}", path.display())))?;
    if headers.iter().collect::<Vec<_>>() != ["omega_eV", "eps_iw"] {
        return Err(config_err(format!("{field}: {} must have header omega_eV,eps_iw", path.display())));
    }
    let mut points = Vec::new();
    for (i, row) in reader.deserialize::<TableRow>().enumerate() {
        let row = row.map_err(|e| config_err(format!("{field}: {} row {}: {e}", path.display(), i + 1)))?;
        points.push((units::ev_to_natural(row.omega_ev), row.eps_iw));
    }
    TabulatedPermittivity::new(&points).map_err(|e| config_err(format!("{field}: {}: {e}", path.display())))
}

fn resolve_material(field: &str, m: &MaterialConfig, base_dir: &Path) -> Result<Material, CliError> {
    let wrap = |e: casimir::Error| config_err(format!("{field}: {e}"));
    Ok(match m {
        MaterialConfig::Ideal => Material::Bulk(DielectricModel::IdealConductor),
        MaterialConfig::Constant { eps } => Material::Bulk(DielectricModel::constant(*eps).map_err(wrap)?),
        MaterialConfig::Plasma { omega_p_ev } => {
            positive(&format!("{field}.omega_p_eV"), *omega_p_ev)?;
            Material::Bulk(DielectricModel::plasma(units::ev_to_natural(*omega_p_ev)).map_err(wrap)?)
        }
        MaterialConfig::Drude { omega_p_ev, gamma_ev } => {
            positive(&format!("{field}.omega_p_eV"), *omega_p_ev)?;
            non_negative(&format!("{field}.gamma_eV"), *gamma_ev)?;
            Material::Bulk(DielectricModel::drude(units::ev_to_natural(*omega_p_ev), units::ev_to_natural(*gamma_ev)).map_err(wrap)?)
        }
        MaterialConfig::Tabulated { file } => {
            Material::Bulk(DielectricModel::Tabulated(read_table(&format!("{field}.file"), &base_dir.join(file))?))
        }
        MaterialConfig::Graphene { alpha, species, fermi_velocity } => {
            // probe the parameters at an arbitrary temperature
            GrapheneZeroModeModel::new(*alpha, *species, *fermi_velocity, 1.0).map_err(wrap)?;
            Material::Graphene { alpha: *alpha, species: *species, fermi_velocity: *fermi_velocity }
        }
        MaterialConfig::Superconductor { m0_ev, gamma, normal } => {
            non_negative(&format!("{field}.m0_eV"), *m0_ev)?;
            let model = SuperconductorModel::new(units::ev_to_natural(*m0_ev), *gamma).map_err(wrap)?;
            let normal = match resolve_material(&format!("{field}.normal"), normal, base_dir)? {
                Material::Bulk(m) => m,
                _ => return Err(config_err(format!("{field}.normal must be a bulk permittivity model"))),
            };
            Material::Superconductor { model, normal }
        }
        MaterialConfig::PcSinusoid => Material::PcSinusoid,
        MaterialConfig::PcTriangle => Material::PcTriangle,
    })
}

fn required_material(field: &str, m: &Option<MaterialConfig>, base_dir: &Path) -> Result<Material, CliError> {
    match m {
        Some(m) => resolve_material(field, m, base_dir),
        None => Err(config_err(format!("{field} is required in this mode"))),
    }
}

fn reject_material(field: &str, m: &Option<MaterialConfig>) -> Result<(), CliError> {
    match m {
        Some(_) => Err(config_err(format!("{field} is not used in this mode"))),
        None => Ok(()),
    }
}

fn planar_only(field: &str, m: &Material) -> Result<(), CliError> {
    if m.is_grating() {
        return Err(config_err(format!("{field}: grating profiles are only allowed in grating mode")));
    }
    if matches!(m, Material::Graphene { .. }) {
        return Err(config_err(format!("{field}: the graphene zero-mode model is only valid in asymptotics mode")));
    }
    Ok(())
}

fn resolve_atom(atom: &AtomConfig) -> Result<Atom, CliError> {
    let scale = match atom.units {
        AlphaUnits::HL => 1.0,
        AlphaUnits::Gaussian => 4.0 * std::f64::consts::PI,
    };
    let alpha0 = non_negative("atom.alpha0_nm3", atom.alpha0_nm3)? * scale;
    let alpha0_zz = match atom.alpha0_zz_nm3 {
        Some(v) => non_negative("atom.alpha0_zz_nm3", v)? * scale,
        None => alpha0,
    };
    let omega0 = atom.omega0_ev.map(|v| positive("atom.omega0_eV", v).map(units::ev_to_natural)).transpose()?;
    let omega0_zz = match atom.omega0_zz_ev {
        Some(v) => Some(units::ev_to_natural(positive("atom.omega0_zz_eV", v)?)),
        None => omega0,
    };
    Ok(Atom { alpha0, omega0, alpha0_zz, omega0_zz })
}

fn sweep_values(config: &ScenarioConfig) -> Result<Option<(Variable, Vec<f64>)>, CliError> {
    let Some(sweep) = &config.sweep else {
        return Ok(None);
    };
    let variable = Variable::parse(&sweep.variable).ok_or_else(|| {
        config_err(format!(
            "sweep.variable: unknown variable {:?} (expected a_nm, L_nm, s_nm, d_nm, h_nm or temperature_K)",
            sweep.variable
        ))
    })?;
    if sweep.points == 0 {
        return Err(config_err("sweep.points must be >= 1"));
    }
    positive("sweep.start", sweep.start)?;
    positive("sweep.stop", sweep.stop)?;
    if sweep.stop < sweep.start {
        return Err(config_err(format!("sweep.stop ({}) must not be below sweep.start ({})", sweep.stop, sweep.start)));
    }
    let n = sweep.points;
    let values = (0..n)
        .map(|i| {
            if n == 1 {
                return sweep.start;
            }
            let f = i as f64 / (n - 1) as f64;
            match sweep.spacing {
                Spacing::Linear => sweep.start + f * (sweep.stop - sweep.start),
                Spacing::Log => (sweep.start.ln() + f * (sweep.stop.ln() - sweep.start.ln())).exp(),
            }
        })
        .collect();
    Ok(Some((variable, values)))
}

/// Mode-specific required fields and the variable reported when nothing is swept.
fn principal_variable(mode: Mode) -> Variable {
    match mode {
        Mode::Grating => Variable::L,
        _ => Variable::A,
    }
}

fn allowed_variables(mode: Mode) -> &'static [Variable] {
    match mode {
        Mode::PlanePlane | Mode::Asymptotics => &[Variable::A, Variable::Temperature],
        Mode::CasimirPolder => &[Variable::A],
        Mode::Grating => &[Variable::L, Variable::S, Variable::D, Variable::H, Variable::Temperature],
    }
}

pub fn build(loaded: &LoadedConfig, tol_override: Option<f64>) -> Result<Plan, CliError> {
    let config = &loaded.config;
    let base_dir = &loaded.base_dir;
    let mode = config.mode;

    let mut numerics = config.numerics.clone();
    if let Some(tol) = tol_override {
        numerics.tol = tol;
    }
    if !(numerics.tol > 0.0 && numerics.tol < 1.0) {
        return Err(config_err(format!("numerics.tol must lie in (0, 1) (got {})", numerics.tol)));
    }
    if numerics.order == 0 {
        return Err(config_err("numerics.J must be >= 1"));
    }
    if numerics.max_terms == 0 {
        return Err(config_err("numerics.max_terms must be >= 1"));
    }

    let sweep = sweep_values(config)?;
    if let Some((v, _)) = &sweep {
        if !allowed_variables(mode).contains(v) {
            return Err(config_err(format!("sweep.variable: {} cannot be swept in this mode", v.field())));
        }
    }
    let swept = sweep.as_ref().map(|(v, _)| *v);

    let geometry = &config.geometry;
    let given = [
        (Variable::A, geometry.a_nm),
        (Variable::L, geometry.l_nm),
        (Variable::S, geometry.s_nm),
        (Variable::D, geometry.d_nm),
        (Variable::H, geometry.h_nm),
    ];
    let mut base = PointParams { temperature_k: config.temperature_k, ..Default::default() };
    for (v, value) in given {
        if let Some(x) = value {
            if swept == Some(v) {
                return Err(config_err(format!("{} is also set by sweep.variable; remove one", v.field())));
            }
            base.set(v, x);
        }
    }
    let present = |v: Variable| swept == Some(v) || given.iter().any(|(g, x)| *g == v && x.is_some());

    let mats = &config.materials;
    let mut materials = Vec::new();
    let mut atom = None;
    let mut asymptotic_pair = None;
    let mut required: Vec<Variable> = Vec::new();
    match mode {
        Mode::PlanePlane | Mode::Asymptotics => {
            required.push(Variable::A);
            reject_material("materials.surface", &mats.surface)?;
            reject_material("materials.lower", &mats.lower)?;
            reject_material("materials.upper", &mats.upper)?;
            let s1 = required_material("materials.side1", &mats.side1, base_dir)?;
            let s2 = required_material("materials.side2", &mats.side2, base_dir)?;
            if mode == Mode::PlanePlane {
                planar_only("materials.side1", &s1)?;
                planar_only("materials.side2", &s2)?;
            } else {
                let graphene = |m: &Material| matches!(m, Material::Graphene { .. });
                asymptotic_pair = Some(match (s1.is_ideal(), s2.is_ideal()) {
                    (true, true) => AsymptoticPair::IdealIdeal,
                    (false, true) if graphene(&s1) => AsymptoticPair::GrapheneMetal { graphene_first: true },
                    (true, false) if graphene(&s2) => AsymptoticPair::GrapheneMetal { graphene_first: false },
                    _ => {
                        return Err(config_err(
                            "materials: asymptotics mode needs ideal–ideal or graphene–ideal sides".to_string(),
                        ))
                    }
                });
            }
            materials.push(s1);
            materials.push(s2);
        }
        Mode::CasimirPolder => {
            required.push(Variable::A);
            for f in ["side1", "side2", "lower", "upper"] {
                let m = match f {
                    "side1" => &mats.side1,
                    "side2" => &mats.side2,
                    "lower" => &mats.lower,
                    _ => &mats.upper,
                };
                reject_material(&format!("materials.{f}"), m)?;
            }
            let s = required_material("materials.surface", &mats.surface, base_dir)?;
            planar_only("materials.surface", &s)?;
            materials.push(s);
            let a = config.atom.as_ref().ok_or_else(|| config_err("atom is required in casimir-polder mode"))?;
            atom = Some(resolve_atom(a)?);
        }
        Mode::Grating => {
            required.extend([Variable::L, Variable::D]);
            reject_material("materials.side1", &mats.side1)?;
            reject_material("materials.side2", &mats.side2)?;
            reject_material("materials.surface", &mats.surface)?;
            let lower = required_material("materials.lower", &mats.lower, base_dir)?;
            let upper = required_material("materials.upper", &mats.upper, base_dir)?;
            for (f, m) in [("materials.lower", &lower), ("materials.upper", &upper)] {
                if matches!(m, Material::Graphene { .. }) {
                    return Err(config_err(format!("{f}: the graphene zero-mode model is only valid in asymptotics mode")));
                }
            }
            if lower.is_grating() || upper.is_grating() {
                required.push(Variable::H);
            }
            materials.push(lower);
            materials.push(upper);
        }
    }
    if mode != Mode::CasimirPolder && config.atom.is_some() {
        return Err(config_err("atom is only used in casimir-polder mode"));
    }
    for v in &required {
        if !present(*v) {
            return Err(config_err(format!("{} is required in this mode", v.field())));
        }
    }
    for (v, _) in given {
        if !required.contains(&v) && !(mode == Mode::Grating && v == Variable::S) && present(v) && swept != Some(v) {
            return Err(config_err(format!("{} is not used in this mode", v.field())));
        }
    }

    let values = match &sweep {
        Some((v, values)) => values.iter().map(|x| {
            let mut p = base;
            p.set(*v, *x);
            p
        }).collect(),
        None => vec![base],
    };
    let field = |v: Variable| if swept == Some(v) { "sweep.start/stop".to_string() } else { v.field().to_string() };
    for p in &values {
        for v in &required {
            positive(&field(*v), p.get(*v))?;
        }
        non_negative(&field(Variable::Temperature), p.temperature_k)?;
        if mode == Mode::Grating && !p.s_nm.is_finite() {
            return Err(config_err(format!("{} must be finite", field(Variable::S))));
        }
        match mode {
            Mode::CasimirPolder if p.temperature_k != 0.0 => {
                return Err(config_err("temperature_K: casimir-polder energies are computed at T = 0 only"));
            }
            Mode::Asymptotics => {
                positive(&field(Variable::Temperature), p.temperature_k)?;
            }
            Mode::Grating => {
                let depth: f64 = materials.iter().filter(|m| m.is_grating()).map(|_| p.h_nm).sum();
                if p.l_nm <= depth {
                    return Err(config_err(format!(
                        "{} ({}) must exceed the summed corrugation depth ({depth} nm)",
                        field(Variable::L),
                        p.l_nm
                    )));
                }
            }
            _ => {}
        }
    }

    Ok(Plan {
        mode,
        variable: swept.unwrap_or_else(|| principal_variable(mode)),
        points: values,
        numerics,
        materials,
        atom,
        asymptotic_pair,
    })
}
