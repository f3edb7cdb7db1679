//! Conversion between SI and the natural units used by the library.
//!
//! Natural units here set `ħ = c = k_B = 1` and measure lengths in
//! nanometres, so energies, frequencies and temperatures are in nm⁻¹.

/// ħc in eV·nm.
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;
/// Joules per electronvolt.
pub const JOULE_PER_EV: f64 = 1.602_176_634e-19;
/// Boltzmann constant in eV/K.
pub const K_B_EV_PER_K: f64 = 8.617_333_262e-5;

const M_PER_NM: f64 = 1e-9;

/// Energy of 1 nm⁻¹ in joules.
const JOULE_PER_INV_NM: f64 = HBAR_C_EV_NM * JOULE_PER_EV;

/// SI factor for an energy (nm⁻¹ → J).
pub const ENERGY: f64 = JOULE_PER_INV_NM;
/// SI factor for a force (nm⁻² → N).
pub const FORCE: f64 = JOULE_PER_INV_NM / M_PER_NM;
/// SI factor for an energy per area (nm⁻³ → J/m²).
pub const ENERGY_PER_AREA: f64 = JOULE_PER_INV_NM / (M_PER_NM * M_PER_NM);
/// SI factor for a pressure or force per area (nm⁻⁴ → Pa).
pub const PRESSURE: f64 = JOULE_PER_INV_NM / (M_PER_NM * M_PER_NM * M_PER_NM);
/// SI factor for a length (nm → m).
pub const LENGTH: f64 = M_PER_NM;

pub fn ev_to_natural(ev: f64) -> f64 {
    ev / HBAR_C_EV_NM
}

pub fn kelvin_to_natural(kelvin: f64) -> f64 {
    kelvin * K_B_EV_PER_K / HBAR_C_EV_NM
}
