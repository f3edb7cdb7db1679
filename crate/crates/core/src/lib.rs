//! Casimir and Casimir–Polder interactions from scattering data on the
//! imaginary frequency axis.
//!
//! All quantities are in natural units (ħ = c = k_B = 1). Energies,
//! frequencies, momenta and temperatures share one unit; lengths are its
//! inverse. Energies per area therefore carry units of energy³.

pub mod casimir_polder;
pub mod error;
pub mod gratings;
pub mod lifshitz;
pub mod materials;
pub mod quadrature;
pub mod reflection;

pub use error::{Error, Result};
