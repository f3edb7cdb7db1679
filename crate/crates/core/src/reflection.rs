//! Reflection coefficients of planar surfaces at imaginary frequency.
//!
//! Conventions: `q = √(ω² + k²)` is the vacuum decay constant, TE
//! coefficients are non-positive and TM coefficients non-negative for
//! passive media, and the ideal conductor reflects as `(-1, +1)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::materials::{DielectricModel, LayerPolarization, SuperconductorModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub te: f64,
    pub tm: f64,
}

impl ReflectionPair {
    pub const IDEAL: Self = Self { te: -1.0, tm: 1.0 };
    pub const NONE: Self = Self { te: 0.0, tm: 0.0 };
}

fn check_point(omega: f64, k: f64) -> Result<()> {
    if !(omega >= 0.0 && omega.is_finite() && k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("need omega >= 0 and k >= 0, got ({omega}, {k})")));
    }
    if omega == 0.0 && k == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    Ok(())
}

/// `(k - √(m² + k²)) / (k + √(m² + k²))` without cancellation.
fn screened_te(mass_sq: f64, k: f64) -> f64 {
    let root = (mass_sq + k * k).sqrt();
    -mass_sq / ((k + root) * (k + root))
}

/// Fresnel coefficients of a dielectric half-space.
pub fn fresnel(model: &DielectricModel, omega: f64, k: f64) -> Result<ReflectionPair> {
    check_point(omega, k)?;
    if omega == 0.0 {
        return Ok(match model {
            DielectricModel::IdealConductor => ReflectionPair::IDEAL,
            DielectricModel::Constant(eps) => static_dielectric(*eps),
            DielectricModel::Tabulated(t) => static_dielectric(t.static_value()),
            DielectricModel::Plasma { omega_p } => static_metal(*omega_p, true, k),
            DielectricModel::Drude { omega_p, gamma } => static_metal(*omega_p, *gamma == 0.0, k),
        });
    }
    if let DielectricModel::IdealConductor = model {
        return Ok(ReflectionPair::IDEAL);
    }
    let eps = model.epsilon_iw(omega)?;
    Ok(fresnel_from_eps(eps, omega, k))
}

/// Fresnel coefficients for a given `ε(iω)`, written so that `ε → 1`
/// gives an exact zero instead of a difference of nearly equal roots.
pub fn fresnel_from_eps(eps: f64, omega: f64, k: f64) -> ReflectionPair {
    let w2 = omega * omega;
    let k2 = k * k;
    let qv = (w2 + k2).sqrt();
    let qm = (eps * w2 + k2).sqrt();
    let d = eps - 1.0;
    let te = -d * w2 / ((qv + qm) * (qv + qm));
    let den = eps * qv + qm;
    let tm = d * (eps * w2 + (eps + 1.0) * k2) / (den * den);
    ReflectionPair { te, tm }
}

fn static_dielectric(eps: f64) -> ReflectionPair {
    ReflectionPair { te: 0.0, tm: (eps - 1.0) / (eps + 1.0) }
}

fn static_metal(omega_p: f64, dissipationless: bool, k: f64) -> ReflectionPair {
    if omega_p == 0.0 {
        return ReflectionPair::NONE;
    }
    let te = if dissipationless { screened_te(omega_p * omega_p, k) } else { 0.0 };
    ReflectionPair { te, tm: 1.0 }
}

/// Reflection off a two-dimensional layer from its in-plane longitudinal and
/// transverse polarization components.
///
/// `r_TE = Π_pp / (2q - Π_pp)`, `r_TM = X / (1 + X)` with `X = -q Π_ll / (2ω²)`.
/// The TM expression needs `ω > 0`; use [`layer_reflection_from_trace`] for the static term.
pub fn layer_reflection_from_components(pi_ll: f64, pi_pp: f64, omega: f64, k: f64) -> Result<ReflectionPair> {
    check_point(omega, k)?;
    if omega == 0.0 {
        return Err(Error::InvalidInput("longitudinal form is singular at omega = 0".into()));
    }
    let q = omega.hypot(k);
    let te = pi_pp / (2.0 * q - pi_pp);
    let x = -q * pi_ll / (2.0 * omega * omega);
    Ok(ReflectionPair { te, tm: x / (1.0 + x) })
}

/// Reflection off a two-dimensional layer from `Π₀₀` and `trΠ`.
pub fn layer_reflection_from_trace(pi00: f64, tr_pi: f64, omega: f64, k: f64) -> Result<ReflectionPair> {
    check_point(omega, k)?;
    Ok(trace_form(pi00, tr_pi - pi00, omega, k))
}

/// Trace form with `trΠ - Π₀₀` supplied directly; `k²trΠ - q²Π₀₀` is
/// rewritten as `k²(trΠ - Π₀₀) - ω²Π₀₀`.
fn trace_form(pi00: f64, excess: f64, omega: f64, k: f64) -> ReflectionPair {
    let q = omega.hypot(k);
    let k2 = k * k;
    let m = k2 * excess - omega * omega * pi00;
    let te = -m / (m + 2.0 * q * k2);
    let tm = q * pi00 / (q * pi00 + 2.0 * k2);
    ReflectionPair { te, tm }
}

/// Reflection off a layer described by a polarization operator.
pub fn layer_reflection(layer: &dyn LayerPolarization, omega: f64, k: f64) -> Result<ReflectionPair> {
    check_point(omega, k)?;
    if omega == 0.0 || k == 0.0 {
        return Ok(trace_form(layer.pi00(omega, k)?, layer.trace_excess(omega, k)?, omega, k));
    }
    layer_reflection_from_components(layer.pi_ll(omega, k)?, layer.pi_pp(omega, k)?, omega, k)
}

/// Static reflection of a superconductor: perfect TM screening and a TE
/// coefficient set by the effective photon mass.
pub fn superconductor_zero_freq(model: &SuperconductorModel, k: f64) -> Result<ReflectionPair> {
    check_point(0.0, k)?;
    Ok(ReflectionPair { te: screened_te(model.screening_mass_sq(), k), tm: 1.0 })
}

/// Anything that reflects at `(iω, k)`.
pub trait Reflector: Send + Sync {
    fn reflection(&self, omega: f64, k: f64) -> Result<ReflectionPair>;

    /// True when the surface reflects as an ideal conductor at every frequency.
    fn is_ideal(&self) -> bool {
        false
    }
}

/// A planar boundary of one of the supported kinds.
#[derive(Clone)]
pub enum Surface {
    Bulk(DielectricModel),
    Layer(Arc<dyn LayerPolarization>),
    /// Superconductor: the static term uses the screening model, nonzero
    /// frequencies use the normal-state permittivity.
    Superconductor { zero_mode: SuperconductorModel, normal: DielectricModel },
    /// Frequency and momentum independent coefficients.
    Fixed(ReflectionPair),
}

impl Surface {
    pub fn ideal() -> Self {
        Self::Bulk(DielectricModel::IdealConductor)
    }
}

impl fmt::Debug for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bulk(m) => f.debug_tuple("Bulk").field(m).finish(),
            Self::Layer(_) => f.write_str("Layer(..)"),
            Self::Superconductor { zero_mode, normal } => f
                .debug_struct("Superconductor")
                .field("zero_mode", zero_mode)
                .field("normal", normal)
                .finish(),
            Self::Fixed(r) => f.debug_tuple("Fixed").field(r).finish(),
        }
    }
}

impl Reflector for Surface {
    fn reflection(&self, omega: f64, k: f64) -> Result<ReflectionPair> {
        match self {
            Self::Bulk(m) => fresnel(m, omega, k),
            Self::Layer(layer) => layer_reflection(layer.as_ref(), omega, k),
            Self::Superconductor { zero_mode, normal } => {
                if omega == 0.0 {
                    superconductor_zero_freq(zero_mode, k)
                } else {
                    fresnel(normal, omega, k)
                }
            }
            Self::Fixed(r) => {
                check_point(omega, k)?;
                Ok(*r)
            }
        }
    }

    fn is_ideal(&self) -> bool {
        matches!(self, Self::Bulk(DielectricModel::IdealConductor)) || matches!(self, Self::Fixed(r) if *r == ReflectionPair::IDEAL)
    }
}
