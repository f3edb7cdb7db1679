//! Plane–plane Casimir energy and free energy from reflection coefficients.
//!
//! The radial momentum integral is written in the gap variable
//! `u = 2a√(ω² + k²)`, shifted to `t = u - 2aω` so that every Matsubara term
//! is an integral over `[0, ∞)` with an `e^{-t}` kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_semi_infinite, matsubara_sum, MatsubaraConfig, MatsubaraSum, Tolerance};
use crate::reflection::{ReflectionPair, Reflector, Surface};

/// Riemann ζ(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_2;

/// Two parallel half-spaces (or layers) separated by a vacuum gap.
#[derive(Debug, Clone)]
pub struct PlanePlaneScene {
    pub side1: Surface,
    pub side2: Surface,
    pub separation: f64,
    pub temperature: f64,
}

impl PlanePlaneScene {
    pub fn new(side1: Surface, side2: Surface, separation: f64, temperature: f64) -> Result<Self> {
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::InvalidInput(format!("separation must be > 0, got {separation}")));
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidInput(format!("temperature must be >= 0, got {temperature}")));
        }
        Ok(Self { side1, side2, separation, temperature })
    }

    pub fn with_separation(&self, separation: f64) -> Self {
        Self { separation, ..self.clone() }
    }
}

/// Accuracy and work limits shared by the plane–plane routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifshitzOptions {
    pub tolerance: Tolerance,
    pub max_terms: usize,
}

impl Default for LifshitzOptions {
    fn default() -> Self {
        Self { tolerance: Tolerance::new(1e-9, 0.0).unwrap(), max_terms: 200_000 }
    }
}

/// Contributions of the two polarizations to one quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationSplit {
    pub te: f64,
    pub tm: f64,
}

impl PolarizationSplit {
    pub fn total(&self) -> f64 {
        self.te + self.tm
    }
}

/// `ln(1 - e^{-u} r₁ r₂)`, computed as `ln_1p` of a small argument.
#[inline]
fn round_trip_log(decay: f64, r1: f64, r2: f64) -> f64 {
    (-decay * r1 * r2).ln_1p()
}

/// Integrand of the radial integral in the shifted gap variable, split by polarization.
fn radial_log(scene: &PlanePlaneScene, omega: f64, t: f64) -> Result<PolarizationSplit> {
    let a = scene.separation;
    let u0 = 2.0 * a * omega;
    let k = (t * (t + 2.0 * u0)).sqrt() / (2.0 * a);
    let decay = (-(t + u0)).exp();
    if decay == 0.0 {
        return Ok(PolarizationSplit { te: 0.0, tm: 0.0 });
    }
    let r1 = scene.side1.reflection(omega, k)?;
    let r2 = scene.side2.reflection(omega, k)?;
    let weight = t + u0;
    Ok(PolarizationSplit {
        te: weight * round_trip_log(decay, r1.te, r2.te),
        tm: weight * round_trip_log(decay, r1.tm, r2.tm),
    })
}

/// Runs a fallible integrand through the infallible quadrature interface,
/// returning the first model error if one occurred.
fn guarded_semi_infinite<F>(mut f: F, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let est = integrate_semi_infinite(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est?.value)
}

/// `(1/2π)∫ k dk ln(...)` at imaginary frequency `ω`, per polarization.
pub fn matsubara_term_split(scene: &PlanePlaneScene, omega: f64, tol: Tolerance) -> Result<PolarizationSplit> {
    let prefactor = 1.0 / (8.0 * PI * scene.separation * scene.separation);
    let te = guarded_semi_infinite(|t| radial_log(scene, omega, t).map(|s| s.te), tol)?;
    let tm = guarded_semi_infinite(|t| radial_log(scene, omega, t).map(|s| s.tm), tol)?;
    Ok(PolarizationSplit { te: prefactor * te, tm: prefactor * tm })
}

/// `(1/2π)∫ k dk [ln(...)_TE + ln(...)_TM]` at imaginary frequency `ω`.
pub fn matsubara_term(scene: &PlanePlaneScene, omega: f64, tol: Tolerance) -> Result<f64> {
    let prefactor = 1.0 / (8.0 * PI * scene.separation * scene.separation);
    let v = guarded_semi_infinite(|t| radial_log(scene, omega, t).map(|s| s.total()), tol)?;
    Ok(prefactor * v)
}

/// Free energy per unit area at `T > 0` as a Matsubara sum.
pub fn free_energy_per_area(scene: &PlanePlaneScene, opts: &LifshitzOptions) -> Result<MatsubaraSum> {
    if scene.temperature <= 0.0 {
        return Err(Error::InvalidInput("free_energy_per_area needs T > 0; use energy_per_area_t0".into()));
    }
    let cfg = MatsubaraConfig::new(scene.temperature, opts.tolerance, opts.max_terms)?;
    let inner = opts.tolerance.tightened(0.1);
    let sum = matsubara_sum(|n| matsubara_term(scene, cfg.frequency(n), inner), &cfg)?;
    let t = scene.temperature;
    Ok(MatsubaraSum { value: t * sum.value, tail: t * sum.tail, terms: sum.terms })
}

/// The `n = 0` Matsubara contribution to the free energy (including its
/// half weight), split by polarization.
pub fn zero_frequency_terms(scene: &PlanePlaneScene, opts: &LifshitzOptions) -> Result<PolarizationSplit> {
    if scene.temperature <= 0.0 {
        return Err(Error::InvalidInput("zero-frequency term needs T > 0".into()));
    }
    let s = matsubara_term_split(scene, 0.0, opts.tolerance.tightened(0.1))?;
    let w = 0.5 * scene.temperature;
    Ok(PolarizationSplit { te: w * s.te, tm: w * s.tm })
}

/// Casimir energy per unit area at zero temperature.
pub fn energy_per_area_t0(scene: &PlanePlaneScene, opts: &LifshitzOptions) -> Result<f64> {
    let a = scene.separation;
    let inner = opts.tolerance.tightened(0.01);
    // ω = u₀/(2a): dω k dk → du₀ (t + u₀) dt / (8a³)
    let outer = guarded_semi_infinite(
        |u0| guarded_semi_infinite(|t| radial_log(scene, u0 / (2.0 * a), t).map(|s| s.total()), inner),
        opts.tolerance,
    )?;
    Ok(outer / (32.0 * PI * PI * a * a * a))
}

/// Energy (T = 0) or free energy (T > 0), whichever applies to the scene.
pub fn energy_or_free_energy(scene: &PlanePlaneScene, opts: &LifshitzOptions) -> Result<f64> {
    if scene.temperature == 0.0 {
        energy_per_area_t0(scene, opts)
    } else {
        free_energy_per_area(scene, opts).map(|s| s.value)
    }
}

/// Pressure `-∂F/∂a` by a central difference with step `10⁻³a` and one
/// Richardson extrapolation. Negative values mean attraction.
pub fn pressure(scene: &PlanePlaneScene, opts: &LifshitzOptions) -> Result<f64> {
    let a = scene.separation;
    let h = 1e-3 * a;
    let tight = LifshitzOptions { tolerance: opts.tolerance.tightened(1e-2), ..*opts };
    let f = |x: f64| energy_or_free_energy(&scene.with_separation(x), &tight);
    let coarse = -(f(a + h)? - f(a - h)?) / (2.0 * h);
    let fine = -(f(a + 0.5 * h)? - f(a - 0.5 * h)?) / h;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// High-temperature limit for ideal conductors, `-Tζ(3)/(8πa²)`.
pub fn asymptote_ideal_high_t(separation: f64, temperature: f64) -> f64 {
    -temperature * ZETA3 / (8.0 * PI * separation * separation)
}

/// High-temperature limits of the TM and TE free energies for a graphene
/// sheet facing an ideal metal.
pub fn asymptote_graphene_metal_high_t(
    separation: f64,
    temperature: f64,
    alpha: f64,
    species: u32,
    fermi_velocity: f64,
) -> PolarizationSplit {
    let a = separation;
    PolarizationSplit {
        tm: 0.5 * asymptote_ideal_high_t(a, temperature),
        te: -alpha * species as f64 * fermi_velocity * fermi_velocity / (192.0 * PI * a * a * a),
    }
}

/// Convenience: both sides share the same reflection coefficients everywhere.
pub fn fixed_scene(r: ReflectionPair, separation: f64, temperature: f64) -> Result<PlanePlaneScene> {
    PlanePlaneScene::new(Surface::Fixed(r), Surface::Fixed(r), separation, temperature)
}
