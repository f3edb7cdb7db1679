//! Casimir–Polder energy of a ground-state atom above a planar surface.
//!
//! Three routes are provided: the closed single integral for a perfectly
//! conducting plane, the double integral over `(ω, k)` with general reflection
//! coefficients, and the same double integral assembled from the atom's
//! polarization tensor contracted with the reflected photon propagator.
//! Integrals run over `u₀ = 2aω` and `t = 2a√(ω²+k²) - u₀`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::materials::Polarizability;
use crate::quadrature::{integrate_semi_infinite, Tolerance};
use crate::reflection::{ReflectionPair, Reflector, Surface};

#[derive(Debug, Clone)]
pub struct AtomScene {
    pub polarizability: Polarizability,
    pub distance: f64,
    pub surface: Surface,
}

impl AtomScene {
    pub fn new(polarizability: Polarizability, distance: f64, surface: Surface) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::InvalidInput(format!("atom-surface distance must be > 0, got {distance}")));
        }
        Ok(Self { polarizability, distance, surface })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpOptions {
    pub tolerance: Tolerance,
}

impl Default for CpOptions {
    fn default() -> Self {
        Self { tolerance: Tolerance::new(1e-11, 0.0).unwrap() }
    }
}

fn guarded<F>(mut f: F, tol: Tolerance) -> Result<f64>
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
    match failure {
        Some(e) => Err(e),
        None => Ok(est?.value),
    }
}

/// Energy above a perfectly conducting plane.
pub fn cp_energy_perfect_conductor(scene: &AtomScene, opts: &CpOptions) -> Result<f64> {
    if !scene.surface.is_ideal() {
        return Err(Error::InvalidInput("perfect-conductor formula needs an ideal surface".into()));
    }
    let a = scene.distance;
    let alpha = &scene.polarizability;
    // x = 2ωa
    let integral = integrate_semi_infinite(
        |x| {
            let w = x / (2.0 * a);
            let in_plane = alpha.xx.at(w) + alpha.yy.at(w);
            (in_plane * (x * x + x + 1.0) + 2.0 * alpha.zz.at(w) * (x + 1.0)) * (-x).exp()
        },
        opts.tolerance,
    )?;
    Ok(-integral.value / (128.0 * PI * PI * a.powi(4)))
}

/// Frequency and momentum at a point of the scaled integration domain.
fn point(a: f64, u0: f64, t: f64) -> (f64, f64) {
    (u0 / (2.0 * a), (t * (t + 2.0 * u0)).sqrt() / (2.0 * a))
}

/// Energy above a surface described by its reflection coefficients.
pub fn cp_energy_dielectric(scene: &AtomScene, opts: &CpOptions) -> Result<f64> {
    let a = scene.distance;
    let alpha = &scene.polarizability;
    let inner_tol = opts.tolerance.tightened(0.01);
    let integral = guarded(
        |u0| {
            let w = u0 / (2.0 * a);
            let in_plane = alpha.xx.at(w) + alpha.yy.at(w);
            let normal = alpha.zz.at(w);
            if in_plane == 0.0 && normal == 0.0 {
                return Ok(0.0);
            }
            guarded(
                |t| {
                    let (omega, k) = point(a, u0, t);
                    let r = scene.surface.reflection(omega, k)?;
                    let kk = t * (t + 2.0 * u0);
                    let xy = 0.25 * (u0 * u0 * (r.te - r.tm) - r.tm * kk);
                    let zz = -0.5 * r.tm * kk;
                    Ok((in_plane * xy + normal * zz) * (-(u0 + t)).exp())
                },
                inner_tol,
            )
        },
        opts.tolerance,
    )?;
    Ok(integral / (64.0 * PI * PI * a.powi(4)))
}

/// Reflected part of the photon propagator above the surface, in the
/// longitudinal (`ll`), transverse (`pp`) and normal (`zz`) channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorComponents {
    pub ll: f64,
    pub pp: f64,
    pub zz: f64,
}

/// Evaluates [`PropagatorComponents`] for a surface at a fixed atom distance.
#[derive(Debug, Clone)]
pub struct HalfSpacePropagator<'a> {
    pub surface: &'a Surface,
    pub distance: f64,
}

impl HalfSpacePropagator<'_> {
    pub fn at(&self, omega: f64, k: f64) -> Result<PropagatorComponents> {
        let r = self.surface.reflection(omega, k)?;
        Ok(Self::from_reflection(r, self.distance, omega, k))
    }

    pub fn from_reflection(r: ReflectionPair, distance: f64, omega: f64, k: f64) -> PropagatorComponents {
        let q = omega.hypot(k);
        let kernel = (-2.0 * distance * q).exp() / (4.0 * PI * PI);
        let w2 = omega * omega;
        PropagatorComponents {
            ll: -r.tm * q * kernel / (2.0 * w2),
            pp: r.te * kernel / (2.0 * q),
            zz: -r.tm * k * k * kernel / (2.0 * w2 * q),
        }
    }
}

/// Energy from the atomic polarization tensor contracted with the reflected
/// propagator. Requires equal in-plane polarizabilities.
pub fn cp_energy_via_propagators(scene: &AtomScene, opts: &CpOptions) -> Result<f64> {
    let alpha = &scene.polarizability;
    if !alpha.is_isotropic_in_plane() {
        return Err(Error::InvalidInput("propagator form needs alpha_xx = alpha_yy".into()));
    }
    let a = scene.distance;
    let prop = HalfSpacePropagator { surface: &scene.surface, distance: a };
    let inner_tol = opts.tolerance.tightened(0.01);
    // dω k dk = du₀ (t + u₀) dt / (8a³)
    let integral = guarded(
        |u0| {
            let w = u0 / (2.0 * a);
            let w2 = w * w;
            let (in_plane, normal) = (alpha.xx.at(w), alpha.zz.at(w));
            if in_plane == 0.0 && normal == 0.0 {
                return Ok(0.0);
            }
            guarded(
                |t| {
                    let (omega, k) = point(a, u0, t);
                    let d = prop.at(omega, k)?;
                    let contraction = in_plane * w2 * (d.ll + d.pp) + normal * w2 * d.zz;
                    Ok((t + u0) * contraction)
                },
                inner_tol,
            )
        },
        opts.tolerance,
    )?;
    Ok(integral / (8.0 * a * a * a))
}
