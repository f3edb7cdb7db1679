//! Rayleigh plane-wave basis, reflection matrices of flat interfaces and the
//! translation that moves a reflection matrix onto the upper body.
//!
//! Waves are labelled by their diffraction order `n`, with in-plane momentum
//! `(αₙ, k_y)`, `αₙ = k_x + 2πn/d`, and decay constant `κₙ = √(ξ² + k_y² + αₙ²)`
//! at imaginary frequency `iξ`. Each order carries two amplitudes, the field
//! components along the grooves, `E_y` and `B_y`. Matrices are laid out as
//! `[E block; B block]`, orders `-J..=J` inside each block.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::reflection::Reflector;

/// Plane-wave basis truncated to diffraction orders `-J..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighBasis {
    order: usize,
    period: f64,
    kx: f64,
    ky: f64,
    frequency: f64,
    alphas: Vec<f64>,
    kappas: Vec<f64>,
}

impl RayleighBasis {
    pub fn new(order: usize, period: f64, kx: f64, ky: f64, frequency: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period must be > 0, got {period}")));
        }
        if !(frequency >= 0.0 && frequency.is_finite()) {
            return Err(Error::InvalidInput(format!("frequency must be >= 0, got {frequency}")));
        }
        if !(kx.abs() <= PI / period * (1.0 + 1e-12)) || !ky.is_finite() {
            return Err(Error::InvalidInput(format!("k_x = {kx} lies outside the Brillouin zone")));
        }
        let j = order as i64;
        let alphas: Vec<f64> = (-j..=j).map(|n| kx + 2.0 * PI * n as f64 / period).collect();
        let kappas: Vec<f64> = alphas.iter().map(|a| (frequency * frequency + ky * ky + a * a).sqrt()).collect();
        if kappas.iter().any(|&k| k == 0.0) {
            return Err(Error::DegeneratePoint);
        }
        Ok(Self { order, period, kx, ky, frequency, alphas, kappas })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn kx(&self) -> f64 {
        self.kx
    }

    pub fn ky(&self) -> f64 {
        self.ky
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Number of diffraction orders, `2J + 1`.
    pub fn modes(&self) -> usize {
        2 * self.order + 1
    }

    /// Matrix dimension, `2(2J + 1)`.
    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    /// Diffraction order of mode index `i` in `0..modes()`.
    pub fn diffraction_order(&self, i: usize) -> i64 {
        i as i64 - self.order as i64
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn min_kappa(&self) -> f64 {
        self.kappas.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Reflection matrix of a body filling the half-space below a reference
/// plane, mapping downward (incident) amplitudes on that plane to upward
/// (reflected) ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    pub entries: DMatrix<Complex64>,
    /// Height of the plane on which amplitudes are referenced, measured from
    /// the bottom of the body's corrugation.
    pub reference_height: f64,
}

/// Flat interface: each order reflects independently. The per-order
/// `(TE, TM)` coefficients are rotated into the `(E_y, B_y)` frame.
pub fn flat_reflection_matrix(surface: &dyn Reflector, basis: &RayleighBasis) -> Result<ScatteringMatrix> {
    let modes = basis.modes();
    let xi = basis.frequency();
    let ky = basis.ky();
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    for i in 0..modes {
        let alpha = basis.alphas()[i];
        let kappa = basis.kappas()[i];
        let r = surface.reflection(xi, alpha.hypot(ky))?;
        let [[ee, eb], [be, bb]] = flat_block(r.te, r.tm, alpha, ky, xi, kappa);
        m[(i, i)] = Complex64::from(ee);
        m[(i, modes + i)] = Complex64::from(eb);
        m[(modes + i, i)] = Complex64::from(be);
        m[(modes + i, modes + i)] = Complex64::from(bb);
    }
    Ok(ScatteringMatrix { entries: m, reference_height: 0.0 })
}

/// `(E_y, B_y)` block of one order: `V diag(r_TE, r_TM) V` with `V` the
/// rotation by the angle `θ`, `cos θ ∝ αξ`, `sin θ ∝ κk_y`.
pub(crate) fn flat_block(te: f64, tm: f64, alpha: f64, ky: f64, xi: f64, kappa: f64) -> [[f64; 2]; 2] {
    let c = alpha * xi;
    let s = kappa * ky;
    let norm = c * c + s * s;
    if norm == 0.0 {
        // normal incidence at k_y = 0: the frames coincide
        return [[te, 0.0], [0.0, tm]];
    }
    let (c2, s2, cs) = (c * c / norm, s * s / norm, c * s / norm);
    [[c2 * te - s2 * tm, cs * (te + tm)], [-cs * (te + tm), c2 * tm - s2 * te]]
}

/// Moves a reflection matrix of the second body, computed as if it faced
/// upward, onto the upper side of a gap of width `gap` and shifts it
/// laterally by `shift`.
///
/// Result: `P Q*(s) K(gap) R K(gap) Q(s) P`, where `K` propagates each order
/// across the gap, `Q` carries the phases `e^{2πins/d}`, and `P = diag(I, -I)`
/// flips the sign of `B_y`, which is odd under the mirror `z → -z`.
pub fn transform_up(r2: &ScatteringMatrix, basis: &RayleighBasis, gap: f64, shift: f64) -> ScatteringMatrix {
    let modes = basis.modes();
    let d = basis.period();
    let factor: Vec<Complex64> = (0..basis.dim())
        .map(|i| {
            let mode = i % modes;
            let damping = (-gap * basis.kappas()[mode]).exp();
            let phase = 2.0 * PI * basis.diffraction_order(mode) as f64 * shift / d;
            let parity = if i < modes { 1.0 } else { -1.0 };
            Complex64::from_polar(parity * damping, phase)
        })
        .collect();
    let entries = DMatrix::from_fn(basis.dim(), basis.dim(), |i, j| factor[i].conj() * r2.entries[(i, j)] * factor[j]);
    ScatteringMatrix { entries, reference_height: r2.reference_height }
}

/// Field components transverse to the grooves of a single plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseFields {
    pub ex: Complex64,
    pub ez: Complex64,
    pub bx: Complex64,
    pub bz: Complex64,
}

/// Reconstructs `(E_x, E_z, B_x, B_z)` of a plane wave `e^{i(αx + k_y y + k_z z - ωt)}`
/// from its `E_y` and `B_y` amplitudes (units with `c = 1`):
///
/// `γ² E_x = ω k_z B_y - α k_y E_y`, `γ² E_z = -(ωα B_y + k_z k_y E_y)`,
/// `ω B_x = k_y E_z - k_z E_y`, `ω B_z = α E_y - k_y E_x`, with `γ² = ω² - k_y²`.
///
/// On the imaginary axis pass `ω = iξ` and `k_z = ∓iκ` for waves growing or
/// decaying with height.
pub fn transverse_fields(ey: Complex64, by: Complex64, omega: Complex64, alpha: f64, ky: f64, kz: Complex64) -> TransverseFields {
    let gamma2 = omega * omega - ky * ky;
    let ex = (omega * kz * by - alpha * ky * ey) / gamma2;
    let ez = -(omega * alpha * by + kz * ky * ey) / gamma2;
    let bx = (ky * ez - kz * ey) / omega;
    let bz = (alpha * ey - ky * ex) / omega;
    TransverseFields { ex, ez, bx, bz }
}
