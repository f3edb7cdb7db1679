//! Reflection matrix of a perfectly conducting corrugated surface by
//! Rayleigh point matching.
//!
//! On a perfect conductor `z = g(x)` that is uniform along `y`, the boundary
//! conditions split: `E_y` vanishes on the surface, and once it does the other
//! tangential component of `E` reduces to the normal derivative of `B_y`. The
//! two scalar problems (Dirichlet for `E_y`, Neumann for `B_y`) are solved
//! separately, so the reflection matrix has no `E`–`B` coupling.
//!
//! Amplitudes are referenced to the plane `z = h` at the crests. Each problem
//! is an overdetermined collocation system, equilibrated by rows and columns
//! and solved in the least-squares sense by SVD. The incident orders `-J..=J`
//! scatter into higher orders as well, so the system carries extra orders
//! internally until the boundary residual of every retained column is below
//! tolerance; the result is then truncated back to `-J..=J`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{RayleighBasis, ScatteringMatrix};
use crate::error::{Error, Result};

/// Height function returning `(g(x), g'(x))`.
pub type ProfileFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub enum ProfileShape {
    /// `g(x) = (h/2)(1 - cos 2πx/d)`.
    Sinusoid,
    /// Symmetric triangle wave with troughs at `x = 0, d` and crest at `d/2`.
    Triangle,
    /// User-supplied `(g, g')` with `0 ≤ g ≤ h`, periodic in `d`.
    Custom(ProfileFn),
}

impl fmt::Debug for ProfileShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sinusoid => f.write_str("Sinusoid"),
            Self::Triangle => f.write_str("Triangle"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A perfectly conducting body below `z = g(x)`, `0 ≤ g ≤ depth`.
#[derive(Debug, Clone)]
pub struct PcProfile {
    pub shape: ProfileShape,
    pub depth: f64,
    pub period: f64,
}

impl PcProfile {
    pub fn new(shape: ProfileShape, depth: f64, period: f64) -> Result<Self> {
        if !(depth >= 0.0 && depth.is_finite()) {
            return Err(Error::InvalidInput(format!("corrugation depth must be >= 0, got {depth}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period must be > 0, got {period}")));
        }
        let p = Self { shape, depth, period };
        if let ProfileShape::Custom(_) = p.shape {
            for i in 0..256 {
                let (g, dg) = p.height(period * i as f64 / 256.0);
                if !(g >= -1e-12 * depth.max(1.0) && g <= depth * (1.0 + 1e-12) && dg.is_finite()) {
                    return Err(Error::InvalidInput(format!("custom profile leaves [0, h] at sample {i}: g = {g}")));
                }
            }
        }
        Ok(p)
    }

    pub fn sinusoid(depth: f64, period: f64) -> Result<Self> {
        Self::new(ProfileShape::Sinusoid, depth, period)
    }

    pub fn triangle(depth: f64, period: f64) -> Result<Self> {
        Self::new(ProfileShape::Triangle, depth, period)
    }

    /// `(g(x), g'(x))`.
    pub fn height(&self, x: f64) -> (f64, f64) {
        let (h, d) = (self.depth, self.period);
        match &self.shape {
            ProfileShape::Sinusoid => {
                let phase = 2.0 * PI * x / d;
                (0.5 * h * (1.0 - phase.cos()), PI * h / d * phase.sin())
            }
            ProfileShape::Triangle => {
                let t = (x / d).rem_euclid(1.0);
                if t < 0.5 {
                    (2.0 * h * t, 2.0 * h / d)
                } else {
                    (2.0 * h * (1.0 - t), -2.0 * h / d)
                }
            }
            ProfileShape::Custom(f) => f(x.rem_euclid(d)),
        }
    }

    /// True when both describe the same surface, so one reflection matrix serves both.
    pub fn same_as(&self, other: &Self) -> bool {
        let shape = match (&self.shape, &other.shape) {
            (ProfileShape::Sinusoid, ProfileShape::Sinusoid) | (ProfileShape::Triangle, ProfileShape::Triangle) => true,
            (ProfileShape::Custom(a), ProfileShape::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        };
        shape && self.depth == other.depth && self.period == other.period
    }
}

/// Limits applied to the collocation solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationLimits {
    pub max_condition: f64,
    pub residual_tolerance: f64,
    /// Largest number of extra diffraction orders carried internally beyond `J`.
    pub max_padding: usize,
}

impl Default for CollocationLimits {
    fn default() -> Self {
        Self { max_condition: 1e12, residual_tolerance: 1e-6, max_padding: 48 }
    }
}

/// Which scalar boundary problem to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Boundary {
    /// `E_y = 0` on the surface.
    Dirichlet,
    /// `(∂_z - g' ∂_x) B_y = 0` on the surface.
    Neumann,
}

/// Value (Dirichlet) or normal derivative (Neumann) of the wave
/// `e^{2πinx/d} e^{±κ(z - h)}` on the surface at `x`; `sign = +1` grows upward.
fn wave_on_surface(boundary: Boundary, basis: &RayleighBasis, profile: &PcProfile, mode: usize, sign: f64, x: f64) -> Complex64 {
    let (g, dg) = profile.height(x);
    let kappa = basis.kappas()[mode];
    let alpha = basis.alphas()[mode];
    let n = basis.diffraction_order(mode) as f64;
    let wave = Complex64::from_polar((sign * kappa * (g - profile.depth)).exp(), 2.0 * PI * n * x / profile.period);
    match boundary {
        Boundary::Dirichlet => wave,
        Boundary::Neumann => wave * Complex64::new(sign * kappa, -dg * alpha),
    }
}

/// Outgoing-wave matrix `A[j, n]` over all orders and incident right-hand
/// sides `B[j, m]` for the orders listed in `incident`, at the points `xs`.
fn assemble(
    boundary: Boundary,
    basis: &RayleighBasis,
    profile: &PcProfile,
    xs: &[f64],
    incident: &[usize],
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let a = DMatrix::from_fn(xs.len(), basis.modes(), |j, n| wave_on_surface(boundary, basis, profile, n, -1.0, xs[j]));
    let b = DMatrix::from_fn(xs.len(), incident.len(), |j, m| -wave_on_surface(boundary, basis, profile, incident[m], 1.0, xs[j]));
    (a, b)
}

fn uniform_points(count: usize, period: f64) -> Vec<f64> {
    (0..count).map(|j| (j as f64 + 0.5) * period / count as f64).collect()
}

/// Solves one scalar problem in `basis` for incident orders `incident`;
/// returns reflected amplitudes (all orders × incident) and the boundary residual.
fn solve_padded(
    boundary: Boundary,
    basis: &RayleighBasis,
    profile: &PcProfile,
    incident: &[usize],
    limits: &CollocationLimits,
) -> Result<(DMatrix<Complex64>, f64)> {
    let modes = basis.modes();
    let xs = uniform_points(4 * modes, profile.period);
    let (mut a, mut b) = assemble(boundary, basis, profile, &xs, incident);

    for j in 0..a.nrows() {
        let scale = a.row(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            a.row_mut(j).scale_mut(1.0 / scale);
            b.row_mut(j).scale_mut(1.0 / scale);
        }
    }
    let col_scale: Vec<f64> = (0..modes).map(|n| 1.0 / a.column(n).norm()).collect();
    for (n, s) in col_scale.iter().enumerate() {
        a.column_mut(n).scale_mut(*s);
    }

    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= limits.max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    let mut r = svd.solve(&b, 0.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    for (n, s) in col_scale.iter().enumerate() {
        r.row_mut(n).scale_mut(*s);
    }
    let residual = boundary_residual(boundary, basis, profile, incident, &r);
    Ok((r, residual))
}

/// Largest boundary residual at test points four times denser than the
/// collocation grid, relative to the largest incident value, over the
/// incident orders.
fn boundary_residual(boundary: Boundary, basis: &RayleighBasis, profile: &PcProfile, incident: &[usize], r: &DMatrix<Complex64>) -> f64 {
    let xs = uniform_points(16 * basis.modes(), profile.period);
    let (a, b) = assemble(boundary, basis, profile, &xs, incident);
    let miss = &a * r - &b;
    (0..b.ncols())
        .map(|m| {
            let incident = b.column(m).iter().map(|z| z.norm()).fold(0.0, f64::max);
            miss.column(m).iter().map(|z| z.norm()).fold(0.0, f64::max) / incident
        })
        .fold(0.0, f64::max)
}

/// Extra orders to start from: deeper profiles couple more orders.
fn initial_padding(profile: &PcProfile) -> usize {
    4 + (150.0 * profile.depth / profile.period).ceil() as usize
}

/// Solves one scalar problem for the orders of `basis`, carrying extra
/// orders internally until every retained column meets the residual
/// tolerance. Returns the `(2J+1)²` block and its residual.
pub(crate) fn solve_block(
    boundary: Boundary,
    basis: &RayleighBasis,
    profile: &PcProfile,
    limits: &CollocationLimits,
) -> Result<(DMatrix<Complex64>, f64)> {
    let j = basis.order();
    let modes = basis.modes();
    if profile.depth == 0.0 {
        let sign = if boundary == Boundary::Dirichlet { -1.0 } else { 1.0 };
        return Ok((DMatrix::from_diagonal_element(modes, modes, Complex64::from(sign)), 0.0));
    }
    let mut pad = initial_padding(profile).min(limits.max_padding);
    loop {
        let wide = RayleighBasis::new(j + pad, basis.period(), basis.kx(), basis.ky(), basis.frequency())?;
        let incident: Vec<usize> = (pad..pad + modes).collect();
        let (r, residual) = solve_padded(boundary, &wide, profile, &incident, limits)?;
        if residual <= limits.residual_tolerance {
            return Ok((r.rows(pad, modes).into_owned(), residual));
        }
        if pad >= limits.max_padding {
            return Err(Error::ResidualTooLarge { residual, tolerance: limits.residual_tolerance });
        }
        pad = (pad + 4).min(limits.max_padding);
    }
}

/// Reflection matrix of a perfectly conducting profile, referenced at its crests.
pub fn pc_profile_reflection_matrix(profile: &PcProfile, basis: &RayleighBasis, limits: &CollocationLimits) -> Result<ScatteringMatrix> {
    if (profile.period - basis.period()).abs() > 1e-12 * profile.period {
        return Err(Error::InvalidInput("profile and basis periods differ".into()));
    }
    let modes = basis.modes();
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    let (e, _) = solve_block(Boundary::Dirichlet, basis, profile, limits)?;
    let (b, _) = solve_block(Boundary::Neumann, basis, profile, limits)?;
    m.view_mut((0, 0), (modes, modes)).copy_from(&e);
    m.view_mut((modes, modes), (modes, modes)).copy_from(&b);
    Ok(ScatteringMatrix { entries: m, reference_height: profile.depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gratings::basis::{flat_reflection_matrix, transverse_fields};
    use crate::reflection::Surface;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn zero_depth_is_ideal_mirror() {
        let profile = PcProfile::sinusoid(0.0, 1.0).unwrap();
        for xi in [0.0, 1.3] {
            let basis = RayleighBasis::new(4, 1.0, 0.7, 0.4, xi).unwrap();
            let pc = pc_profile_reflection_matrix(&profile, &basis, &CollocationLimits::default()).unwrap();
            let flat = flat_reflection_matrix(&Surface::ideal(), &basis).unwrap();
            let diff = (&pc.entries - &flat.entries).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "xi {xi}: {diff}");
        }
    }

    #[test]
    fn mode_coupling_is_linear_in_depth() {
        // off-diagonal amplitude = a h + b h² + ..., so the slope e(h)/h has a
        // first-order error that halves with h
        let basis = RayleighBasis::new(4, 1.0, 0.3, 0.5, 0.8).unwrap();
        let limits = CollocationLimits::default();
        let slope = |h: f64| {
            let r = pc_profile_reflection_matrix(&PcProfile::sinusoid(h, 1.0).unwrap(), &basis, &limits).unwrap();
            (r.entries[(4, 5)] / h, r.entries[(13, 14)] / h)
        };
        let (e4, b4) = slope(0.004);
        let (e2, b2) = slope(0.002);
        let (e1, b1) = slope(0.001);
        assert!(e1.norm() > 1.0 && b1.norm() > 1.0, "{e1} {b1}");
        let ratio_e = (e4 - e2).norm() / (e2 - e1).norm();
        let ratio_b = (b4 - b2).norm() / (b2 - b1).norm();
        assert!((ratio_e - 2.0).abs() < 0.1, "{ratio_e}");
        assert!((ratio_b - 2.0).abs() < 0.1, "{ratio_b}");
    }

    #[test]
    fn solved_fields_satisfy_full_boundary_condition() {
        // orders near the centre of a wide basis lose nothing to truncation
        let profile = PcProfile::sinusoid(0.04, 1.0).unwrap();
        let basis = RayleighBasis::new(16, 1.0, -0.4, 0.9, 1.1).unwrap();
        let r = pc_profile_reflection_matrix(&profile, &basis, &CollocationLimits::default()).unwrap();
        let modes = basis.modes();
        let omega = I * basis.frequency();
        // tangential E along (1, 0, g') for each incident column, E and B polarizations
        for col in [14, 16, 17, modes + 15, modes + 16, modes + 18] {
            let mut worst: f64 = 0.0;
            for j in 0..97 {
                let x = (j as f64 + 0.3) / 97.0;
                let (g, dg) = profile.height(x);
                let mut ey = Complex64::new(0.0, 0.0);
                let mut et = Complex64::new(0.0, 0.0);
                let mut add = |amp_e: Complex64, amp_b: Complex64, mode: usize, sign: f64| {
                    let alpha = basis.alphas()[mode];
                    let kappa = basis.kappas()[mode];
                    let w = Complex64::from_polar((sign * kappa * (g - profile.depth)).exp(), alpha * x);
                    let f = transverse_fields(amp_e, amp_b, omega, alpha, basis.ky(), -sign * I * kappa);
                    ey += amp_e * w;
                    et += (f.ex + dg * f.ez) * w;
                };
                let inc = col % modes;
                if col < modes {
                    add(Complex64::from(1.0), Complex64::from(0.0), inc, 1.0);
                } else {
                    add(Complex64::from(0.0), Complex64::from(1.0), inc, 1.0);
                }
                for n in 0..modes {
                    add(r.entries[(n, col)], r.entries[(modes + n, col)], n, -1.0);
                }
                worst = worst.max(ey.norm()).max(et.norm());
            }
            assert!(worst < 1e-6, "column {col}: {worst}");
        }
    }

    #[test]
    fn deep_profile_is_refused() {
        let profile = PcProfile::sinusoid(1.5, 1.0).unwrap();
        let basis = RayleighBasis::new(8, 1.0, 0.1, 0.2, 0.5).unwrap();
        let err = pc_profile_reflection_matrix(&profile, &basis, &CollocationLimits::default()).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { .. } | Error::ResidualTooLarge { .. }), "{err:?}");
    }

    #[test]
    fn custom_profile_validation() {
        let f: ProfileFn = Arc::new(|x: f64| (0.2 * (2.0 * PI * x).sin(), 0.0));
        assert!(PcProfile::new(ProfileShape::Custom(f), 0.2, 1.0).is_err());
        let g: ProfileFn = Arc::new(|x: f64| (0.02 * (1.0 - (2.0 * PI * x).cos()), 0.04 * PI * (2.0 * PI * x).sin()));
        let custom = PcProfile::new(ProfileShape::Custom(g), 0.04, 1.0).unwrap();
        let sine = PcProfile::sinusoid(0.04, 1.0).unwrap();
        let basis = RayleighBasis::new(3, 1.0, 0.2, 0.3, 0.4).unwrap();
        let limits = CollocationLimits::default();
        let a = pc_profile_reflection_matrix(&custom, &basis, &limits).unwrap();
        let b = pc_profile_reflection_matrix(&sine, &basis, &limits).unwrap();
        assert!((&a.entries - &b.entries).iter().all(|z| z.norm() < 1e-12));
    }
}
