//! Casimir free energy of two parallel one-dimensional gratings with a
//! common period, from reflection matrices in a Rayleigh plane-wave basis.
//!
//! The lower body faces up; the upper body is described by the reflection
//! matrix it would have facing up, mirrored and shifted by [`transform_up`].
//! Energies are Brillouin-zone integrals of `ln det(I - R₁ R₂↑)`.

mod basis;
mod collocation;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

pub use basis::{flat_reflection_matrix, transform_up, transverse_fields, RayleighBasis, ScatteringMatrix, TransverseFields};
pub use collocation::{pc_profile_reflection_matrix, CollocationLimits, PcProfile, ProfileFn, ProfileShape};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_semi_infinite, log_det_one_minus, matsubara_sum, spectral_radius, MatsubaraConfig, Tolerance};
use crate::reflection::Surface;

/// Surface of one grating.
#[derive(Debug, Clone)]
pub enum GratingProfile {
    /// Flat interface with the given reflection coefficients.
    Flat(Surface),
    /// Corrugated perfect conductor.
    PerfectConductor(PcProfile),
}

impl GratingProfile {
    /// Corrugation depth; zero for flat interfaces.
    pub fn depth(&self) -> f64 {
        match self {
            Self::Flat(_) => 0.0,
            Self::PerfectConductor(p) => p.depth,
        }
    }

    pub fn reflection_matrix(&self, basis: &RayleighBasis, limits: &CollocationLimits) -> Result<ScatteringMatrix> {
        match self {
            Self::Flat(s) => flat_reflection_matrix(s, basis),
            Self::PerfectConductor(p) => pc_profile_reflection_matrix(p, basis, limits),
        }
    }

    fn same_as(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::PerfectConductor(a), Self::PerfectConductor(b)) => a.same_as(b),
            _ => false,
        }
    }
}

/// Two gratings: the lower one's corrugation occupies `0 ≤ z ≤ h₁`, the
/// upper one's base plane sits at `z = L` and its corrugation hangs down to
/// `L - h₂`, shifted laterally by `s`.
///
/// The profiles and period are fixed at construction. Reflection matrices of
/// corrugated profiles depend on neither `L` nor `s`, so scenes derived with
/// [`GratingScene::with_shift`] or [`GratingScene::with_separation`] share a
/// cache of them.
#[derive(Debug, Clone)]
pub struct GratingScene {
    lower: GratingProfile,
    upper: GratingProfile,
    period: f64,
    pub separation: f64,
    pub shift: f64,
    pub temperature: f64,
    cache: Arc<MatrixCache>,
}

impl GratingScene {
    pub fn new(lower: GratingProfile, upper: GratingProfile, separation: f64, shift: f64, period: f64, temperature: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period must be > 0, got {period}")));
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidInput(format!("temperature must be >= 0, got {temperature}")));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidInput(format!("shift must be finite, got {shift}")));
        }
        for p in [&lower, &upper] {
            if let GratingProfile::PerfectConductor(pc) = p {
                if (pc.period - period).abs() > 1e-12 * period {
                    return Err(Error::InvalidInput(format!("profile period {} differs from grating period {period}", pc.period)));
                }
            }
        }
        let depths = lower.depth() + upper.depth();
        if !(separation > depths && separation.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "separation {separation} must exceed the summed corrugation depths {depths}"
            )));
        }
        Ok(Self { lower, upper, period, separation, shift, temperature, cache: Arc::default() })
    }

    pub fn lower(&self) -> &GratingProfile {
        &self.lower
    }

    pub fn upper(&self) -> &GratingProfile {
        &self.upper
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Width of the slab between the two crest planes.
    pub fn gap(&self) -> f64 {
        self.separation - self.lower.depth() - self.upper.depth()
    }

    pub fn with_shift(&self, shift: f64) -> Self {
        Self { shift, ..self.clone() }
    }

    pub fn with_separation(&self, separation: f64) -> Self {
        Self { separation, ..self.clone() }
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self { temperature, ..self.clone() }
    }

    /// Reflection matrices of both bodies (each facing up) at one node.
    fn reflection_pair(&self, basis: &RayleighBasis, limits: &CollocationLimits) -> Result<Arc<(ScatteringMatrix, ScatteringMatrix)>> {
        let cacheable = !matches!((&self.lower, &self.upper), (GratingProfile::Flat(_), GratingProfile::Flat(_)));
        let key = NodeKey::new(basis, limits);
        if cacheable {
            if let Some(hit) = self.cache.get(&key) {
                return Ok(hit);
            }
        }
        let r1 = self.lower.reflection_matrix(basis, limits)?;
        let r2 = if self.lower.same_as(&self.upper) { r1.clone() } else { self.upper.reflection_matrix(basis, limits)? };
        let pair = Arc::new((r1, r2));
        if cacheable {
            self.cache.insert(key, pair.clone(), basis.dim());
        }
        Ok(pair)
    }
}

/// Identifies a node exactly, including the solver limits that shaped the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct NodeKey([u64; 7]);

impl NodeKey {
    fn new(basis: &RayleighBasis, limits: &CollocationLimits) -> Self {
        Self([
            basis.order() as u64,
            basis.frequency().to_bits(),
            basis.kx().to_bits(),
            basis.ky().to_bits(),
            limits.max_condition.to_bits(),
            limits.residual_tolerance.to_bits(),
            limits.max_padding as u64,
        ])
    }
}

type MatrixPair = Arc<(ScatteringMatrix, ScatteringMatrix)>;

/// Bounded memo of reflection matrices; cleared wholesale when full.
#[derive(Debug, Default)]
struct MatrixCache {
    map: Mutex<HashMap<NodeKey, MatrixPair>>,
}

impl MatrixCache {
    /// Rough memory budget for cached entries.
    const BUDGET_BYTES: usize = 256 << 20;

    fn get(&self, key: &NodeKey) -> Option<MatrixPair> {
        self.map.lock().unwrap_or_else(|e| e.into_inner()).get(key).cloned()
    }

    fn insert(&self, key: NodeKey, value: MatrixPair, dim: usize) {
        let mut map = self.map.lock().unwrap_or_else(|e| e.into_inner());
        let capacity = Self::BUDGET_BYTES / (32 * dim * dim);
        if map.len() >= capacity {
            map.clear();
        }
        map.insert(key, value);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingOptions {
    pub tolerance: Tolerance,
    pub max_terms: usize,
    /// Initial Gauss–Legendre order on the half Brillouin zone.
    pub bz_nodes: usize,
    pub max_bz_nodes: usize,
    /// Largest truncation order tried during order refinement.
    pub max_order: usize,
    pub limits: CollocationLimits,
}

impl Default for GratingOptions {
    fn default() -> Self {
        Self {
            tolerance: Tolerance::new(1e-8, 0.0).unwrap(),
            max_terms: 10_000,
            bz_nodes: 16,
            max_bz_nodes: 256,
            max_order: 40,
            limits: CollocationLimits::default(),
        }
    }
}

/// A grating energy with the numerical parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingEnergy {
    pub value: f64,
    /// Truncation order `J` used.
    pub order: usize,
    /// Matsubara terms summed (zero at `T = 0`).
    pub terms: usize,
}

/// Nodes with `2κ_min gap` above this contribute `ln det < e^{-60}` and are skipped.
const NEGLIGIBLE_EXPONENT: f64 = 60.0;

/// `R₁` and `R₂↑` at one node.
fn round_trip(scene: &GratingScene, basis: &RayleighBasis, limits: &CollocationLimits) -> Result<DMatrix<Complex64>> {
    let pair = scene.reflection_pair(basis, limits)?;
    let (r1, r2) = (&pair.0, &pair.1);
    let gap = scene.separation - r1.reference_height - r2.reference_height;
    let r2up = transform_up(r2, basis, gap, scene.shift);
    Ok(product(&r1.entries, &r2up.entries))
}

/// Dense complex product, column by column. Much faster than the generic
/// product for the small matrices used here.
fn product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (n, inner, m) = (a.nrows(), a.ncols(), b.ncols());
    debug_assert_eq!(inner, b.nrows());
    let mut c = DMatrix::zeros(n, m);
    let a = a.as_slice();
    for j in 0..m {
        let out = &mut c.as_mut_slice()[j * n..(j + 1) * n];
        for k in 0..inner {
            let bkj = b[(k, j)];
            if bkj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(&a[k * n..(k + 1) * n]) {
                *o += x * bkj;
            }
        }
    }
    c
}

/// `ln det(I - R₁R₂↑)` at one `(ξ, k_x, k_y)` node.
pub fn log_det_at_node(scene: &GratingScene, order: usize, xi: f64, kx: f64, ky: f64, limits: &CollocationLimits) -> Result<f64> {
    let basis = RayleighBasis::new(order, scene.period, kx, ky, xi)?;
    if 2.0 * basis.min_kappa() * scene.gap() > NEGLIGIBLE_EXPONENT {
        return Ok(0.0);
    }
    log_det_one_minus(&round_trip(scene, &basis, limits)?)
}

/// Spectral radius of `R₁R₂↑` at one node.
pub fn spectral_radius_at_node(scene: &GratingScene, order: usize, xi: f64, kx: f64, ky: f64, limits: &CollocationLimits) -> Result<f64> {
    let basis = RayleighBasis::new(order, scene.period, kx, ky, xi)?;
    spectral_radius(&round_trip(scene, &basis, limits)?)
}

/// Quadrature rule on `[0, π/d]`: Gauss–Legendre in `u` with `k_x = (π/d)u³`.
///
/// At `ξ = 0` the order-zero mode has `κ = |k|`, whose cone point at the
/// origin makes the `k_y`-integrated integrand behave like `k_x² ln k_x`; the
/// cubic map smooths that out so the rule converges quickly.
fn half_zone_rule(nodes: usize, period: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(nodes);
    let edge = PI / period;
    x.iter()
        .zip(&w)
        .map(|(&x, &w)| {
            let u = 0.5 * (x + 1.0);
            (edge * u * u * u, 1.5 * edge * u * u * w)
        })
        .collect()
}

/// `∫₀^{π/d} dk_x ln det` on a fixed rule, nodes evaluated in parallel and
/// summed in node order.
fn zone_integral(scene: &GratingScene, order: usize, xi: f64, ky: f64, rule: &[(f64, f64)], limits: &CollocationLimits) -> Result<f64> {
    let values: Vec<Result<f64>> = rule
        .par_iter()
        .map(|&(kx, w)| log_det_at_node(scene, order, xi, kx, ky, limits).map(|v| w * v))
        .collect();
    values.into_iter().sum()
}

/// `∫₀^∞ dk_y ∫₀^{π/d} dk_x ln det` for one rule.
fn surface_integral(scene: &GratingScene, order: usize, xi: f64, rule: &[(f64, f64)], opts: &GratingOptions) -> Result<f64> {
    let scale = 0.5 / scene.gap();
    let mut failure = None;
    let est = integrate_semi_infinite(
        |x| match zone_integral(scene, order, xi, scale * x, rule, &opts.limits) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        opts.tolerance.tightened(0.1),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(scale * est?.value)
}

/// Surface integral at frequency `ξ`, doubling the zone rule until two
/// successive results agree.
pub fn frequency_integrand(scene: &GratingScene, order: usize, xi: f64, opts: &GratingOptions) -> Result<f64> {
    let mut nodes = opts.bz_nodes.max(2);
    let mut prev = surface_integral(scene, order, xi, &half_zone_rule(nodes, scene.period), opts)?;
    loop {
        nodes *= 2;
        let cur = surface_integral(scene, order, xi, &half_zone_rule(nodes, scene.period), opts)?;
        if (cur - prev).abs() <= opts.tolerance.bound(cur) {
            return Ok(cur);
        }
        if nodes >= opts.max_bz_nodes {
            return Err(Error::NonConvergence { what: "Brillouin-zone quadrature", estimate: cur, error: (cur - prev).abs() });
        }
        prev = cur;
    }
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidInput("truncation order J must be >= 1".into()));
    }
    Ok(())
}

/// Zero-temperature energy per unit area at a fixed truncation order.
pub fn grating_energy_t0_fixed_order(scene: &GratingScene, order: usize, opts: &GratingOptions) -> Result<GratingEnergy> {
    check_order(order)?;
    let scale = 0.5 / scene.gap();
    let mut failure = None;
    let est = integrate_semi_infinite(
        |y| match frequency_integrand(scene, order, scale * y, opts) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        opts.tolerance,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(GratingEnergy { value: scale * est?.value / (2.0 * PI.powi(3)), order, terms: 0 })
}

/// Free energy per unit area at `T > 0` and a fixed truncation order.
pub fn grating_free_energy_fixed_order(scene: &GratingScene, order: usize, opts: &GratingOptions) -> Result<GratingEnergy> {
    check_order(order)?;
    if scene.temperature <= 0.0 {
        return Err(Error::InvalidInput("grating free energy needs T > 0; use the zero-temperature energy".into()));
    }
    let cfg = MatsubaraConfig::new(scene.temperature, opts.tolerance, opts.max_terms)?;
    let sum = matsubara_sum(|n| frequency_integrand(scene, order, cfg.frequency(n), opts), &cfg)?;
    Ok(GratingEnergy { value: scene.temperature * sum.value / (PI * PI), order, terms: sum.terms })
}

/// Energy (T = 0) or free energy (T > 0) at a fixed truncation order.
pub fn grating_energy_fixed_order(scene: &GratingScene, order: usize, opts: &GratingOptions) -> Result<GratingEnergy> {
    if scene.temperature == 0.0 {
        grating_energy_t0_fixed_order(scene, order, opts)
    } else {
        grating_free_energy_fixed_order(scene, order, opts)
    }
}

/// Raises the truncation order from `order` in steps of two until the
/// result changes by less than the tolerance.
fn refine_order<F>(order: usize, opts: &GratingOptions, mut eval: F) -> Result<GratingEnergy>
where
    F: FnMut(usize) -> Result<GratingEnergy>,
{
    check_order(order)?;
    let mut prev = eval(order)?;
    let mut j = order + 2;
    while j <= opts.max_order {
        let cur = eval(j)?;
        if (cur.value - prev.value).abs() <= opts.tolerance.bound(cur.value) {
            return Ok(cur);
        }
        prev = cur;
        j += 2;
    }
    Err(Error::NonConvergence { what: "truncation order refinement", estimate: prev.value, error: f64::NAN })
}

/// Zero-temperature energy with truncation-order refinement starting at `order`.
pub fn grating_energy_t0(scene: &GratingScene, order: usize, opts: &GratingOptions) -> Result<GratingEnergy> {
    refine_order(order, opts, |j| grating_energy_t0_fixed_order(scene, j, opts))
}

/// Free energy with truncation-order refinement starting at `order`.
pub fn grating_free_energy(scene: &GratingScene, order: usize, opts: &GratingOptions) -> Result<GratingEnergy> {
    refine_order(order, opts, |j| grating_free_energy_fixed_order(scene, j, opts))
}

/// Lateral force per unit area `-∂F/∂s` at a fixed truncation order, by a
/// central difference with step `d/200` and one Richardson extrapolation.
pub fn lateral_force(scene: &GratingScene, order: usize, opts: &GratingOptions) -> Result<f64> {
    let h = scene.period / 200.0;
    let s = scene.shift;
    let f = |x: f64| grating_energy_fixed_order(&scene.with_shift(x), order, opts).map(|e| e.value);
    let coarse = -(f(s + h)? - f(s - h)?) / (2.0 * h);
    let fine = -(f(s + 0.5 * h)? - f(s - 0.5 * h)?) / h;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Largest spectral radius of `R₁R₂↑` over a tensor grid of `(k_x, k_y)`
/// nodes at frequency `ξ`: the half-zone rule in `k_x` and Gauss–Legendre
/// nodes mapped to `[0, ∞)` in `k_y`.
pub fn max_spectral_radius(scene: &GratingScene, order: usize, xi: f64, nodes: usize, limits: &CollocationLimits) -> Result<f64> {
    let kx_rule = half_zone_rule(nodes, scene.period);
    let (t, _) = gauss_legendre(nodes);
    let scale = 0.5 / scene.gap();
    let mut worst: f64 = 0.0;
    for &(kx, _) in &kx_rule {
        for &ti in &t {
            let u = 0.5 * (ti + 1.0);
            let ky = scale * u / (1.0 - u);
            worst = worst.max(spectral_radius_at_node(scene, order, xi, kx, ky, limits)?);
        }
    }
    Ok(worst)
}
