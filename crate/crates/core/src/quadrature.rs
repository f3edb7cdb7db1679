//! Numerical engines shared by every energy formula in the crate.
//!
//! * adaptive Gauss–Kronrod integration on finite and semi-infinite ranges,
//! * Gauss–Legendre rules for fixed-node integration (Brillouin zone),
//! * Matsubara sums with a geometric tail correction,
//! * `Re ln det(I - M)` from a pivoted LU factorisation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative/absolute tolerance pair. A result `I` is accepted when its error
/// estimate is below `max(rel * |I|, abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0 && rel.is_finite()) {
            return Err(Error::InvalidInput(format!("relative tolerance must be > 0, got {rel}")));
        }
        if !(abs >= 0.0 && abs.is_finite()) {
            return Err(Error::InvalidInput(format!("absolute tolerance must be >= 0, got {abs}")));
        }
        Ok(Self { rel, abs })
    }

    /// Same absolute floor, relative part scaled by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Self { rel: self.rel * factor, abs: self.abs * factor }
    }

    pub fn bound(&self, value: f64) -> f64 {
        (self.rel * value.abs()).max(self.abs)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-8, abs: 1e-14 }
    }
}

/// A quadrature result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const MAX_PANELS: usize = 4000;

// 15-point Kronrod abscissae and weights; odd indices are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn checked<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::InvalidInput(format!("integrand returned {y} at x = {x}")))
    }
}

/// One Gauss–Kronrod 7/15 panel with the QUADPACK error heuristic.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = checked(f, center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let (value, error) = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        if total_err <= tol.bound(total) {
            break;
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::NonConvergence { what: "adaptive quadrature", estimate: total, error: total_err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a).abs() < 1e-14 * (1.0 + mid.abs()) {
            return Err(Error::NonConvergence { what: "adaptive quadrature", estimate: total, error: total_err });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum in a fixed (left-to-right) order so the result does not depend on heap history.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error, evaluations })
}

/// Integrates `f` over `[0, ∞)` through the map `x = t / (1 - t)`.
///
/// `f` should decay at least exponentially on a scale of order one; callers
/// rescale their variable so that this holds.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(mut f: F, tol: Tolerance) -> Result<Estimate> {
    integrate(
        |t| {
            let s = 1.0 - t;
            let x = t / s;
            let y = f(x);
            if y == 0.0 {
                0.0
            } else {
                y / (s * s)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Matsubara summation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraConfig {
    pub temperature: f64,
    pub tolerance: Tolerance,
    pub max_terms: usize,
}

impl MatsubaraConfig {
    pub fn new(temperature: f64, tolerance: Tolerance, max_terms: usize) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidInput(format!("temperature must be > 0, got {temperature}")));
        }
        if max_terms == 0 {
            return Err(Error::InvalidInput("max_terms must be at least 1".into()));
        }
        Ok(Self { temperature, tolerance, max_terms })
    }

    /// `ω_n = 2πnT`.
    pub fn frequency(&self, n: usize) -> f64 {
        2.0 * std::f64::consts::PI * n as f64 * self.temperature
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraSum {
    /// Primed sum including the tail correction.
    pub value: f64,
    /// Geometric estimate of the truncated remainder (already included in `value`).
    pub tail: f64,
    /// Number of terms evaluated (n = 0 .. terms-1).
    pub terms: usize,
}

/// Primed sum `term(0)/2 + Σ_{n≥1} term(n)`.
///
/// After each term the last three values are fitted with a single geometric
/// ratio; the sum stops once the implied remainder is below tolerance, and the
/// remainder is added as a correction.
pub fn matsubara_sum<F>(mut term: F, cfg: &MatsubaraConfig) -> Result<MatsubaraSum>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut terms = Vec::with_capacity(64);
    let first = term(0)?;
    check_term(0, first)?;
    let mut sum = 0.5 * first;
    terms.push(first);
    for n in 1..cfg.max_terms {
        let t = term(n)?;
        check_term(n, t)?;
        sum += t;
        terms.push(t);
        if n < 3 {
            continue;
        }
        if let Some(tail) = geometric_tail(&terms[n - 2..=n]) {
            if tail.abs() <= cfg.tolerance.bound(sum) {
                return Ok(MatsubaraSum { value: sum + tail, tail, terms: n + 1 });
            }
        }
    }
    if cfg.max_terms == 1 {
        return Ok(MatsubaraSum { value: sum, tail: 0.0, terms: 1 });
    }
    Err(Error::NonConvergence { what: "Matsubara sum", estimate: sum, error: f64::NAN })
}

fn check_term(n: usize, t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("Matsubara term {n} is {t}")))
    }
}

/// Remainder after the last of three consecutive terms, or `None` if the
/// terms are not (yet) decaying geometrically.
fn geometric_tail(last3: &[f64]) -> Option<f64> {
    let (a, b, c) = (last3[0], last3[1], last3[2]);
    if c == 0.0 {
        return if b == 0.0 { Some(0.0) } else { None };
    }
    if a == 0.0 || b == 0.0 {
        return None;
    }
    let r1 = b / a;
    let r2 = c / b;
    if !(r1 > 0.0 && r2 > 0.0) {
        return None;
    }
    let ratio = r1.max(r2);
    if ratio >= 1.0 {
        return None;
    }
    Some(c * ratio / (1.0 - ratio))
}

/// `Re ln det(I - M)` via LU factorisation of `I - M` with partial pivoting.
///
/// Fails with [`Error::SpectralRadiusExceeded`] when `|tr M| / n ≥ 1`, which
/// certifies an eigenvalue of modulus at least one.
pub fn log_det_one_minus(m: &DMatrix<Complex64>) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput(format!("matrix must be square, got {}x{}", n, m.ncols())));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let trace_bound = m.trace().norm() / n as f64;
    if trace_bound >= 1.0 {
        return Err(Error::SpectralRadiusExceeded { bound: trace_bound });
    }
    let row_norm = m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    if row_norm < 0.5 {
        return Ok(log_det_near_identity(m));
    }
    let mut a = -m.clone();
    for i in 0..n {
        a[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let mut log_det = 0.0;
    for k in 0..n {
        let (mut p, mut best) = (k, a[(k, k)].norm());
        for i in k + 1..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if !(best > f64::MIN_POSITIVE) {
            return Err(Error::SingularMatrix { pivot: k });
        }
        if p != k {
            a.swap_rows(p, k);
        }
        let pivot = a[(k, k)];
        log_det += best.ln();
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = a[(k, j)];
                a[(i, j)] -= factor * u;
            }
        }
    }
    Ok(log_det)
}

/// Elimination on `I + D` with `D = -M` stored apart from the identity, so
/// that pivots `1 + δ` keep full relative accuracy in `δ`. Only used when
/// `‖M‖∞ < 1/2`, where `I - M` is diagonally dominant and needs no pivoting.
fn log_det_near_identity(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut d = -m.clone();
    let mut log_det = 0.0;
    for k in 0..n {
        let delta = d[(k, k)];
        log_det += 0.5 * (2.0 * delta.re + delta.norm_sqr()).ln_1p();
        let pivot = delta + 1.0;
        for i in k + 1..n {
            let factor = d[(i, k)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = d[(k, j)];
                d[(i, j)] -= factor * u;
            }
        }
    }
    log_det
}

/// Largest eigenvalue modulus, from a complex Schur decomposition.
pub fn spectral_radius(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let eig = m
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::InvalidInput("Schur decomposition did not triangularise".into()))?;
    Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
