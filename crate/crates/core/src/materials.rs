//! Response models on the imaginary frequency axis.
//!
//! Everything here is in natural units (ħ = c = k_B = 1): frequencies,
//! momenta, temperatures and plasma frequencies are energies; atomic
//! polarizabilities are volumes (energy⁻³) in Heaviside–Lorentz convention.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Bulk permittivity `ε(iω)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DielectricModel {
    IdealConductor,
    Constant(f64),
    Plasma { omega_p: f64 },
    Drude { omega_p: f64, gamma: f64 },
    Tabulated(TabulatedPermittivity),
}

impl DielectricModel {
    pub fn constant(eps: f64) -> Result<Self> {
        if !(eps >= 1.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("constant permittivity must be >= 1, got {eps}")));
        }
        Ok(Self::Constant(eps))
    }

    pub fn plasma(omega_p: f64) -> Result<Self> {
        if !(omega_p >= 0.0 && omega_p.is_finite()) {
            return Err(Error::InvalidInput(format!("plasma frequency must be >= 0, got {omega_p}")));
        }
        Ok(Self::Plasma { omega_p })
    }

    pub fn drude(omega_p: f64, gamma: f64) -> Result<Self> {
        if !(omega_p >= 0.0 && omega_p.is_finite()) {
            return Err(Error::InvalidInput(format!("plasma frequency must be >= 0, got {omega_p}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("Drude relaxation must be >= 0, got {gamma}")));
        }
        Ok(Self::Drude { omega_p, gamma })
    }

    /// `ε(iω)` for `ω > 0`.
    pub fn epsilon_iw(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon_iw needs omega > 0, got {omega}")));
        }
        Ok(match self {
            Self::IdealConductor => return Err(Error::IdealLimitRequested),
            Self::Constant(eps) => *eps,
            Self::Plasma { omega_p } => 1.0 + (omega_p / omega).powi(2),
            Self::Drude { omega_p, gamma } => 1.0 + omega_p * omega_p / (omega * (omega + gamma)),
            Self::Tabulated(table) => table.eval(omega),
        })
    }
}

/// Permittivity sampled on the imaginary axis, interpolated with a monotone
/// cubic (Fritsch–Carlson) in `ln ω` and clamped outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPermittivity {
    log_omega: Vec<f64>,
    eps: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedPermittivity {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("tabulated permittivity needs at least two points".into()));
        }
        for (i, &(w, e)) in points.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i}: omega must be > 0, got {w}")));
            }
            if !(e >= 1.0 && e.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i}: eps(i omega) must be >= 1, got {e}")));
            }
            if i > 0 && w <= points[i - 1].0 {
                return Err(Error::InvalidInput(format!("row {i}: omega grid must be strictly increasing")));
            }
        }
        let log_omega: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
        let eps: Vec<f64> = points.iter().map(|p| p.1).collect();
        let slopes = fritsch_carlson_slopes(&log_omega, &eps);
        Ok(Self { log_omega, eps, slopes })
    }

    /// Grid value at the lowest frequency, used for the static limit.
    pub fn static_value(&self) -> f64 {
        self.eps[0]
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let x = omega.ln();
        let n = self.log_omega.len();
        if x <= self.log_omega[0] {
            return self.eps[0];
        }
        if x >= self.log_omega[n - 1] {
            return self.eps[n - 1];
        }
        let i = self.log_omega.partition_point(|&v| v <= x) - 1;
        let h = self.log_omega[i + 1] - self.log_omega[i];
        let t = (x - self.log_omega[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.eps[i] + h10 * h * self.slopes[i] + h01 * self.eps[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let secants: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        m[i] = if secants[i - 1] * secants[i] <= 0.0 { 0.0 } else { 0.5 * (secants[i - 1] + secants[i]) };
    }
    for i in 0..n - 1 {
        let d = secants[i];
        if d == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d;
        let b = m[i + 1] / d;
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * d;
            m[i + 1] = tau * b * d;
        }
    }
    m
}

/// One diagonal component of an atomic polarizability tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomicResponse {
    Static(f64),
    /// Single Lorentz oscillator: `α(iω) = α₀ω₀² / (ω₀² + ω²)`.
    Lorentz { alpha0: f64, omega0: f64 },
}

impl AtomicResponse {
    pub fn at(&self, omega: f64) -> f64 {
        match *self {
            Self::Static(a) => a,
            Self::Lorentz { alpha0, omega0 } => {
                let w2 = omega0 * omega0;
                alpha0 * w2 / (w2 + omega * omega)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Static(a) => a >= 0.0 && a.is_finite(),
            Self::Lorentz { alpha0, omega0 } => alpha0 >= 0.0 && alpha0.is_finite() && omega0 > 0.0 && omega0.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid atomic response {self:?}")))
        }
    }
}

/// Diagonal polarizability tensor of a ground-state atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizability {
    pub xx: AtomicResponse,
    pub yy: AtomicResponse,
    pub zz: AtomicResponse,
}

impl Polarizability {
    pub fn new(xx: AtomicResponse, yy: AtomicResponse, zz: AtomicResponse) -> Result<Self> {
        xx.validate()?;
        yy.validate()?;
        zz.validate()?;
        Ok(Self { xx, yy, zz })
    }

    pub fn isotropic(response: AtomicResponse) -> Result<Self> {
        Self::new(response, response, response)
    }

    pub fn is_isotropic_in_plane(&self) -> bool {
        self.xx == self.yy
    }
}

/// Polarization operator of a 2+1 dimensional layer at `(iω, k)`.
///
/// Implementors supply `Π₀₀` and `trΠ`; the in-plane longitudinal and
/// transverse components follow from gauge invariance. On the imaginary axis
/// the identity `ω²Π₀₀ = k²Π_ll` picks up the sign of `(iω)²`, so
/// `Π_ll(iω, k) = -ω²Π₀₀/k²`.
pub trait LayerPolarization: Send + Sync {
    fn pi00(&self, omega: f64, k: f64) -> Result<f64>;
    fn tr_pi(&self, omega: f64, k: f64) -> Result<f64>;

    /// `trΠ - Π₀₀`. Models whose `Π₀₀` dwarfs this difference should
    /// override it to avoid cancellation.
    fn trace_excess(&self, omega: f64, k: f64) -> Result<f64> {
        Ok(self.tr_pi(omega, k)? - self.pi00(omega, k)?)
    }

    fn pi_ll(&self, omega: f64, k: f64) -> Result<f64> {
        Ok(-omega * omega * self.pi00(omega, k)? / (k * k))
    }

    /// `Π_pp = Π₀₀(ω²+k²)/k² - trΠ`.
    fn pi_pp(&self, omega: f64, k: f64) -> Result<f64> {
        let q2 = omega * omega + k * k;
        Ok(self.pi00(omega, k)? * q2 / (k * k) - self.tr_pi(omega, k)?)
    }
}

/// Gapless, undoped graphene at `ω = 0`, leading terms of the small-`k` expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrapheneZeroModeModel {
    pub alpha: f64,
    pub species: u32,
    pub fermi_velocity: f64,
    pub temperature: f64,
}

impl GrapheneZeroModeModel {
    pub const FINE_STRUCTURE: f64 = 1.0 / 137.036;

    pub fn new(alpha: f64, species: u32, fermi_velocity: f64, temperature: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("coupling must be >= 0, got {alpha}")));
        }
        if !(fermi_velocity > 0.0 && fermi_velocity <= 1.0) {
            return Err(Error::InvalidInput(format!("Fermi velocity must be in (0, 1], got {fermi_velocity}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidInput(format!("temperature must be > 0, got {temperature}")));
        }
        Ok(Self { alpha, species, fermi_velocity, temperature })
    }

    /// Graphene with `N = 4` species at the physical coupling.
    pub fn graphene(fermi_velocity: f64, temperature: f64) -> Result<Self> {
        Self::new(Self::FINE_STRUCTURE, 4, fermi_velocity, temperature)
    }

    fn coupling(&self) -> f64 {
        self.alpha * self.species as f64
    }

    /// `Π₀₀(0, k) = 4αNT ln2 / v_F² + αNk²/(12T)`.
    pub fn pi00_zero(&self, k: f64) -> f64 {
        let an = self.coupling();
        4.0 * an * self.temperature * LN_2 / (self.fermi_velocity * self.fermi_velocity)
            + an * k * k / (12.0 * self.temperature)
    }

    /// `trΠ(0, k) - Π₀₀(0, k) = αN v_F² k² / (6T)`.
    pub fn trace_excess_zero(&self, k: f64) -> f64 {
        self.coupling() * self.fermi_velocity * self.fermi_velocity * k * k / (6.0 * self.temperature)
    }
}

impl LayerPolarization for GrapheneZeroModeModel {
    fn pi00(&self, omega: f64, k: f64) -> Result<f64> {
        if omega != 0.0 {
            return Err(Error::OutsideValidity("graphene zero-mode model is defined at omega = 0 only"));
        }
        Ok(self.pi00_zero(k))
    }

    fn tr_pi(&self, omega: f64, k: f64) -> Result<f64> {
        if omega != 0.0 {
            return Err(Error::OutsideValidity("graphene zero-mode model is defined at omega = 0 only"));
        }
        Ok(self.pi00_zero(k) + self.trace_excess_zero(k))
    }

    fn trace_excess(&self, omega: f64, k: f64) -> Result<f64> {
        if omega != 0.0 {
            return Err(Error::OutsideValidity("graphene zero-mode model is defined at omega = 0 only"));
        }
        Ok(self.trace_excess_zero(k))
    }
}

/// Polarization operator with fixed values, independent of `(ω, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLayer {
    pub pi00: f64,
    pub tr_pi: f64,
}

impl LayerPolarization for ConstantLayer {
    fn pi00(&self, _omega: f64, _k: f64) -> Result<f64> {
        Ok(self.pi00)
    }

    fn tr_pi(&self, _omega: f64, _k: f64) -> Result<f64> {
        Ok(self.tr_pi)
    }
}

/// Static transverse response of a superconductor,
/// `Π_tr(0, k) = m₀² + γk² + O(k⁴)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperconductorModel {
    pub m0: f64,
    pub gamma: f64,
}

impl SuperconductorModel {
    pub fn new(m0: f64, gamma: f64) -> Result<Self> {
        if !(m0 >= 0.0 && m0.is_finite()) {
            return Err(Error::InvalidInput(format!("photon mass must be >= 0, got {m0}")));
        }
        if !(gamma > -1.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be > -1, got {gamma}")));
        }
        Ok(Self { m0, gamma })
    }

    /// Squared screening mass `m₀²/(1+γ)` entering the static TE coefficient.
    pub fn screening_mass_sq(&self) -> f64 {
        self.m0 * self.m0 / (1.0 + self.gamma)
    }
}
