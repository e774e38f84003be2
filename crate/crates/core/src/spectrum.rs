//! Stationary states of the single-excitation sector.
//!
//! Two bound states sit outside the band at `ω± = ±√(2J² + √(g⁴ + 4J⁴))`:
//!
//! ```text
//! |Ψ±⟩ = ±𝒩 Σ_x (±ρ)^{|x|} |x⟩ + √p_b |e⟩
//! ```
//!
//! and each band energy `ω_k = 2J cos k` carries one scattering state
//!
//! ```text
//! u_kx = e^{ikx} + γ_k e^{i|kx|},   u_ke = 2η|sin k| / (4|sin k| cos k − iη²)
//! ```
//!
//! with the `1/√N` normalization dropped: amplitudes only ever enter
//! `dk/2π` integrals, which restore it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::{ModelParams, SiteIndex};
use crate::{Error, Result};

/// Which of the two bound states, `μ = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A normalizable atom-photon eigenstate.
///
/// The atomic component `√p_b` is taken real and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub mu: Branch,
    /// Eigenenergy `μ ω₊`.
    pub omega: f64,
    /// Ratio of photon amplitudes on neighbouring cavities, in `(0, 1)`.
    pub rho: f64,
    /// Probability of finding the atom excited.
    pub p_b: f64,
    /// Field normalization `𝒩`.
    pub norm: f64,
}

impl BoundState {
    pub fn atomic_amplitude(&self) -> f64 {
        self.p_b.sqrt()
    }

    /// Field weight `Σ_x |⟨x|Ψ⟩|²` summed over the infinite lattice.
    pub fn field_weight(&self) -> f64 {
        let r2 = self.rho * self.rho;
        self.norm * self.norm * (1.0 + r2) / (1.0 - r2)
    }

    /// Localization length `λ = −1/ln ρ` of the photon envelope.
    pub fn localization_length(&self) -> f64 {
        -1.0 / self.rho.ln()
    }
}

/// A band eigenstate labelled by its momentum `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringState {
    pub k: f64,
    /// Reflection amplitude `γ_k`.
    pub gamma: Complex64,
    /// Atomic amplitude `u_ke` (without `1/√N`).
    pub u_ke: Complex64,
}

impl ScatteringState {
    /// Transmission amplitude `1 + γ_k`.
    pub fn transmission(&self) -> Complex64 {
        1.0 + self.gamma
    }

    /// Photon amplitude `u_kx` on cavity `x` (without `1/√N`).
    pub fn field_amplitude(&self, x: SiteIndex) -> Complex64 {
        let xf = x.0 as f64;
        Complex64::from_polar(1.0, self.k * xf)
            + self.gamma * Complex64::from_polar(1.0, (self.k * xf).abs())
    }
}

/// Discrete energies `(ω₊, ω₋)`; they touch the band edges at `g = 0`.
pub fn bound_energies(p: &ModelParams) -> (f64, f64) {
    let eta2 = p.eta() * p.eta();
    let w = p.hopping() * (2.0 + (eta2 * eta2 + 4.0).sqrt()).sqrt();
    (w, -w)
}

/// `p_b = η⁴ / (2(η⁴ + 2√(η⁴+4) + 4))`.
pub(crate) fn atomic_weight(eta: f64) -> f64 {
    let eta4 = eta.powi(4);
    eta4 / (2.0 * (eta4 + 2.0 * (eta4 + 4.0).sqrt() + 4.0))
}

/// `ρ = (ω₊ − √(ω₊² − 4J²)) / 2J`, evaluated as `2J / (ω₊ + √(ω₊² − 4J²))`
/// so that it stays accurate as `η → 0`.
pub(crate) fn decay_factor(eta: f64) -> f64 {
    let eta2 = eta * eta;
    let q = (eta2 * eta2 + 4.0).sqrt();
    let w = (2.0 + q).sqrt();
    // ω₊² − 4J² = √(η⁴+4) − 2 = η⁴ / (√(η⁴+4) + 2), in units of J².
    let gap_root = eta2 / (q + 2.0).sqrt();
    2.0 / (w + gap_root)
}

pub fn bound_state(p: &ModelParams, mu: Branch) -> Result<BoundState> {
    if !p.is_coupled() {
        return Err(Error::Degenerate(
            "bound states merge with the band edges at g = 0",
        ));
    }
    let (wp, _) = bound_energies(p);
    let rho = decay_factor(p.eta());
    let p_b = atomic_weight(p.eta());
    let r2 = rho * rho;
    let norm = ((1.0 - p_b) * (1.0 - r2) / (1.0 + r2)).sqrt();
    Ok(BoundState {
        mu,
        omega: mu.sign() * wp,
        rho,
        p_b,
        norm,
    })
}

/// Photon amplitude `μ 𝒩 (μρ)^{|x|}` of a bound state on cavity `x`.
pub fn bound_amplitude(bs: &BoundState, x: SiteIndex) -> f64 {
    let mu = bs.mu.sign();
    let d = x.distance();
    let parity = if d % 2 == 0 { 1.0 } else { mu };
    mu * bs.norm * parity * bs.rho.powf(d as f64)
}

pub fn scattering_state(p: &ModelParams, k: f64) -> Result<ScatteringState> {
    if !k.is_finite() || k.abs() > PI {
        return Err(Error::MomentumOutOfRange(k));
    }
    if k == 0.0 || k.abs() == PI {
        return Err(Error::BandEdge(k));
    }
    if !p.is_coupled() {
        return Ok(ScatteringState {
            k,
            gamma: Complex64::new(0.0, 0.0),
            u_ke: Complex64::new(0.0, 0.0),
        });
    }
    let eta = p.eta();
    let eta2 = eta * eta;
    let s = k.sin().abs();
    let c = k.cos();
    let gamma = -eta2 / Complex64::new(eta2, 4.0 * s * c);
    let u_ke = 2.0 * eta * s / Complex64::new(4.0 * s * c, -eta2);
    Ok(ScatteringState { k, gamma, u_ke })
}
