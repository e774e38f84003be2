//! Physical parameters and free-field conventions.
//!
//! The array Hamiltonian is `J Σ_x (a†_{x+1} a_x + h.c.)`, and the atom couples
//! to cavity `x = 0` with rate `g` under the rotating-wave approximation. The
//! atom and the cavities are resonant, and their common frequency is the
//! energy origin.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Hopping rate `J`, coupling rate `g` and their ratio `η = g/J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    hopping: f64,
    coupling: f64,
    eta: f64,
}

impl ModelParams {
    pub fn new(hopping: f64, coupling: f64) -> Result<Self> {
        if !(hopping.is_finite() && hopping > 0.0) {
            return Err(Error::InvalidParameter {
                name: "J",
                value: hopping,
                reason: "hopping rate must be positive and finite",
            });
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "g",
                value: coupling,
                reason: "coupling rate must be non-negative and finite",
            });
        }
        Ok(Self {
            hopping,
            coupling,
            eta: coupling / hopping,
        })
    }

    /// Parameters with `J = 1` and `g = η`.
    pub fn from_eta(eta: f64) -> Result<Self> {
        Self::new(1.0, eta)
    }

    pub fn with_eta(hopping: f64, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "rescaled coupling must be non-negative and finite",
            });
        }
        let mut p = Self::new(hopping, eta * hopping)?;
        p.eta = eta;
        Ok(p)
    }

    #[inline]
    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    #[inline]
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Rescaled coupling `g/J`.
    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Atom and cavity frequency; zero by the resonance convention.
    #[inline]
    pub fn omega0(&self) -> f64 {
        0.0
    }

    /// Half width of the photon band, `2J`.
    #[inline]
    pub fn band_edge(&self) -> f64 {
        2.0 * self.hopping
    }

    pub fn is_coupled(&self) -> bool {
        self.coupling > 0.0
    }
}

/// Cavity label along the array. Cavity `0` hosts the atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteIndex(pub i64);

impl SiteIndex {
    #[inline]
    pub fn distance(self) -> u64 {
        self.0.unsigned_abs()
    }

    #[inline]
    pub fn is_even(self) -> bool {
        self.0 % 2 == 0
    }
}

impl From<i64> for SiteIndex {
    fn from(x: i64) -> Self {
        SiteIndex(x)
    }
}

fn check_momentum(k: f64) -> Result<()> {
    if k.is_finite() && k.abs() <= PI {
        Ok(())
    } else {
        Err(Error::MomentumOutOfRange(k))
    }
}

/// Free photon energy `ω_k = 2J cos k`.
pub fn dispersion(k: f64, p: &ModelParams) -> Result<f64> {
    check_momentum(k)?;
    Ok(2.0 * p.hopping * k.cos())
}

/// `dω_k/dk = -2J sin k`, in sites per unit time.
pub fn group_velocity(k: f64, p: &ModelParams) -> Result<f64> {
    check_momentum(k)?;
    Ok(-2.0 * p.hopping * k.sin())
}
