//! Scalar Green-function algebra for the atom + array system.
//!
//! Only the matrix elements used downstream are exposed: the bare atomic
//! element `G0e(z) = 1/z`, the bare lattice elements
//! `⟨x|G0(z)|0⟩ = (1/2π) ∫ dk e^{ikx} / (z − 2J cos k)`, and the dressing
//! functions `f`, `f1 = g G00 f`, `f2 = g G0e f`.
//!
//! The lattice integral is never evaluated numerically here. Off the band it
//! is `(z̃ − s)^{|x|} / (2J s)` with `z̃ = z/2J` and `s = √(z̃ − 1) √(z̃ + 1)`
//! (product of principal roots), which is the branch that decays in `|x|`
//! and behaves as `1/z` at infinity. On the band the same expression is
//! taken in the limit `z → E ± i0⁺`, where `s → ±i √(1 − z̃²)`.

use num_complex::Complex64;

use crate::model::ModelParams;
use crate::spectrum::bound_energies;
use crate::{Error, Result};

/// Approach direction onto the branch cut: `E + i0⁺` or `E − i0⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

/// A complex energy classified against the band `[−2J, 2J]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplexEnergy {
    /// Any point not on the closed real segment `[−2J, 2J]`.
    OffCut(Complex64),
    /// A real energy inside the band, approached from one side.
    OnCut { energy: f64, side: Side },
}

impl ComplexEnergy {
    pub fn off_cut(z: Complex64) -> Self {
        ComplexEnergy::OffCut(z)
    }

    pub fn real(e: f64) -> Self {
        ComplexEnergy::OffCut(Complex64::new(e, 0.0))
    }

    pub fn on_cut(energy: f64, side: Side) -> Self {
        ComplexEnergy::OnCut { energy, side }
    }

    /// The energy value with the infinitesimal displacement dropped.
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexEnergy::OffCut(z) => z,
            ComplexEnergy::OnCut { energy, .. } => Complex64::new(energy, 0.0),
        }
    }
}

/// Residues of `f`, `f1`, `f2` at `ω₊`.
///
/// `Res(f, ω₋) = −r` while `f1` and `f2` have equal residues at both poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residues {
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
}

/// The dressing functions `(f, f1, f2)` at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dressing {
    pub f: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
}

/// `(z̃, s)` with `s² = z̃² − 1` on the decaying branch.
fn reduced_root(z: &ComplexEnergy, p: &ModelParams) -> Result<(Complex64, Complex64)> {
    let two_j = p.band_edge();
    match *z {
        ComplexEnergy::OffCut(w) => {
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite energy {w}")));
            }
            if w.im == 0.0 && w.re.abs() == two_j {
                return Err(Error::BranchPoint(w));
            }
            if w.im == 0.0 && w.re.abs() < two_j {
                return Err(Error::OnBranchCut(w));
            }
            let zt = w / two_j;
            let one = Complex64::new(1.0, 0.0);
            Ok((zt, (zt - one).sqrt() * (zt + one).sqrt()))
        }
        ComplexEnergy::OnCut { energy, side } => {
            if !energy.is_finite() || energy.abs() > two_j {
                return Err(Error::OffBand(energy));
            }
            if energy.abs() == two_j {
                return Err(Error::BranchPoint(Complex64::new(energy, 0.0)));
            }
            let zt = energy / two_j;
            let width = (1.0 - zt * zt).sqrt();
            Ok((
                Complex64::new(zt, 0.0),
                Complex64::new(0.0, side.sign() * width),
            ))
        }
    }
}

/// Bare atomic element `G0e(z) = 1/z`.
pub fn g0e(z: &ComplexEnergy) -> Result<Complex64> {
    let w = z.value();
    if w == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole(w));
    }
    Ok(w.inv())
}

/// Bare on-site element `G00(z) = 1/√(z² − 4J²)` (off the cut) or
/// `∓i/√(4J² − E²)` on the cut from above/below.
pub fn g00(z: &ComplexEnergy, p: &ModelParams) -> Result<Complex64> {
    lattice_green(z, 0, p)
}

/// Bare propagator `⟨j|G0(z)|0⟩` between cavity `0` and cavity `j`.
pub fn lattice_green(z: &ComplexEnergy, j: i64, p: &ModelParams) -> Result<Complex64> {
    let (zt, s) = reduced_root(z, p)?;
    let denom = s * p.band_edge();
    let hop = zt - s;
    let power = i32::try_from(j.unsigned_abs())
        .map_err(|_| Error::InvalidInput(format!("site index {j} too large")))?;
    Ok(hop.powi(power) / denom)
}

fn near_pole(z: &ComplexEnergy, p: &ModelParams) -> Option<f64> {
    let ComplexEnergy::OffCut(w) = *z else {
        return None;
    };
    if w.im != 0.0 || !p.is_coupled() {
        return None;
    }
    let (wp, wm) = bound_energies(p);
    let tol = 1e-12 * wp.abs().max(1.0);
    [wp, wm]
        .into_iter()
        .find(|&pole| (w.re - pole).abs() <= tol)
}

/// Dressing functions `f = g / (1 − g² G0e G00)`, `f1 = g G00 f`,
/// `f2 = g G0e f`.
pub fn dressing(z: &ComplexEnergy, p: &ModelParams) -> Result<Dressing> {
    if let Some(pole) = near_pole(z, p) {
        return Err(Error::Pole(Complex64::new(pole, 0.0)));
    }
    let ge = g0e(z)?;
    let g0 = g00(z, p)?;
    let g = p.coupling();
    let f = g / (1.0 - g * g * ge * g0);
    Ok(Dressing {
        f,
        f1: g * g0 * f,
        f2: g * ge * f,
    })
}

/// Left-hand side of the pole condition `1 − g² / (z √(z² − 4J²))`.
pub fn pole_equation(z: &ComplexEnergy, p: &ModelParams) -> Result<Complex64> {
    if let ComplexEnergy::OnCut { energy, .. } = *z {
        return Err(Error::OnBranchCut(Complex64::new(energy, 0.0)));
    }
    let ge = g0e(z)?;
    let g0 = g00(z, p)?;
    let g = p.coupling();
    Ok(1.0 - g * g * ge * g0)
}

/// Closed-form residues of the dressing functions at `ω₊`.
pub fn residues(p: &ModelParams) -> Result<Residues> {
    if !p.is_coupled() {
        return Err(Error::Degenerate("no poles at g = 0"));
    }
    let g = p.coupling();
    let j = p.hopping();
    let g2 = g * g;
    let g4 = g2 * g2;
    let root = (g4 + 4.0 * j.powi(4)).sqrt();
    let shifted = 2.0 * j * j + root;
    Ok(Residues {
        r: g4 * g / (2.0 * root * shifted.sqrt()),
        r1: g4 / (2.0 * root),
        r2: g4 * g2 / (2.0 * root * shifted),
    })
}
