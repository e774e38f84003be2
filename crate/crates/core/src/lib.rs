//! Exact single-excitation dynamics of a two-level atom coupled to one cavity
//! of an infinite coupled-cavity array.
//!
//! The crate computes the dressed spectrum of the atom + array system (two
//! out-of-band bound states and a band of scattering states) in closed form,
//! propagates the emission of an initially excited atom into the field
//! vacuum, and derives the localization observables that separate photon
//! localization from atomic population trapping.
//!
//! Module map:
//!
//! * [`model`]: parameters, dispersion, site labels.
//! * [`greens`]: bare and dressed scalar Green functions, poles, residues.
//! * [`spectrum`]: bound and scattering stationary states.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration of complex integrands.
//! * [`bessel`]: Bessel functions of the first kind (Miller recurrence).
//! * [`dynamics`]: atomic and photonic amplitudes after emission.
//! * [`observables`]: populations, localization metrics, thresholds.
//! * [`oracle`]: exact diagonalization of a finite ring, for validation.
//!
//! Energies share the units of the hopping rate `J`; times are in units of
//! `1/J` whenever `J = 1`.

pub mod bessel;
pub mod dynamics;
mod error;
pub mod greens;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod quadrature;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{ModelParams, SiteIndex};
pub use num_complex::Complex64;
