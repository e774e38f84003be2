//! Exact diagonalization of a finite ring, used to validate the
//! infinite-lattice results.
//!
//! The ring has `N` cavities labelled `x = −N/2 … N/2 − 1` with the wrap link
//! between the two ends, plus the atom coupled to `x = 0`. In the
//! single-excitation sector this is an `(N + 1) × (N + 1)` real symmetric
//! matrix; row `x + N/2` holds cavity `x` and row `N` holds the atom.
//!
//! Results agree with the infinite lattice only until the emitted wavefront
//! (speed `2J`) reaches the antipode, so [`validate`] refuses longer times.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{evolve, QuadratureSpec};
use crate::model::ModelParams;
use crate::spectrum::{bound_amplitude, bound_state, Branch};
use crate::{Error, Result};

pub const MIN_SITES: usize = 4;
pub const MAX_SITES: usize = 1 << 14;
/// Slack, in sites, between the wavefront and the antipode.
pub const WRAP_MARGIN: f64 = 10.0;

/// Single-excitation Hamiltonian of the ring plus atom.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLattice {
    params: ModelParams,
    sites: usize,
    hamiltonian: DMatrix<f64>,
}

impl FiniteLattice {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Number of cavities `N`.
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.sites + 1
    }

    pub fn atom_index(&self) -> usize {
        self.sites
    }

    /// Row of cavity `x`.
    pub fn site_index(&self, x: i64) -> Result<usize> {
        let half = (self.sites / 2) as i64;
        if x < -half || x >= half {
            return Err(Error::SiteOutOfRange { x, n: self.sites });
        }
        Ok((x + half) as usize)
    }

    /// Cavity held by row `i`, or `None` for the atom.
    pub fn site_of(&self, i: usize) -> Option<i64> {
        (i < self.sites).then(|| i as i64 - (self.sites / 2) as i64)
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    /// `H v`.
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "vector of length {} on a lattice of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(&self.hamiltonian * v)
    }

    /// Largest time before the wavefront comes within [`WRAP_MARGIN`] sites
    /// of the antipode.
    pub fn wrap_limit(&self) -> f64 {
        ((self.sites / 2) as f64 - WRAP_MARGIN) / self.params.band_edge()
    }

    /// The analytic bound state of the infinite lattice, restricted to the
    /// ring and renormalized.
    pub fn bound_vector(&self, mu: Branch) -> Result<(f64, DVector<f64>)> {
        let bs = bound_state(&self.params, mu)?;
        let mut v = DVector::zeros(self.dim());
        for i in 0..self.sites {
            let x = self.site_of(i).expect("cavity row");
            v[i] = bound_amplitude(&bs, x.into());
        }
        v[self.atom_index()] = bs.atomic_amplitude();
        let norm = v.norm();
        Ok((bs.omega, v / norm))
    }
}

pub fn build_hamiltonian(p: &ModelParams, sites: usize) -> Result<FiniteLattice> {
    if sites % 2 != 0 || !(MIN_SITES..=MAX_SITES).contains(&sites) {
        return Err(Error::LatticeSize(sites));
    }
    let dim = sites + 1;
    let j = p.hopping();
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..sites {
        let next = (i + 1) % sites;
        h[(i, next)] = j;
        h[(next, i)] = j;
    }
    let centre = sites / 2;
    h[(sites, centre)] = p.coupling();
    h[(centre, sites)] = p.coupling();
    Ok(FiniteLattice {
        params: *p,
        sites,
        hamiltonian: h,
    })
}

/// Orthonormal eigenbasis, eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: DVector<f64>,
    /// Eigenvectors as columns.
    pub vectors: DMatrix<f64>,
}

impl Eigenpairs {
    /// `max |H − VΛVᵀ|`.
    pub fn reconstruction_error(&self, lat: &FiniteLattice) -> f64 {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        let rebuilt = scaled * self.vectors.transpose();
        (lat.hamiltonian() - rebuilt).amax()
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.values.len();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(n, n)).amax()
    }

    /// Indices of eigenvalues with `|E| > threshold`.
    pub fn outside(&self, threshold: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&m| self.values[m].abs() > threshold)
            .collect()
    }
}

pub fn eigendecompose(lat: &FiniteLattice) -> Result<Eigenpairs> {
    let eig = SymmetricEigen::try_new(lat.hamiltonian().clone(), f64::EPSILON, 0)
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&m| eig.eigenvalues[m]));
    let vectors = DMatrix::from_fn(lat.dim(), order.len(), |i, c| {
        eig.eigenvectors[(i, order[c])]
    });
    Ok(Eigenpairs { values, vectors })
}

/// `e^{−iHt}|e⟩` on the ring.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactState {
    pub t: f64,
    pub alpha: Complex64,
    /// Cavity amplitudes indexed by row, `x = i − N/2`.
    pub psi: Vec<Complex64>,
}

impl ExactState {
    pub fn psi_at(&self, x: i64) -> Option<Complex64> {
        let half = (self.psi.len() / 2) as i64;
        (x >= -half && x < half).then(|| self.psi[(x + half) as usize])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.psi.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }
}

/// Spectral propagation `Σ_m v_{e,m} e^{−iE_m t} v_m`.
pub fn propagate_exact(lat: &FiniteLattice, eig: &Eigenpairs, t: f64) -> Result<ExactState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "time must be finite and non-negative",
        });
    }
    let e = lat.atom_index();
    let coeffs: Vec<Complex64> = (0..eig.values.len())
        .map(|m| Complex64::from_polar(eig.vectors[(e, m)], -eig.values[m] * t))
        .collect();
    let amplitude = |i: usize| {
        eig.vectors
            .row(i)
            .iter()
            .zip(&coeffs)
            .fold(Complex64::new(0.0, 0.0), |acc, (&v, &c)| acc + c * v)
    };
    Ok(ExactState {
        t,
        alpha: amplitude(e),
        psi: (0..lat.sites()).map(amplitude).collect(),
    })
}

/// Worst deviations between the analytic and the ring amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub sites: usize,
    pub eta: f64,
    pub samples: usize,
    pub half_width: i64,
    pub max_alpha_deviation: f64,
    /// Time of the worst `α` deviation.
    pub worst_alpha_time: f64,
    pub max_psi_deviation: f64,
    /// `(t, x)` of the worst `ψ` deviation.
    pub worst_psi_point: (f64, i64),
    /// Largest deviation of the ring norm from one.
    pub max_norm_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares [`evolve`] with exact propagation on a ring of `sites` cavities.
pub fn validate(
    p: &ModelParams,
    sites: usize,
    times: &[f64],
    half_width: i64,
    q: &QuadratureSpec,
    tolerance: f64,
) -> Result<ValidationReport> {
    let lat = build_hamiltonian(p, sites)?;
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let limit = lat.wrap_limit();
    if t_max > limit {
        return Err(Error::WrapViolation { t_max, limit });
    }
    if half_width < 0 || half_width >= (sites / 2) as i64 {
        return Err(Error::SiteOutOfRange {
            x: half_width,
            n: sites,
        });
    }
    let eig = eigendecompose(&lat)?;
    let (trace, frames) = evolve(p, times, half_width, q)?;
    let exact: Vec<ExactState> = times
        .par_iter()
        .map(|&t| propagate_exact(&lat, &eig, t))
        .collect::<Result<_>>()?;

    let mut report = ValidationReport {
        sites,
        eta: p.eta(),
        samples: times.len(),
        half_width,
        max_alpha_deviation: 0.0,
        worst_alpha_time: 0.0,
        max_psi_deviation: 0.0,
        worst_psi_point: (0.0, 0),
        max_norm_defect: 0.0,
        tolerance,
        passed: false,
    };
    for ((state, alpha), frame) in exact.iter().zip(&trace.alpha).zip(&frames) {
        let d = (state.alpha - alpha).norm();
        if d > report.max_alpha_deviation {
            report.max_alpha_deviation = d;
            report.worst_alpha_time = state.t;
        }
        for x in frame.sites() {
            let analytic = frame.at(x).expect("site in window");
            let ring = state.psi_at(x).expect("window inside ring");
            let d = (analytic - ring).norm();
            if d > report.max_psi_deviation {
                report.max_psi_deviation = d;
                report.worst_psi_point = (state.t, x);
            }
        }
        report.max_norm_defect = report.max_norm_defect.max((state.norm_sqr() - 1.0).abs());
    }
    report.passed = report.max_alpha_deviation < tolerance && report.max_psi_deviation < tolerance;
    Ok(report)
}

/// Smallest even ring with `ρ^{N/2} < floor`, so the truncated bound state
/// is an eigenvector to that accuracy.
pub fn ring_size_for(p: &ModelParams, floor: f64) -> Result<usize> {
    let bs = bound_state(p, Branch::Plus)?;
    let half = (floor.ln() / bs.rho.ln()).ceil().max(2.0) as usize;
    let n = 2 * half;
    if n > MAX_SITES {
        return Err(Error::LatticeSize(n));
    }
    Ok(n)
}
