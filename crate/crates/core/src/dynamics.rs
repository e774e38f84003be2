//! Emission from the initially excited atom, `|Φ(0)⟩ = |e⟩`.
//!
//! The atomic amplitude `α(t) = ⟨e|Φ(t)⟩` and the photon amplitude
//! `ψ(x, t) = ⟨x|Φ(t)⟩` both split into a bound-state part (closed form) and
//! a band part (a momentum integral):
//!
//! ```text
//! α_b(t)    = 2 p_b cos ω₊t
//! α_u(t)    = (η²/2π) ∫ dk sin²k e^{−iω_k t} / (sin²2k + η⁴/4)
//! ψ_b(x, t) = 2√p_b 𝒩 ρ^{|x|} · { −i sin ω₊t  (|x| even),  cos ω₊t  (|x| odd) }
//! ψ_u(x, t) = (η/π) ∫ dk e^{−iω_k t} |s| / (iη² + 4|s|c)
//!                      · (e^{ikx} − η² e^{i|kx|} / (η² + 4i|s|c))
//! ```
//!
//! with `s = sin k`, `c = cos k`. The band integrals are done by adaptive
//! Gauss–Kronrod quadrature. `α_u` has a second, independent route through
//! the Jacobi–Anger expansion
//!
//! ```text
//! α_u(t) = I₀ J₀(2Jt) + Σ_{n≥1} 2(−1)ⁿ Iₙ J₂ₙ(2Jt)
//! ```
//!
//! whose coefficients `Iₙ` are time independent, which makes it the cheaper
//! route at long times.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bessel::{bessel_j_sequence, MAX_ARGUMENT, MAX_ORDER};
use crate::model::{ModelParams, SiteIndex};
use crate::spectrum::{atomic_weight, bound_energies, bound_state, Branch};
use crate::{Error, Result};

pub use crate::quadrature::{Integral, QuadratureRule, QuadratureSpec};

/// Above this value of `Jt`, [`alpha_unbound`] takes the Bessel route.
pub const BESSEL_SWITCH: f64 = 200.0;

/// Target for the Bessel tail when no truncation order is given.
pub const BESSEL_TAIL_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "time must be finite and non-negative",
        })
    }
}

/// Breakpoints for the momentum integrals: the caller's split points plus
/// `±π/2`, where the weak-coupling Lorentzian `1/(sin²2k + η⁴/4)` peaks.
fn momentum_breaks(q: &QuadratureSpec) -> Vec<f64> {
    let mut pts = q.split_points.clone();
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    for extra in [-FRAC_PI_2, FRAC_PI_2] {
        if extra > lo && extra < hi {
            pts.push(extra);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Initial panels per segment so that each panel spans about one period of
/// `e^{−i(2Jt cos k − kx)}`.
fn initial_panels(phase_rate: f64) -> usize {
    1 + (phase_rate / 4.0).ceil() as usize
}

fn exact(value: Complex64) -> Integral {
    Integral {
        value,
        error: 0.0,
        panels: 0,
        evaluations: 0,
    }
}

/// Bound-state contribution `α_b(t) = 2 p_b cos ω₊t`; zero at `g = 0`.
pub fn alpha_bound(p: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let (wp, _) = bound_energies(p);
    Ok(2.0 * atomic_weight(p.eta()) * (wp * t).cos())
}

/// Markovian limit `e^{−η²Jt/2}`.
pub fn alpha_markov(p: &ModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((-0.5 * p.eta() * p.eta() * p.hopping() * t).exp())
}

/// Band contribution `α_u(t)` by direct quadrature.
///
/// At `g = 0` the atom is decoupled and `α_u ≡ 1`.
pub fn alpha_unbound_quad(p: &ModelParams, t: f64, q: &QuadratureSpec) -> Result<Integral> {
    check_time(t)?;
    if !p.is_coupled() {
        return Ok(exact(Complex64::new(1.0, 0.0)));
    }
    let eta2 = p.eta() * p.eta();
    let quarter_eta4 = 0.25 * eta2 * eta2;
    let pref = 0.5 * eta2 * FRAC_1_PI;
    let wt = p.band_edge() * t;
    let f = |k: f64| {
        let (s, c) = k.sin_cos();
        let s2k = 2.0 * s * c;
        let weight = pref * s * s / (s2k * s2k + quarter_eta4);
        Complex64::from_polar(weight, -wt * c)
    };
    q.integrate(f, &momentum_breaks(q), initial_panels(wt))
}

/// Jacobi–Anger expansion of `α_u` with cached coefficients.
///
/// `Iₙ = (η²/2π) ∫ dk sin²k cos 2nk / (sin²2k + η⁴/4)` is computed by
/// quadrature on first use and kept; one series serves every time.
#[derive(Debug, Clone)]
pub struct BesselSeries {
    params: ModelParams,
    spec: QuadratureSpec,
    coefficients: Vec<f64>,
    errors: Vec<f64>,
}

/// A truncated Bessel sum and its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSum {
    pub value: f64,
    /// Highest `n` included.
    pub n_max: usize,
    /// Size of the last doubling step (or of the last term for a fixed
    /// truncation).
    pub tail: f64,
    /// Tail plus the propagated coefficient quadrature error.
    pub error: f64,
}

impl BesselSeries {
    pub fn new(p: &ModelParams, q: &QuadratureSpec) -> Result<Self> {
        q.validate()?;
        Ok(Self {
            params: *p,
            spec: q.clone(),
            coefficients: Vec::new(),
            errors: Vec::new(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Number of coefficients computed so far.
    pub fn cached(&self) -> usize {
        self.coefficients.len()
    }

    fn coefficient_integral(&self, n: usize) -> Result<Integral> {
        let eta2 = self.params.eta() * self.params.eta();
        let quarter_eta4 = 0.25 * eta2 * eta2;
        let pref = 0.5 * eta2 * FRAC_1_PI;
        let order = 2.0 * n as f64;
        let f = |k: f64| {
            let (s, c) = k.sin_cos();
            let s2k = 2.0 * s * c;
            Complex64::new(
                pref * s * s * (order * k).cos() / (s2k * s2k + quarter_eta4),
                0.0,
            )
        };
        self.spec
            .integrate(f, &momentum_breaks(&self.spec), initial_panels(order))
    }

    fn extend_to(&mut self, n_max: usize) -> Result<()> {
        let start = self.coefficients.len();
        if n_max < start {
            return Ok(());
        }
        if !self.params.is_coupled() {
            // The weight collapses onto k = ±π/2, so Iₙ = (−1)ⁿ and the
            // series sums to J₀ + 2 Σ J₂ₙ = 1.
            for n in start..=n_max {
                self.coefficients.push(if n % 2 == 0 { 1.0 } else { -1.0 });
                self.errors.push(0.0);
            }
            return Ok(());
        }
        let fresh: Vec<Integral> = (start..=n_max)
            .into_par_iter()
            .map(|n| self.coefficient_integral(n))
            .collect::<Result<_>>()?;
        for integral in fresh {
            self.coefficients.push(integral.value.re);
            self.errors.push(integral.error);
        }
        Ok(())
    }

    /// `Iₙ`.
    pub fn coefficient(&mut self, n: usize) -> Result<f64> {
        self.extend_to(n)?;
        Ok(self.coefficients[n])
    }

    fn partial_sum(&self, bessel: &[f64], n_max: usize) -> (f64, f64, f64) {
        let mut sum = 0.0;
        let mut err = 0.0;
        let mut last = 0.0;
        for n in 0..=n_max {
            let weight = if n == 0 {
                1.0
            } else if n % 2 == 0 {
                2.0
            } else {
                -2.0
            };
            let term = weight * self.coefficients[n] * bessel[2 * n];
            sum += term;
            err += (weight * bessel[2 * n]).abs() * self.errors[n];
            last = term;
        }
        (sum, err, last.abs())
    }

    /// `α_u(t)` summed through `n_max`, or, when `n_max` is `None`, with the
    /// order doubled until the added terms fall below
    /// [`BESSEL_TAIL_TOLERANCE`].
    pub fn evaluate(&mut self, t: f64, n_max: Option<usize>) -> Result<BesselSum> {
        check_time(t)?;
        let x = self.params.band_edge() * t;
        if x > MAX_ARGUMENT {
            return Err(Error::BesselRange { order: 0, x });
        }
        let limit = MAX_ORDER / 2;
        match n_max {
            Some(0) => Err(Error::InvalidParameter {
                name: "n_max",
                value: 0.0,
                reason: "at least one Bessel term beyond n = 0 is required",
            }),
            Some(n) => {
                if n > limit {
                    return Err(Error::BesselRange { order: 2 * n, x });
                }
                self.extend_to(n)?;
                let bessel = bessel_j_sequence(2 * n, x)?;
                let (value, err, last) = self.partial_sum(&bessel, n);
                Ok(BesselSum {
                    value,
                    n_max: n,
                    tail: last,
                    error: err + last,
                })
            }
            None => {
                // Past 2n ≈ 2Jt the Bessel factors decay super-exponentially,
                // so start there.
                let mut n = (16usize).max((x * 0.5).ceil() as usize + 16).min(limit);
                self.extend_to(n)?;
                let mut bessel = bessel_j_sequence(2 * n, x)?;
                let (mut value, _, _) = self.partial_sum(&bessel, n);
                loop {
                    let next = (2 * n).min(limit);
                    if next == n {
                        return Err(Error::SeriesDivergence {
                            n_max: n,
                            change: f64::NAN,
                        });
                    }
                    self.extend_to(next)?;
                    bessel = bessel_j_sequence(2 * next, x)?;
                    let (refined, err, _) = self.partial_sum(&bessel, next);
                    let change = (refined - value).abs();
                    value = refined;
                    n = next;
                    if change < BESSEL_TAIL_TOLERANCE {
                        return Ok(BesselSum {
                            value,
                            n_max: n,
                            tail: change,
                            error: err + change,
                        });
                    }
                    if n == limit {
                        return Err(Error::SeriesDivergence { n_max: n, change });
                    }
                }
            }
        }
    }
}

/// `α_u(t)` through the Bessel series with default coefficient quadrature.
pub fn alpha_unbound_bessel(p: &ModelParams, t: f64, n_max: Option<usize>) -> Result<f64> {
    let mut series = BesselSeries::new(p, &QuadratureSpec::default())?;
    Ok(series.evaluate(t, n_max)?.value)
}

/// Which evaluation produced a value of `α_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Quadrature,
    Bessel,
}

/// One value of `α_u` with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnboundAmplitude {
    pub value: Complex64,
    pub error: f64,
    pub route: Route,
}

fn alpha_unbound_with(
    p: &ModelParams,
    t: f64,
    q: &QuadratureSpec,
    series: Option<&mut BesselSeries>,
) -> Result<UnboundAmplitude> {
    match series {
        Some(s) if p.hopping() * t > BESSEL_SWITCH => {
            let sum = s.evaluate(t, None)?;
            Ok(UnboundAmplitude {
                value: Complex64::new(sum.value, 0.0),
                error: sum.error,
                route: Route::Bessel,
            })
        }
        _ => {
            let i = alpha_unbound_quad(p, t, q)?;
            Ok(UnboundAmplitude {
                value: i.value,
                error: i.error,
                route: Route::Quadrature,
            })
        }
    }
}

/// `α_u(t)`, by quadrature up to `Jt = 200` and by the Bessel series beyond.
pub fn alpha_unbound(p: &ModelParams, t: f64, q: &QuadratureSpec) -> Result<UnboundAmplitude> {
    check_time(t)?;
    if p.hopping() * t > BESSEL_SWITCH {
        let mut series = BesselSeries::new(p, q)?;
        alpha_unbound_with(p, t, q, Some(&mut series))
    } else {
        alpha_unbound_with(p, t, q, None)
    }
}

/// Bound-state part of the field, `ψ_b(x, t)`; zero at `g = 0`.
pub fn psi_bound(p: &ModelParams, x: impl Into<SiteIndex>, t: f64) -> Result<Complex64> {
    check_time(t)?;
    if !p.is_coupled() {
        return Ok(ZERO);
    }
    let x = x.into();
    let bs = bound_state(p, Branch::Plus)?;
    let amp = 2.0 * bs.p_b.sqrt() * bs.norm * bs.rho.powf(x.distance() as f64);
    let (sin, cos) = (bs.omega * t).sin_cos();
    Ok(if x.is_even() {
        Complex64::new(0.0, -amp * sin)
    } else {
        Complex64::new(amp * cos, 0.0)
    })
}

/// Band part of the field, `ψ_u(x, t)`, by quadrature.
pub fn psi_unbound_quad(
    p: &ModelParams,
    x: impl Into<SiteIndex>,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Integral> {
    check_time(t)?;
    if !p.is_coupled() {
        return Ok(exact(ZERO));
    }
    let xf = x.into().0 as f64;
    let eta = p.eta();
    let eta2 = eta * eta;
    let pref = eta * FRAC_1_PI;
    let wt = p.band_edge() * t;
    let f = |k: f64| {
        let (s, c) = k.sin_cos();
        let sc = 4.0 * s.abs() * c;
        let envelope = Complex64::from_polar(pref * s.abs(), -wt * c) / Complex64::new(sc, eta2);
        let reflected = eta2 / Complex64::new(eta2, sc);
        let kx = k * xf;
        envelope
            * (Complex64::from_polar(1.0, kx) - reflected * Complex64::from_polar(1.0, kx.abs()))
    };
    q.integrate(f, &momentum_breaks(q), initial_panels(wt + xf.abs()))
}

/// Atomic amplitudes on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionTrace {
    pub times: Vec<f64>,
    pub alpha_u: Vec<Complex64>,
    pub alpha_b: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
    /// Error estimate of each `α_u` value.
    pub alpha_error: Vec<f64>,
    pub routes: Vec<Route>,
}

impl EmissionTrace {
    /// `p_e(t) = |α(t)|²`.
    pub fn excited_population(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn max_error(&self) -> f64 {
        self.alpha_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Photon amplitudes on the window `[−X, X]` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFrame {
    pub t: f64,
    pub half_width: i64,
    /// Indexed by `x + X`.
    pub psi_u: Vec<Complex64>,
    pub psi_b: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    pub psi_error: Vec<f64>,
}

impl FieldFrame {
    pub fn sites(&self) -> impl Iterator<Item = i64> {
        -self.half_width..=self.half_width
    }

    /// `ψ(x, t)`, or `None` outside the window.
    pub fn at(&self, x: i64) -> Option<Complex64> {
        if x.abs() > self.half_width {
            return None;
        }
        Some(self.psi[(x + self.half_width) as usize])
    }

    /// `p_x = |ψ(x, t)|²` over the window.
    pub fn probabilities(&self) -> Vec<f64> {
        self.psi.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `Σ_{|x| ≤ radius} p_x`.
    pub fn weight_within(&self, radius: i64) -> f64 {
        let r = radius.min(self.half_width);
        (-r..=r)
            .map(|x| self.psi[(x + self.half_width) as usize].norm_sqr())
            .sum()
    }

    pub fn max_error(&self) -> f64 {
        self.psi_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Smallest window `X = ⌈2J t_max⌉ + 10` that contains the emitted wavefront.
pub fn containment_half_width(p: &ModelParams, t_max: f64) -> i64 {
    (p.band_edge() * t_max).ceil() as i64 + 10
}

fn check_grid(times: &[f64]) -> Result<()> {
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be non-decreasing".into(),
        ));
    }
    Ok(())
}

/// Atomic trace alone on a time grid.
pub fn emission_trace(p: &ModelParams, times: &[f64], q: &QuadratureSpec) -> Result<EmissionTrace> {
    check_grid(times)?;
    q.validate()?;

    let mut unbound = vec![None; times.len()];
    let mut series = if times.iter().any(|&t| p.hopping() * t > BESSEL_SWITCH) {
        Some(BesselSeries::new(p, q)?)
    } else {
        None
    };
    // Long times share one coefficient cache and run in order.
    if let Some(s) = series.as_mut() {
        for (slot, &t) in unbound.iter_mut().zip(times) {
            if p.hopping() * t > BESSEL_SWITCH {
                *slot = Some(alpha_unbound_with(p, t, q, Some(s))?);
            }
        }
    }
    let short: Vec<(usize, UnboundAmplitude)> = unbound
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| i)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| Ok((i, alpha_unbound_with(p, times[i], q, None)?)))
        .collect::<Result<_>>()?;
    for (i, v) in short {
        unbound[i] = Some(v);
    }

    let mut trace = EmissionTrace {
        times: times.to_vec(),
        alpha_u: Vec::with_capacity(times.len()),
        alpha_b: Vec::with_capacity(times.len()),
        alpha: Vec::with_capacity(times.len()),
        alpha_error: Vec::with_capacity(times.len()),
        routes: Vec::with_capacity(times.len()),
    };
    for (&t, u) in times.iter().zip(unbound) {
        let u = u.expect("every time was evaluated");
        let b = Complex64::new(alpha_bound(p, t)?, 0.0);
        trace.alpha_u.push(u.value);
        trace.alpha_b.push(b);
        trace.alpha.push(u.value + b);
        trace.alpha_error.push(u.error);
        trace.routes.push(u.route);
    }
    Ok(trace)
}

/// Field frame at one time.
pub fn field_frame(
    p: &ModelParams,
    t: f64,
    half_width: i64,
    q: &QuadratureSpec,
) -> Result<FieldFrame> {
    check_time(t)?;
    if half_width < 0 {
        return Err(Error::InvalidParameter {
            name: "window",
            value: half_width as f64,
            reason: "window half width must be non-negative",
        });
    }
    let values: Vec<(Complex64, Complex64, f64)> = (-half_width..=half_width)
        .into_par_iter()
        .map(|x| {
            let u = psi_unbound_quad(p, x, t, q)?;
            let b = psi_bound(p, x, t)?;
            Ok((u.value, b, u.error))
        })
        .collect::<Result<_>>()?;
    let mut frame = FieldFrame {
        t,
        half_width,
        psi_u: Vec::with_capacity(values.len()),
        psi_b: Vec::with_capacity(values.len()),
        psi: Vec::with_capacity(values.len()),
        psi_error: Vec::with_capacity(values.len()),
    };
    for (u, b, e) in values {
        frame.psi_u.push(u);
        frame.psi_b.push(b);
        frame.psi.push(u + b);
        frame.psi_error.push(e);
    }
    Ok(frame)
}

/// Full emission dynamics: the atomic trace on `times` and one field frame
/// per time on `[−X, X]`.
///
/// Norm checks are only meaningful when `X` is at least
/// [`containment_half_width`] of the last time.
pub fn evolve(
    p: &ModelParams,
    times: &[f64],
    half_width: i64,
    q: &QuadratureSpec,
) -> Result<(EmissionTrace, Vec<FieldFrame>)> {
    let trace = emission_trace(p, times, q)?;
    let frames = times
        .iter()
        .map(|&t| field_frame(p, t, half_width, q))
        .collect::<Result<Vec<_>>>()?;
    Ok((trace, frames))
}

/// Uniform grid of `count` times from `start` to `stop` inclusive.
pub fn time_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    check_time(start)?;
    check_time(stop)?;
    if stop < start {
        return Err(Error::InvalidInput(format!(
            "time grid runs backwards: {start} > {stop}"
        )));
    }
    Ok(match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    })
}
