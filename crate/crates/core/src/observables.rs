//! Populations and localization measures.
//!
//! Long after the emission only the two bound states keep the excitation
//! near the atom. Their field part is
//! `ψ_b = A e^{−|x|/λ} χ(x, t)` with
//!
//! ```text
//! A = η⁵ / ((η⁴ + 2√(η⁴+4) + 4) √(√(η⁴+4) − 2))
//! λ = 1 / ln[(√(√(η⁴+4) − 2) + √(√(η⁴+4) + 2)) / 2]
//! ```
//!
//! and its time average summed over the lattice is the localized photon
//! energy `ε̄_floc = A² coth(1/λ) / 2 = η⁴/(2η⁴ + 8)`. The trapped atomic
//! energy is the average of `α_b²`, `ε̄_atr = 2p_b²`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::dynamics::{EmissionTrace, FieldFrame};
use crate::model::ModelParams;
use crate::spectrum::{atomic_weight, bound_energies, decay_factor};
use crate::{Error, Result};

/// Threshold level that reproduces both quoted crossover couplings.
pub const DEFAULT_EPS_C: f64 = 2.7e-3;

/// Averages need at least this many full periods.
pub const MIN_PERIODS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationMetrics {
    pub eta: f64,
    /// Amplitude `A` of the localized field envelope.
    pub amplitude: f64,
    /// Localization length `λ` in sites.
    pub lambda: f64,
    /// Time-averaged localized photon probability.
    pub eps_floc: f64,
    /// Time-averaged trapped atomic probability.
    pub eps_atr: f64,
}

impl LocalizationMetrics {
    /// `A² coth(1/λ) / 2`, which must agree with `eps_floc`.
    pub fn floc_from_envelope(&self) -> f64 {
        0.5 * self.amplitude * self.amplitude / (1.0 / self.lambda).tanh()
    }
}

/// Localization amplitude, written as `η³ √(√(η⁴+4) + 2) / (η⁴ + 2√(η⁴+4) + 4)`
/// to avoid the cancellation in `√(η⁴+4) − 2` at small `η`.
fn envelope_amplitude(eta: f64) -> f64 {
    let eta4 = eta.powi(4);
    let q = (eta4 + 4.0).sqrt();
    eta.powi(3) * (q + 2.0).sqrt() / (eta4 + 2.0 * q + 4.0)
}

/// `λ` through `ln(1 + u)` with `u = (√(q−2) + √(q+2) − 2)/2`, `q = √(η⁴+4)`.
fn localization_length(eta: f64) -> f64 {
    let eta2 = eta * eta;
    let q = (eta2 * eta2 + 4.0).sqrt();
    let w = (q + 2.0).sqrt();
    let gap = eta2 / w; // √(q − 2)
    let w_minus_two = gap * gap / (w + 2.0);
    1.0 / (0.5 * (gap + w_minus_two)).ln_1p()
}

fn floc(eta: f64) -> f64 {
    let eta4 = eta.powi(4);
    eta4 / (2.0 * eta4 + 8.0)
}

fn atr(eta: f64) -> f64 {
    let pb = atomic_weight(eta);
    2.0 * pb * pb
}

pub fn localization_metrics(p: &ModelParams) -> Result<LocalizationMetrics> {
    if !p.is_coupled() {
        return Err(Error::Degenerate(
            "the localization length diverges at g = 0",
        ));
    }
    let eta = p.eta();
    Ok(LocalizationMetrics {
        eta,
        amplitude: envelope_amplitude(eta),
        lambda: localization_length(eta),
        eps_floc: floc(eta),
        eps_atr: atr(eta),
    })
}

/// Which localization measure a threshold refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Localized photon energy `ε̄_floc`.
    Floc,
    /// Trapped atomic energy `ε̄_atr`.
    Atr,
}

impl Metric {
    pub fn evaluate(self, eta: f64) -> f64 {
        match self {
            Metric::Floc => floc(eta),
            Metric::Atr => atr(eta),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Floc => "floc",
            Metric::Atr => "atr",
        }
    }
}

/// Smallest `η` with `metric(η) ≥ eps_c`, by bisection to `1e−10` in `η`.
///
/// Both metrics increase monotonically from `0` at `η = 0` to `1/2` as
/// `η → ∞`, so any level in `(0, 1/2)` is crossed exactly once.
pub fn threshold(metric: Metric, eps_c: f64) -> Result<f64> {
    if !(eps_c.is_finite() && eps_c > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps_c",
            value: eps_c,
            reason: "threshold level must be positive",
        });
    }
    if eps_c >= 0.5 {
        return Err(Error::Unreachable { eps_c });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while metric.evaluate(hi) < eps_c {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Unreachable { eps_c });
        }
    }
    while hi - lo > 1e-10 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if metric.evaluate(mid) >= eps_c {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Mean of a sampled signal over the largest whole number of periods
/// `2π/ω` that fits after `transient`.
///
/// The integral is a trapezoid rule on the samples, closed by linear
/// interpolation at the end of the last full period.
pub fn long_time_average(times: &[f64], signal: &[f64], omega: f64, transient: f64) -> Result<f64> {
    if times.len() != signal.len() {
        return Err(Error::InvalidInput(format!(
            "{} times but {} samples",
            times.len(),
            signal.len()
        )));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            value: omega,
            reason: "averaging frequency must be positive",
        });
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("times must increase strictly".into()));
    }
    let start = times.partition_point(|&t| t < transient);
    let (ts, ys) = (&times[start..], &signal[start..]);
    let period = 2.0 * PI / omega;
    let span = match (ts.first(), ts.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let periods = span / period;
    // Absorb rounding in caller grids that end exactly on a period.
    let whole = (periods + 1e-9).floor();
    if whole < MIN_PERIODS as f64 {
        return Err(Error::InsufficientWindow {
            periods,
            required: MIN_PERIODS,
        });
    }
    let end = ts[0] + whole * period;
    let mut integral = 0.0;
    for i in 1..ts.len() {
        let (t0, t1) = (ts[i - 1], ts[i]);
        if t0 >= end {
            break;
        }
        let (y0, y1) = (ys[i - 1], ys[i]);
        if t1 <= end {
            integral += 0.5 * (y0 + y1) * (t1 - t0);
        } else {
            let y_end = y0 + (y1 - y0) * (end - t0) / (t1 - t0);
            integral += 0.5 * (y0 + y_end) * (end - t0);
        }
    }
    Ok(integral / (end - ts[0]))
}

/// `p_e(t)` and `p_x(t)` for every frame, `x` running over the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub p_e: Vec<f64>,
    pub p_x: Vec<Vec<f64>>,
}

pub fn probability_profiles(trace: &EmissionTrace, frames: &[FieldFrame]) -> Profiles {
    Profiles {
        p_e: trace.excited_population(),
        p_x: frames.iter().map(FieldFrame::probabilities).collect(),
    }
}

/// Angular frequency of the strongest oscillation in a sampled signal.
///
/// The periodogram `|Σ_j (s_j − s̄) e^{−iωt_j}|²` is scanned over
/// `(0, π/Δt]` on a grid finer than the resolution `2π/T`; the best grid
/// point is then refined by golden-section search on the least-squares fit
/// `s ≈ a + b cos ωt + c sin ωt`, which, unlike the periodogram peak, is not
/// pulled by the mirror frequency on a finite record.
pub fn dominant_frequency(times: &[f64], signal: &[f64]) -> Result<f64> {
    if times.len() != signal.len() || times.len() < 4 {
        return Err(Error::InvalidInput(
            "need at least four paired samples".into(),
        ));
    }
    let span = times[times.len() - 1] - times[0];
    let dt = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if !(span > 0.0 && dt > 0.0) {
        return Err(Error::InvalidInput("times must increase strictly".into()));
    }
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let power = |w: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (&t, &s) in times.iter().zip(signal) {
            let (sin, cos) = (w * t).sin_cos();
            re += (s - mean) * cos;
            im -= (s - mean) * sin;
        }
        re * re + im * im
    };
    let step = 2.0 * PI / span / 8.0;
    let nyquist = PI / dt;
    let mut best = (step, power(step));
    let mut w = 2.0 * step;
    while w <= nyquist {
        let v = power(w);
        if v > best.1 {
            best = (w, v);
        }
        w += step;
    }
    let explained = |w: f64| {
        let mut m = Matrix3::zeros();
        let mut r = Vector3::zeros();
        for (&t, &s) in times.iter().zip(signal) {
            let (sin, cos) = (w * t).sin_cos();
            let basis = Vector3::new(1.0, cos, sin);
            m += basis * basis.transpose();
            r += basis * s;
        }
        match m.lu().solve(&r) {
            Some(c) => c.dot(&r),
            None => f64::NEG_INFINITY,
        }
    };
    let (mut a, mut b) = ((best.0 - step).max(0.5 * step), best.0 + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-12 * best.0 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if explained(c) > explained(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// `ω₊ − 2J`, the gap between the upper bound state and the band.
pub fn bound_gap(p: &ModelParams) -> f64 {
    let (wp, _) = bound_energies(p);
    wp - p.band_edge()
}

/// Decay factor `ρ = e^{−1/λ}` of the localized envelope.
pub fn envelope_ratio(p: &ModelParams) -> f64 {
    decay_factor(p.eta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{psi_bound, QuadratureSpec};
    use crate::spectrum::{bound_state, Branch};
    use approx::assert_abs_diff_eq;

    fn unit(eta: f64) -> ModelParams {
        ModelParams::from_eta(eta).unwrap()
    }

    fn log_grid(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| 10f64.powf(-2.0 + 4.0 * i as f64 / (n - 1) as f64))
    }

    #[test]
    fn closed_form_examples() {
        let m = localization_metrics(&unit(2.0)).unwrap();
        assert_abs_diff_eq!(m.eps_floc, 0.4, epsilon = 1e-15);
        let q = 20f64.sqrt();
        assert_abs_diff_eq!(
            m.eps_atr,
            256.0 / (2.0 * (20.0 + 2.0 * q).powi(2)),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(m.eps_atr, 0.15278, epsilon = 1e-5);
        let big = localization_metrics(&unit(1e3)).unwrap();
        assert!((big.eps_floc - 0.5).abs() < 1e-6 && (big.eps_atr - 0.5).abs() < 1e-2);
        assert!(matches!(
            localization_metrics(&unit(0.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn stable_forms_match_textbook_forms() {
        for eta in [0.3, 0.8, 1.0, 2.0, 5.0] {
            let eta4: f64 = eta * eta * eta * eta;
            let q = (eta4 + 4.0).sqrt();
            let a = eta.powi(5) / ((eta4 + 2.0 * q + 4.0) * (q - 2.0).sqrt());
            let lam = 1.0 / (((q - 2.0).sqrt() + (q + 2.0).sqrt()) / 2.0).ln();
            let m = localization_metrics(&unit(eta)).unwrap();
            assert_abs_diff_eq!(m.amplitude, a, epsilon = 1e-13);
            assert_abs_diff_eq!(m.lambda, lam, epsilon = 1e-10 * lam);
            let bs = bound_state(&unit(eta), Branch::Plus).unwrap();
            assert_abs_diff_eq!(m.lambda, bs.localization_length(), epsilon = 1e-10 * lam);
        }
    }

    #[test]
    fn envelope_identity() {
        for eta in log_grid(60) {
            let m = localization_metrics(&unit(eta)).unwrap();
            assert!(
                (m.floc_from_envelope() - m.eps_floc).abs() < 1e-10,
                "eta={eta}"
            );
        }
    }

    #[test]
    fn floc_is_time_averaged_lattice_sum() {
        // ⟨Σ_x |ψ_b|²⟩ over one period, by direct summation over sites
        // with the geometric remainder bounded explicitly.
        for eta in [0.5, 0.8, 2.0] {
            let p = unit(eta);
            let bs = bound_state(&p, Branch::Plus).unwrap();
            let period = 2.0 * PI / bs.omega;
            let samples = 64;
            let x_max = 4000i64;
            let mut avg = 0.0;
            for j in 0..samples {
                let t = period * j as f64 / samples as f64;
                let s: f64 = (-x_max..=x_max)
                    .map(|x| psi_bound(&p, x, t).unwrap().norm_sqr())
                    .sum();
                avg += s / samples as f64;
            }
            let tail = 8.0 * bs.p_b * bs.norm.powi(2) * bs.rho.powf(2.0 * x_max as f64)
                / (1.0 - bs.rho * bs.rho);
            assert!(tail < 1e-12);
            let m = localization_metrics(&p).unwrap();
            assert!((avg - m.eps_floc).abs() < 1e-8 + tail, "eta={eta}");
        }
    }

    #[test]
    fn dominance_and_scaling() {
        for eta in log_grid(200) {
            let m = localization_metrics(&unit(eta)).unwrap();
            assert!(m.eps_floc > m.eps_atr, "eta={eta}");
            assert!(m.eps_atr >= 0.0 && m.eps_floc < 0.5);
        }
        let m = localization_metrics(&unit(0.01)).unwrap();
        assert!((m.eps_floc / 1e-8 / 0.125 - 1.0).abs() < 0.01);
        assert!((m.eps_atr / 1e-16 / 0.0078125 - 1.0).abs() < 0.01);
    }

    #[test]
    fn lambda_decreases_with_coupling() {
        let lams: Vec<f64> = log_grid(50)
            .map(|e| localization_metrics(&unit(e)).unwrap().lambda)
            .collect();
        assert!(lams.windows(2).all(|w| w[1] < w[0]));
        assert!(lams.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn thresholds() {
        let f = threshold(Metric::Floc, DEFAULT_EPS_C).unwrap();
        let a = threshold(Metric::Atr, DEFAULT_EPS_C).unwrap();
        assert!((0.36..=0.42).contains(&f), "{f}");
        assert!((0.86..=0.94).contains(&a), "{a}");
        assert!((Metric::Floc.evaluate(f) - DEFAULT_EPS_C).abs() < 1e-9);
        assert!(threshold(Metric::Floc, 1e-12).unwrap() < 1e-2);
        assert!(matches!(
            threshold(Metric::Atr, 0.5),
            Err(Error::Unreachable { .. })
        ));
        assert!(threshold(Metric::Atr, 0.0).is_err());
    }

    #[test]
    fn thresholds_are_monotone_in_level() {
        for metric in [Metric::Floc, Metric::Atr] {
            let mut prev = 0.0;
            for i in 1..40 {
                let eps = 0.49 * i as f64 / 40.0;
                let eta = threshold(metric, eps).unwrap();
                assert!(eta > prev);
                prev = eta;
            }
        }
    }

    #[test]
    fn averages() {
        let omega = 1.7;
        let times: Vec<f64> = (0..4001).map(|i| i as f64 * 0.01).collect();
        let constant = vec![0.3; times.len()];
        assert_abs_diff_eq!(
            long_time_average(&times, &constant, omega, 0.0).unwrap(),
            0.3,
            epsilon = 1e-14
        );
        let pb = 0.12;
        let ab2: Vec<f64> = times
            .iter()
            .map(|t| 4.0 * pb * pb * (omega * t).cos().powi(2))
            .collect();
        let avg = long_time_average(&times, &ab2, omega, 3.0).unwrap();
        assert_abs_diff_eq!(avg, 2.0 * pb * pb, epsilon = 1e-6);
        assert!(matches!(
            long_time_average(&times[..500], &ab2[..500], omega, 0.0),
            Err(Error::InsufficientWindow { .. })
        ));
    }

    #[test]
    fn frequency_of_rabi_like_signal() {
        let w = 2.3;
        let times: Vec<f64> = (0..600).map(|i| i as f64 * 0.05).collect();
        let s: Vec<f64> = times.iter().map(|t| (w * t).cos().powi(2)).collect();
        let f = dominant_frequency(&times, &s).unwrap();
        assert!((f / (2.0 * w) - 1.0).abs() < 1e-6, "{f}");
    }

    #[test]
    fn profiles_at_start() {
        let p = unit(2.0);
        let (trace, frames) =
            crate::dynamics::evolve(&p, &[0.0], 4, &QuadratureSpec::default()).unwrap();
        let prof = probability_profiles(&trace, &frames);
        assert!((prof.p_e[0] - 1.0).abs() < 1e-9);
        assert_eq!(prof.p_x[0].len(), 9);
        assert!(prof.p_x[0].iter().all(|&v| v < 1e-16));
    }

    #[test]
    fn rabi_node_at_strong_coupling() {
        let p = unit(10.0);
        let (wp, _) = bound_energies(&p);
        let (trace, _) =
            crate::dynamics::evolve(&p, &[PI / (2.0 * wp)], 0, &QuadratureSpec::default()).unwrap();
        assert!(probability_profiles(&trace, &[]).p_e[0] < 1e-3);
    }

    #[test]
    fn localized_light_without_trapping() {
        let p = unit(0.8);
        let (trace, frames) =
            crate::dynamics::evolve(&p, &[95.5], 10, &QuadratureSpec::default()).unwrap();
        let prof = probability_profiles(&trace, &frames);
        let local: f64 = prof.p_x[0].iter().sum();
        let floc = localization_metrics(&p).unwrap().eps_floc;
        assert!(prof.p_e[0] < 0.01);
        assert!(
            local > 0.5 * floc && local < 1.5 * floc,
            "{local} vs {floc}"
        );
    }

    #[test]
    fn gap_and_ratio() {
        assert_abs_diff_eq!(bound_gap(&unit(1.0)), 0.0581710272714924, epsilon = 1e-14);
        let m = localization_metrics(&unit(1.0)).unwrap();
        assert_abs_diff_eq!(
            envelope_ratio(&unit(1.0)),
            (-1.0 / m.lambda).exp(),
            epsilon = 1e-14
        );
    }
}
