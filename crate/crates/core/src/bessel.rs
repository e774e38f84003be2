//! Bessel functions of the first kind, `J_n(x)`, for integer `n ≥ 0` and
//! real `x ≥ 0`.
//!
//! Whole sequences `J_0 … J_n` come from Miller's downward recurrence
//! normalized by `J_0 + 2 Σ_k J_{2k} = 1`. Small arguments use the
//! ascending series.

use crate::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: usize = 8192;
/// Largest supported argument.
pub const MAX_ARGUMENT: f64 = 2000.0;

const SERIES_LIMIT: f64 = 2.0;
const RESCALE: f64 = 1e250;

fn check_envelope(order: usize, x: f64) -> Result<()> {
    if order > MAX_ORDER || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::BesselRange { order, x });
    }
    Ok(())
}

/// `J_n(x)`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    check_envelope(n, x)?;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x < SERIES_LIMIT {
        return Ok(ascending_series(n, x, leading_term(n, x)));
    }
    Ok(miller(n, x)[n])
}

/// `[J_0(x), J_1(x), …, J_{n_max}(x)]`.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_envelope(n_max, x)?;
    if x == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if x < SERIES_LIMIT {
        let mut lead = 1.0;
        let mut out = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            if n > 0 {
                lead *= 0.5 * x / n as f64;
            }
            out.push(ascending_series(n, x, lead));
        }
        return Ok(out);
    }
    Ok(miller(n_max, x))
}

/// `(x/2)^n / n!`, underflowing gracefully to zero.
fn leading_term(n: usize, x: f64) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * 0.5 * x / i as f64)
}

/// `Σ_k (−1)^k (x/2)^{2k+n} / (k! (n+k)!)` given the `k = 0` term.
fn ascending_series(n: usize, x: f64, lead: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = lead;
    let mut sum = lead;
    let mut k = 0usize;
    while term.abs() > 1e-18 * sum.abs() && k < 200 {
        k += 1;
        term *= -q / (k as f64 * (n + k) as f64);
        sum += term;
    }
    sum
}

fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = (n_max as f64).max(x.ceil());
    let mut start = (top + 20.0 + 14.0 * x.max(1.0).cbrt() + (60.0 * top).sqrt()).ceil() as usize;
    start += start % 2;

    let mut out = vec![0.0; n_max + 1];
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1.0; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let mut prev = 2.0 * k as f64 / x * cur - next;
        let m = k - 1;
        if m <= n_max {
            out[m] = prev;
        }
        if m == 0 {
            norm += prev;
        } else if m % 2 == 0 {
            norm += 2.0 * prev;
        }
        if prev.abs() > RESCALE {
            let s = 1.0 / RESCALE;
            prev *= s;
            cur *= s;
            norm *= s;
            if m <= n_max {
                out[m..].iter_mut().for_each(|v| *v *= s);
            }
        }
        next = cur;
        cur = prev;
    }
    out.iter_mut().for_each(|v| *v /= norm);
    out
}
