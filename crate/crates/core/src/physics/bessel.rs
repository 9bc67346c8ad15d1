//! Bessel functions J0 and Y0 of real positive argument.
//!
//! Small arguments use the ascending series, moderate ones Miller's backward
//! recurrence (with the Neumann series for Y0), large ones the Hankel
//! asymptotic expansion. Absolute accuracy is around 1e-15.

use std::f64::consts::{FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 0.25;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Returns `(J0(x), Y0(x))` for `x > 0`.
pub fn j0_y0(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x < SERIES_LIMIT {
        ascending(x)
    } else if x < ASYMPTOTIC_LIMIT {
        miller(x)
    } else {
        asymptotic(x)
    }
}

fn ascending(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut j0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..30 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        tail -= harmonic * term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    let y0 = 2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j0 + tail);
    (j0, y0)
}

fn miller(x: f64) -> (f64, f64) {
    // Start well above x so the recessive solution dominates.
    let mut m = (x + 12.0 * x.sqrt() + 30.0) as usize;
    m += m % 2;
    let two_over_x = 2.0 / x;

    let mut j_next = 0.0; // J_{k+1}
    let mut j_k = 1e-300; // J_k, unnormalized
    let mut norm = 0.0; // J0 + 2 sum J_{2k}
    let mut neumann = 0.0; // sum (-1)^k J_{2k} / k
    let mut j0 = 0.0;

    for k in (1..=m).rev() {
        let j_prev = k as f64 * two_over_x * j_k - j_next;
        j_next = j_k;
        j_k = j_prev;
        let order = k - 1;
        if order == 0 {
            j0 = j_k;
            norm += j_k;
        } else if order % 2 == 0 {
            norm += 2.0 * j_k;
            let half = (order / 2) as f64;
            let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
            neumann += sign * j_k / half;
        }
        if j_k.abs() > 1e250 {
            j_k *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            neumann *= 1e-250;
        }
    }

    let j0 = j0 / norm;
    let neumann = neumann / norm;
    let y0 = 2.0 / PI * ((0.5 * x).ln() + EULER_GAMMA) * j0 - 4.0 / PI * neumann;
    (j0, y0)
}

fn asymptotic(x: f64) -> (f64, f64) {
    // a_k = prod_{j=1..k} (2j-1)^2 / (k! 8^k), P uses even k, Q odd k.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        a *= (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
        if a > prev {
            break;
        }
        prev = a;
        match k % 4 {
            1 => q -= a,
            2 => p -= a,
            3 => q += a,
            _ => p += a,
        }
        if a < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}
