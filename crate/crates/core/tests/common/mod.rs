//! Test-side reference values computed without the crate's special functions.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `ln Gamma(x)` for `x > 0`: shift above 20, then the Stirling series.
pub fn ln_gamma_ref(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut x = x;
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let x2 = x * x;
    let series =
        1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2) - 1.0 / (1680.0 * x * x2 * x2 * x2);
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// `Gamma(x)` for any non-pole real `x`, by reflection below 1/2.
pub fn gamma_ref(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_ref(1.0 - x))
    } else {
        ln_gamma_ref(x).exp()
    }
}

/// `omega_m` from `omega_1 = 2`, `omega_2 = 2 pi`, `omega_{m+2} = 2 pi omega_m / m`.
pub fn sphere_area_ref(m: u32) -> f64 {
    let (mut a, mut b) = (2.0, 2.0 * PI);
    if m == 1 {
        return a;
    }
    for j in 1..m - 1 {
        (a, b) = (b, 2.0 * PI * a / j as f64);
    }
    b
}

/// `k_{n,alpha}` from [`gamma_ref`].
pub fn normalization_ref(n: u32, alpha: f64) -> f64 {
    let n = n as f64;
    gamma_ref(0.5 * (n + alpha)) / (PI.powf(0.5 * n) * gamma_ref(0.5 * alpha))
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}
