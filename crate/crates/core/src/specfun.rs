//! Gamma, log-gamma, beta, unit-sphere areas and the kernel normalization constant.
//!
//! Sphere areas follow the convention `omega(m) = 2 pi^{m/2} / Gamma(m/2)`: the
//! surface measure of the unit sphere sitting in `R^m`, so `omega(2) = 2 pi`,
//! `omega(3) = 4 pi` and `omega(1) = 2` (two points).

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Exact factorials, used for small positive integer arguments.
const FACTORIAL: [f64; 23] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
    51090942171709440000.0,
    1124000727777607680000.0,
];

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Lanczos series for `x >= 0.5`, returning `(sum, w)` with `w = x - 1 + g + 0.5`.
fn lanczos_parts(x: f64) -> (f64, f64) {
    let x = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    (sum, x + LANCZOS_G + 0.5)
}

/// Gamma function.
///
/// Lanczos approximation (g = 7, 9 terms) for `x >= 0.5`, reflection below.
/// Returns `Error::GammaPole` at `0, -1, -2, ...`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if is_pole(x) {
        return Err(Error::GammaPole(x));
    }
    if x == x.floor() && x >= 1.0 && x <= FACTORIAL.len() as f64 {
        return Ok(FACTORIAL[x as usize - 1]);
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    let (sum, w) = lanczos_parts(x);
    // Split the power so w^(x+0.5) does not overflow before the exponential damps it.
    let half = w.powf(0.5 * (x - 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-w).exp()) * sum)
}

/// `ln |Gamma(x)|` together with the sign of `Gamma(x)`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_pole(x) {
        return Err(Error::GammaPole(x));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        let (lg, _) = ln_gamma_signed(1.0 - x)?;
        return Ok((PI.ln() - s.abs().ln() - lg, s.signum()));
    }
    let (sum, w) = lanczos_parts(x);
    Ok((LN_SQRT_2PI + (x - 0.5) * w.ln() - w + sum.ln(), 1.0))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::InvalidParams(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_signed(x)?.0)
}

/// `Gamma(a) / Gamma(b)`, switching to log-space when either factor would overflow.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if a.abs() < 150.0 && b.abs() < 150.0 {
        return Ok(gamma(a)? / gamma(b)?);
    }
    let (la, sa) = ln_gamma_signed(a)?;
    let (lb, sb) = ln_gamma_signed(b)?;
    Ok(sa * sb * (la - lb).exp())
}

/// Euler beta function `B(a, b)` for positive arguments.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "beta requires positive arguments, got ({a}, {b})"
        )));
    }
    if a + b < 150.0 {
        Ok(gamma(a)? * gamma(b)? / gamma(a + b)?)
    } else {
        Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
    }
}

/// `int_0^{pi/2} sin^a(t) cos^b(t) dt = B((a+1)/2, (b+1)/2) / 2` for `a, b > -1`.
pub fn sin_cos_moment(sin_power: f64, cos_power: f64) -> Result<f64> {
    if sin_power <= -1.0 || cos_power <= -1.0 {
        return Err(Error::Singularity {
            exponent: sin_power.min(cos_power),
        });
    }
    Ok(0.5 * beta(0.5 * (sin_power + 1.0), 0.5 * (cos_power + 1.0))?)
}

/// Surface measure of the unit sphere in `R^m`.
pub fn sphere_area(m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParams("sphere_area requires m >= 1".into()));
    }
    let half = 0.5 * m as f64;
    Ok(2.0 * PI.powf(half) / gamma(half)?)
}

/// Volume of the unit ball in `R^m`, `omega(m) / m`.
pub fn ball_volume(m: u32) -> Result<f64> {
    Ok(sphere_area(m)? / m as f64)
}

/// Normalization constant `Gamma((n+alpha)/2) / (pi^{n/2} Gamma(alpha/2))` of the kernel
/// `x_{n+1}^alpha / |y - x|^{n+alpha}`.
///
/// For `alpha <= 0` the kernel mass diverges and the value is the formal gamma
/// expression; it is negative for `alpha` in `(-2, 0)`.
pub fn normalization(n: u32, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !alpha.is_finite() || alpha <= -nf {
        return Err(Error::InvalidParams(format!(
            "normalization requires alpha > -n (alpha = {alpha}, n = {n})"
        )));
    }
    if is_pole(0.5 * alpha) {
        return Err(Error::DegenerateNormalization(alpha));
    }
    let ratio = gamma_ratio(0.5 * (nf + alpha), 0.5 * alpha)?;
    Ok(ratio / PI.powf(0.5 * nf))
}

/// True when `normalization(n, alpha)` is only a formal value (divergent kernel mass).
pub fn is_formal_normalization(alpha: f64) -> bool {
    alpha <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(|i| i as f64).product()
    }

    #[test]
    fn gamma_small_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5).unwrap(), 0.5 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -2.0, -7.0] {
            assert!(matches!(gamma(x), Err(Error::GammaPole(_))));
        }
    }

    #[test]
    fn gamma_matches_factorials_up_to_170() {
        for k in 1..=170u32 {
            let expected = factorial(k);
            let got = gamma(k as f64 + 1.0).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_half_integers_by_recurrence() {
        let mut expected = PI.sqrt();
        let mut x = 0.5;
        while x < 170.0 {
            assert_relative_eq!(gamma(x).unwrap(), expected, max_relative = 1e-12);
            expected *= x;
            x += 1.0;
        }
    }

    #[test]
    fn ln_gamma_consistent_with_gamma() {
        for &x in &[0.1, 0.7, 2.5, 10.3, 55.5, 150.25, -0.3, -1.5, -3.7] {
            let (lg, sign) = ln_gamma_signed(x).unwrap();
            let g = gamma(x).unwrap();
            assert_eq!(sign, g.signum());
            assert_relative_eq!(lg, g.abs().ln(), epsilon = 1e-12, max_relative = 1e-12);
        }
        // Beyond the f64 range of Gamma: Stirling with two correction terms.
        let x = 1000.0f64;
        let stirling = (x - 0.5) * x.ln() - x + LN_SQRT_2PI + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3));
        assert_relative_eq!(ln_gamma(x).unwrap(), stirling, max_relative = 1e-13);
    }

    #[test]
    fn duplication_identity() {
        for n in 2..=15u32 {
            let nf = n as f64;
            let lhs = gamma(nf / 2.0).unwrap() * gamma((nf + 1.0) / 2.0).unwrap();
            let rhs = 2f64.powf(1.0 - nf) * PI.sqrt() * gamma(nf).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-15);
        assert!(sphere_area(0).is_err());
        // omega(m+2) = 2 pi omega(m) / m
        for m in 1..40u32 {
            let lhs = sphere_area(m + 2).unwrap();
            let rhs = 2.0 * PI * sphere_area(m).unwrap() / m as f64;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalization_examples() {
        assert_relative_eq!(normalization(2, 1.0).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(normalization(3, 1.0).unwrap(), 1.0 / (PI * PI), max_relative = 1e-14);
        assert_relative_eq!(normalization(2, 2.0).unwrap(), 1.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn normalization_is_classical_poisson_constant_at_alpha_one() {
        for n in 2..=10u32 {
            let nf = n as f64;
            let classical = gamma((nf + 1.0) / 2.0).unwrap() / PI.powf((nf + 1.0) / 2.0);
            assert_relative_eq!(normalization(n, 1.0).unwrap(), classical, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalization_errors() {
        assert!(matches!(normalization(2, -2.0), Err(Error::InvalidParams(_))));
        assert!(matches!(normalization(3, -2.0), Err(Error::DegenerateNormalization(_))));
        assert!(matches!(normalization(2, 0.0), Err(Error::DegenerateNormalization(_))));
        assert!(normalization(2, -0.5).unwrap() < 0.0);
    }

    #[test]
    fn normalization_large_dimension_uses_log_ratio() {
        let n = 150u32;
        let k = normalization(n, 3.0).unwrap();
        let direct = (ln_gamma(76.5).unwrap() - ln_gamma(1.5).unwrap() - 75.0 * PI.ln()).exp();
        assert_relative_eq!(k, direct, max_relative = 1e-11);
    }

    #[test]
    fn moments_match_elementary_integrals() {
        // int sin cos^3 = 1/4
        assert_relative_eq!(sin_cos_moment(1.0, 3.0).unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(sin_cos_moment(0.0, 0.0).unwrap(), PI / 2.0, max_relative = 1e-14);
        assert!(sin_cos_moment(0.0, -1.0).is_err());
    }
}
