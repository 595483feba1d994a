//! Brute-force validators working directly on the sphere `S^n` in `R^{n+1}`.
//!
//! Nothing here uses the reduced double integral: integrands are evaluated in
//! Cartesian form at points of the sphere, parametrized by standard
//! hyperspherical angles around `e_{n+1}`.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{Direction, ProblemParams};
use crate::error::{Error, Result};
use crate::quadrature::{IntegralResult, Integrator, QuadratureConfig};
use crate::specfun::sphere_area;

/// Relative agreement demanded between the half-sphere integral and half the
/// whole-sphere integral.
pub const HALF_WHOLE_AGREEMENT: f64 = 1e-10;

const MC_BATCH: usize = 1 << 14;

/// Settings for the nested sphere quadrature: a 16-point rule with relative
/// tolerance 1e-7 at the outer level (tighter inside).
pub fn oracle_config() -> QuadratureConfig {
    QuadratureConfig {
        base_order: 16,
        ..QuadratureConfig::default().with_tolerances(1e-9, 1e-7)
    }
}

/// A point of the sphere with its quadrature weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSample {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Midpoint product rule on the upper half of `S^2` (`t = cos(theta) >= 0`).
pub fn hemisphere_grid_s2(theta_nodes: usize, phi_nodes: usize) -> Vec<SphereSample> {
    let (dt, dp) = (FRAC_PI_2 / theta_nodes as f64, 2.0 * PI / phi_nodes as f64);
    let mut out = Vec::with_capacity(theta_nodes * phi_nodes);
    for i in 0..theta_nodes {
        let theta = (i as f64 + 0.5) * dt;
        let (st, ct) = theta.sin_cos();
        for j in 0..phi_nodes {
            let phi = (j as f64 + 0.5) * dp;
            out.push(SphereSample {
                point: vec![st * phi.cos(), st * phi.sin(), ct],
                weight: st * dt * dp,
            });
        }
    }
    out
}

/// `|(a e_{n+1} - (n+a) t sigma, z)|` with `t = sigma_{n+1}`.
fn projection(params: &ProblemParams, z: &Direction, sigma: &[f64]) -> f64 {
    let na = params.n() as f64 + params.alpha();
    let t = sigma[sigma.len() - 1];
    let sz: f64 = sigma.iter().zip(z.components()).map(|(s, z)| s * z).sum();
    (params.alpha() * z.vertical() - na * t * sz).abs()
}

/// Integrand of the sphere representation of `C_p(z)`, without the weight
/// `|sigma_{n+1}|^e`: `|(a e_{n+1} - (n+a) t sigma, z)|^q`.
fn sphere_factor(params: &ProblemParams, z: &Direction, sigma: &[f64]) -> f64 {
    let v = projection(params, z, sigma);
    let q = params.q();
    if q == 1.0 {
        v
    } else if q == 2.0 {
        v * v
    } else {
        v.powf(q)
    }
}

/// Full integrand `|(.., z)|^q |sigma_{n+1}|^e` at a sphere point.
pub fn sphere_integrand(params: &ProblemParams, z: &Direction, sigma: &[f64]) -> f64 {
    let t = sigma[sigma.len() - 1].abs();
    let e = params.cos_exponent();
    if t == 0.0 && e < 0.0 {
        return 0.0;
    }
    sphere_factor(params, z, sigma) * t.powf(e)
}

/// Half- and whole-sphere values of the same integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereForms {
    pub half: IntegralResult,
    pub whole: IntegralResult,
}

struct Nested<'a> {
    integ: &'a Integrator,
    failure: RefCell<Option<Error>>,
}

impl Nested<'_> {
    fn guard(&self, r: Result<IntegralResult>) -> f64 {
        match r {
            Ok(v) => v.value,
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }

    fn failed(&self) -> bool {
        self.failure.borrow().is_some()
    }
}

/// Solutions of `a cos x + b sin x = c` in the open interval `(lo, hi)`.
fn trig_roots(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Vec<f64> {
    let r = a.hypot(b);
    if !(r > 0.0) || !c.is_finite() || c.abs() >= r {
        return Vec::new();
    }
    let base = b.atan2(a);
    let spread = (c / r).acos();
    let mut out = Vec::new();
    for x0 in [base + spread, base - spread] {
        for k in -2..=2 {
            let x = x0 + 2.0 * PI * k as f64;
            if x > lo + 1e-12 && x < hi - 1e-12 {
                out.push(x);
            }
        }
    }
    out
}

/// Breakpoints `lo, roots..., hi` with the roots merged in order.
fn with_breaks(base: &[f64], mut roots: Vec<f64>) -> Vec<f64> {
    roots.extend_from_slice(base);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

/// `int |(..)|^q |t|^e` over the polar cap `theta in [0, pi/2]`, with `sign = -1`
/// reflecting to the lower hemisphere (`theta -> pi - theta`).
///
/// The zero set of `(a e_{n+1} - (n+a) t sigma, z)` is where `(sigma, z) = D(t)`,
/// `D = a z_{n+1} / ((n+a) t)`; on each azimuthal circle this is a trigonometric
/// equation, and its roots (and their tangencies one level up) are passed to
/// the integrator as breakpoints.
fn cap_integral(params: &ProblemParams, z: &Direction, integ: &Integrator, sign: f64) -> Result<IntegralResult> {
    let n = params.n();
    let cfg = integ.config();
    let (abs, rel) = (cfg.abs_tol, cfg.rel_tol);
    let nest = Nested {
        integ,
        failure: RefCell::new(None),
    };
    let zc = z.components();
    let zv = z.vertical();
    let na = n as f64 + params.alpha();
    let level = |t: f64| {
        if t == 0.0 {
            if params.alpha() * zv == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            params.alpha() * zv / (na * t)
        }
    };
    let azimuths = [0.0, PI, 2.0 * PI];
    let outer = integ.integrate_cos_weighted(
        |theta| {
            if nest.failed() {
                return 0.0;
            }
            let (st, ct) = theta.sin_cos();
            let ct = sign * ct;
            let d = level(ct);
            match n {
                2 => {
                    let breaks = with_breaks(
                        &azimuths,
                        trig_roots(st * zc[0], st * zc[1], d - ct * zc[2], 0.0, 2.0 * PI),
                    );
                    let r = nest.integ.integrate_tol(
                        |phi| sphere_factor(params, z, &[st * phi.cos(), st * phi.sin(), ct]),
                        &breaks,
                        0.1 * abs,
                        0.1 * rel,
                    );
                    st * nest.guard(r)
                }
                _ => {
                    let rho = zc[0].hypot(zc[1]);
                    let c = d - ct * zc[3];
                    let mut tangencies = trig_roots(st * zc[2], st * rho, c, 0.0, PI);
                    tangencies.extend(trig_roots(st * zc[2], -st * rho, c, 0.0, PI));
                    let r = nest.integ.integrate_tol(
                        |chi| {
                            if nest.failed() {
                                return 0.0;
                            }
                            let (sc, cc) = chi.sin_cos();
                            let breaks = with_breaks(
                                &azimuths,
                                trig_roots(st * sc * zc[0], st * sc * zc[1], c - st * cc * zc[2], 0.0, 2.0 * PI),
                            );
                            let ring = nest.integ.integrate_tol(
                                |phi| {
                                    sphere_factor(params, z, &[st * sc * phi.cos(), st * sc * phi.sin(), st * cc, ct])
                                },
                                &breaks,
                                0.01 * abs,
                                0.01 * rel,
                            );
                            sc * nest.guard(ring)
                        },
                        &with_breaks(&[0.0, FRAC_PI_2, PI], tangencies),
                        0.1 * abs,
                        0.1 * rel,
                    );
                    st * st * nest.guard(r)
                }
            }
        },
        params.cos_exponent(),
        abs,
        rel,
    )?;
    if let Some(e) = nest.failure.into_inner() {
        return Err(e);
    }
    Ok(outer)
}

fn check_integral_inputs(params: &ProblemParams, z: &Direction) -> Result<()> {
    if params.p() == 1.0 {
        return Err(Error::InvalidParams("p = 1 is a supremum, not an integral".into()));
    }
    if z.n() != params.n() {
        return Err(Error::InvalidParams("direction dimension mismatch".into()));
    }
    Ok(())
}

/// Half-sphere integral and whole-sphere integral by nested adaptive quadrature
/// in hyperspherical coordinates (`n = 2, 3`).
pub fn sphere_integral_forms(params: &ProblemParams, z: &Direction, cfg: &QuadratureConfig) -> Result<SphereForms> {
    check_integral_inputs(params, z)?;
    if !(params.n() == 2 || params.n() == 3) {
        return Err(Error::Dimension {
            n: params.n() as usize,
            reason: "deterministic sphere quadrature covers n = 2, 3; use Monte Carlo",
        });
    }
    let integ = Integrator::new(cfg)?;
    let upper = cap_integral(params, z, &integ, 1.0)?;
    let lower = cap_integral(params, z, &integ, -1.0)?;
    let whole = IntegralResult {
        value: upper.value + lower.value,
        error_estimate: upper.error_estimate + lower.error_estimate,
        evaluations: upper.evaluations + lower.evaluations,
    };
    if (2.0 * upper.value - whole.value).abs() > HALF_WHOLE_AGREEMENT * whole.value.abs() {
        return Err(Error::CrossCheck {
            what: "half sphere vs half of whole sphere",
            left: 2.0 * upper.value,
            right: whole.value,
        });
    }
    Ok(SphereForms { half: upper, whole })
}

/// `int_{S^n_+} |(a e_{n+1} - (n+a)(s, e_{n+1}) s, z)|^q (s, e_{n+1})^e ds`.
pub fn sphere_integral_bruteforce(
    params: &ProblemParams,
    z: &Direction,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    Ok(sphere_integral_forms(params, z, cfg)?.half)
}

/// Supremum of the `p = 1` objective and where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSup {
    pub sup: f64,
    pub argmax: Vec<f64>,
    pub evaluations: usize,
}

/// `|(a e_{n+1} - (n+a) t s, z)| t^{n+a}` for `t = s_{n+1} >= 0`.
pub fn p1_objective(params: &ProblemParams, z: &Direction, sigma: &[f64]) -> f64 {
    let t = sigma[sigma.len() - 1].max(0.0);
    projection(params, z, sigma) * t.powf(params.n() as f64 + params.alpha())
}

fn fibonacci_hemisphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let t = 1.0 - (i as f64 + 0.5) / count as f64;
            let s = (1.0 - t * t).sqrt();
            let phi = golden * i as f64;
            vec![s * phi.cos(), s * phi.sin(), t]
        })
        .collect()
}

fn product_grid_s3(nodes: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(nodes * nodes * 2 * nodes);
    for i in 0..=nodes {
        let theta = FRAC_PI_2 * i as f64 / nodes as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..=nodes {
            let chi = PI * j as f64 / nodes as f64;
            let (sc, cc) = chi.sin_cos();
            for k in 0..2 * nodes {
                let phi = PI * k as f64 / nodes as f64;
                out.push(vec![st * sc * phi.cos(), st * sc * phi.sin(), st * cc, ct]);
            }
        }
    }
    out
}

fn random_hemisphere(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            let flip = if v[dim - 1] < 0.0 { -1.0 } else { 1.0 };
            v.iter_mut().for_each(|c| *c *= flip / norm);
            v
        })
        .collect()
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
}

/// Compass search on the sphere from `start`, steps halved down to `1e-13`.
fn polish<F: Fn(&[f64]) -> f64>(f: &F, start: Vec<f64>, step: f64) -> (Vec<f64>, f64, usize) {
    let dim = start.len();
    let mut best = start;
    let mut value = f(&best);
    let mut evals = 1;
    let mut step = step;
    while step > 1e-13 {
        let mut improved = false;
        for axis in 0..dim {
            for sign in [1.0, -1.0] {
                let mut trial = best.clone();
                trial[axis] += sign * step;
                normalize(&mut trial);
                if trial[dim - 1] < 0.0 {
                    continue;
                }
                let v = f(&trial);
                evals += 1;
                if v > value {
                    best = trial;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, value, evals)
}

/// Supremum over `S^n_+` of the `p = 1` objective (without `k`): Fibonacci
/// lattice for `n = 2`, product angle grid for `n = 3`, seeded random points
/// otherwise, each followed by a compass-search polish of the best few points.
pub fn sphere_sup_bruteforce(params: &ProblemParams, z: &Direction, cfg: &QuadratureConfig) -> Result<SphereSup> {
    if z.n() != params.n() {
        return Err(Error::InvalidParams("direction dimension mismatch".into()));
    }
    let dim = params.n() as usize + 1;
    let (points, spacing) = match params.n() {
        2 => (fibonacci_hemisphere(40_000), 0.02),
        3 => (product_grid_s3(48), PI / 48.0),
        _ => (random_hemisphere(dim, 200_000, cfg.rng_seed), 0.2),
    };
    let f = |s: &[f64]| p1_objective(params, z, s);
    let mut scored: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, s)| (f(s), i)).collect();
    let mut evaluations = scored.len();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    // The normal itself is a common maximizer and lies on no grid.
    let mut normal = vec![0.0; dim];
    normal[dim - 1] = 1.0;
    let mut starts: Vec<Vec<f64>> = scored.iter().take(8).map(|&(_, i)| points[i].clone()).collect();
    starts.push(normal);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let (p, v, e) = polish(&f, s, spacing);
        evaluations += e;
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((p, v));
        }
    }
    let (argmax, sup) = best.expect("non-empty start set");
    Ok(SphereSup {
        sup,
        argmax,
        evaluations,
    })
}

/// Monte-Carlo integral over `S^{dimension-1}` in `R^dimension` with uniform
/// points from normalized Gaussian vectors. Batch `b` draws from stream `b` of
/// `ChaCha8Rng` seeded with `cfg.rng_seed`; `error_estimate` is one standard error.
pub fn mc_integrate<F>(integrand: F, dimension: usize, cfg: &QuadratureConfig) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if cfg.mc_samples < 1000 {
        return Err(Error::InvalidParams(format!(
            "at least 1000 Monte-Carlo samples required (got {})",
            cfg.mc_samples
        )));
    }
    if dimension < 2 {
        return Err(Error::InvalidParams("sphere dimension must be at least 2".into()));
    }
    let area = sphere_area(dimension as u32)?;
    let batches = cfg.mc_samples.div_ceil(MC_BATCH);
    let sums: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(cfg.mc_samples - b * MC_BATCH);
            let mut v = vec![0.0; dimension];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let mut norm = 0.0f64;
                for c in v.iter_mut() {
                    *c = StandardNormal.sample(&mut rng);
                    norm += *c * *c;
                }
                let norm = norm.sqrt();
                v.iter_mut().for_each(|c| *c /= norm);
                let y = integrand(&v);
                s1 += y;
                s2 += y * y;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let m = cfg.mc_samples as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok(IntegralResult {
        value: area * mean,
        error_estimate: area * (var / m).sqrt(),
        evaluations: cfg.mc_samples,
    })
}

/// Monte-Carlo estimate of the half-sphere integral, as half the whole-sphere form.
pub fn sphere_integral_mc(params: &ProblemParams, z: &Direction, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    check_integral_inputs(params, z)?;
    let r = mc_integrate(|s| sphere_integrand(params, z, s), params.n() as usize + 1, cfg)?;
    Ok(IntegralResult {
        value: 0.5 * r.value,
        error_estimate: 0.5 * r.error_estimate,
        evaluations: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{c2, sphere_integral_reduced};
    use crate::specfun::normalization;
    use approx::assert_relative_eq;

    fn params(n: u32, alpha: f64, p: f64) -> ProblemParams {
        ProblemParams::new(n, alpha, p).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default().with_tolerances(1e-10, 1e-9)
    }

    #[test]
    fn oracle_config_is_valid() {
        assert!(oracle_config().validate().is_ok());
    }

    #[test]
    fn trig_roots_solve_the_equation() {
        let roots = trig_roots(0.3, -0.8, 0.5, 0.0, 2.0 * PI);
        assert_eq!(roots.len(), 2);
        for x in roots {
            assert!((0.3 * x.cos() - 0.8 * x.sin() - 0.5).abs() < 1e-14);
        }
        assert!(trig_roots(0.3, 0.4, 0.6, 0.0, 2.0 * PI).is_empty());
    }

    #[test]
    fn hemisphere_grid_weights_sum_to_area() {
        let total: f64 = hemisphere_grid_s2(200, 64).iter().map(|s| s.weight).sum();
        assert_relative_eq!(total, 2.0 * PI, max_relative = 1e-5);
    }

    #[test]
    fn bruteforce_p2_normal_gives_c2() {
        let p = params(2, 1.0, 2.0);
        let r = sphere_integral_bruteforce(&p, &Direction::normal(2), &cfg()).unwrap();
        let c = normalization(2, 1.0).unwrap() * r.value.sqrt();
        assert_relative_eq!(c, (6.0 / (32.0 * PI)).sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn whole_sphere_is_twice_half() {
        let p = params(3, 0.5, 3.0);
        let z = Direction::from_gamma(3, 0.5).unwrap();
        let f = sphere_integral_forms(&p, &z, &oracle_config()).unwrap();
        assert_relative_eq!(f.whole.value, 2.0 * f.half.value, max_relative = 1e-10);
    }

    #[test]
    fn tangential_beats_normal_for_large_alpha() {
        let p = params(2, 4.0, 2.0);
        let normal = sphere_integral_bruteforce(&p, &Direction::normal(2), &cfg()).unwrap();
        let tangential = sphere_integral_bruteforce(&p, &Direction::from_angle(2, FRAC_PI_2), &cfg()).unwrap();
        assert!(tangential.value > normal.value);
        let c = c2(&p, &QuadratureConfig::default()).unwrap();
        let k = normalization(2, 4.0).unwrap();
        assert_relative_eq!(c.value, k * tangential.value.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn reduction_matches_bruteforce_with_negative_exponent() {
        // e = ((a-1)p + n + 1)/(p-1) = 1.5 a at n = 2, p = 3.
        let p = params(2, -0.3, 3.0);
        assert_relative_eq!(p.cos_exponent(), -0.45, max_relative = 1e-14);
        let z = Direction::from_gamma(2, 0.7).unwrap();
        let brute = sphere_integral_bruteforce(&p, &z, &cfg()).unwrap();
        let red = sphere_integral_reduced(&p, &z, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(brute.value, red.value, max_relative = 1e-6);
    }

    #[test]
    fn p_infinity_normal_direction() {
        let p = params(2, 1.0, f64::INFINITY);
        let r = sphere_integral_bruteforce(&p, &Direction::normal(2), &cfg()).unwrap();
        // 2 pi int_0^1 |3t^2 - 1| dt
        assert_relative_eq!(r.value, 2.0 * PI * 4.0 / (3.0 * 3f64.sqrt()), max_relative = 1e-8);
    }

    #[test]
    fn sup_normal_direction() {
        let p = params(2, 1.0, 1.0);
        let s = sphere_sup_bruteforce(&p, &Direction::normal(2), &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(s.sup, 2.0, max_relative = 1e-12);
        assert!((s.argmax[2] - 1.0).abs() < 1e-9);
        for alpha in [-1.0, 0.5, 1.5, 2.0] {
            let p = params(2, alpha, 1.0);
            let s = sphere_sup_bruteforce(&p, &Direction::normal(2), &QuadratureConfig::default()).unwrap();
            assert!(s.sup >= 2.0 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn objective_is_antipodally_invariant_up_to_weight() {
        let p = params(3, 1.3, 1.0);
        let z = Direction::normalized(vec![0.3, -0.2, 0.5, 0.7]).unwrap();
        let s = [0.2, 0.4, -0.1, 0.8860022573334675];
        let m: Vec<f64> = s.iter().map(|v| -v).collect();
        let w = |s: &[f64]| s[3].abs().powf(p.n() as f64 + p.alpha());
        assert_relative_eq!(
            projection(&p, &z, &s) * w(&s),
            projection(&p, &z, &m) * w(&m),
            max_relative = 1e-14
        );
    }

    #[test]
    fn mc_constant_and_determinism() {
        let cfg = QuadratureConfig {
            mc_samples: 100_000,
            rng_seed: 7,
            ..QuadratureConfig::default()
        };
        let a = mc_integrate(|_| 1.0, 3, &cfg).unwrap();
        assert_relative_eq!(a.value, 4.0 * PI, max_relative = 1e-12);
        let f = |s: &[f64]| s[0] * s[0];
        let x = mc_integrate(f, 3, &cfg).unwrap();
        let y = mc_integrate(f, 3, &cfg).unwrap();
        assert_eq!(x, y);
        assert!((x.value - 4.0 * PI / 3.0).abs() < 3.0 * x.error_estimate);
        let small = QuadratureConfig { mc_samples: 10, ..cfg };
        assert!(mc_integrate(f, 3, &small).is_err());
    }
}
