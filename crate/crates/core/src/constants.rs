//! Sharp constants `C_p` in `|grad u_f(x)| <= C_p x_{n+1}^{-(n+p)/p} ||f||_p`.
//!
//! Every constant is computed from a reduced representation:
//!
//! * `p = 1`: a one-dimensional supremum over `t = (e_sigma, e_{n+1})` of
//!   `sqrt(alpha^2 + (n+alpha)(n-alpha) t^2) t^{n+alpha}`, cross-checked
//!   against `k n` whenever `-n < alpha <= n`;
//! * `1 < p < inf` and `p = inf`: the double integral over
//!   `(phi, theta) in [0, pi] x [0, pi/2]` of
//!   `|G(phi, theta; gamma)|^q cos^e(theta) sin^{n-1}(theta) sin^{n-2}(phi)`,
//!   maximized over the direction parameter `gamma = |z'| / z_{n+1}`;
//! * `p = 2`: the same quantity split into the two integrals `I1`, `I2`,
//!   giving `C_2 = sqrt(omega_{n-1}) k max(sqrt I1, sqrt I2)`.
//!
//! Directions are handled through `psi = atan(gamma)`, so
//! `G / sqrt(1 + gamma^2) = cos(psi) ((n+a) c^2 - a) + sin(psi) (n+a) c s cos(phi)`
//! stays bounded all the way to the tangential direction `psi = pi/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poisson::HalfSpacePoint;
use crate::quadrature::{
    self, integrate_2d_with, maximize_on_interval, maximize_over_angle, IntegralResult, Integrator, QuadratureConfig,
    TIE_RELATIVE_TOLERANCE,
};
use crate::serde_ext::{ext_f64, opt_ext_f64};
use crate::specfun::{beta, gamma, normalization, sin_cos_moment, sphere_area};

/// Grid size of the `t`-supremum in the `p = 1` problem.
const T_GRID_NODES: usize = 4097;
/// Grid over the horizontal angle in the directional `p = 1` problem.
const CHI_GRID_NODES: usize = 33;
/// Golden-section width for the `p = 1` suprema.
const SUP_TOLERANCE: f64 = 1e-12;
/// Agreement required between quadrature and beta closed forms of `I1`, `I2`.
const MOMENT_AGREEMENT: f64 = 1e-8;
/// Agreement required between the numeric `p = 1` supremum and `k n`.
const C1_AGREEMENT: f64 = 1e-10;

/// Dimension `n` of the boundary, kernel exponent `alpha` and Lebesgue exponent `p`.
///
/// `p` may be `f64::INFINITY`. Construction enforces `n >= 2` and `alpha > -n/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    n: u32,
    alpha: f64,
    #[serde(serialize_with = "ext_f64")]
    p: f64,
}

impl ProblemParams {
    pub fn new(n: u32, alpha: f64, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n >= 2 required (n = {n})")));
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParams(format!("p must lie in [1, inf] (p = {p})")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha must be finite (alpha = {alpha})")));
        }
        let bound = -(n as f64) / p;
        if !(alpha > bound) {
            return Err(Error::InvalidParams(format!(
                "alpha > -n/p violated: alpha = {alpha}, -n/p = {bound}"
            )));
        }
        Ok(Self { n, alpha, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Hoelder conjugate `q = p / (p - 1)`.
    pub fn q(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else if self.p.is_infinite() {
            1.0
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// Power of `(e_sigma, e_{n+1})` in the sphere representation:
    /// `n + alpha` for `p = 1`, `((alpha-1)p + n + 1)/(p - 1)` for finite `p > 1`,
    /// `alpha - 1` for `p = inf`. It exceeds -1 exactly when `alpha > -n/p`.
    pub fn cos_exponent(&self) -> f64 {
        let n = self.n as f64;
        if self.p == 1.0 {
            n + self.alpha
        } else if self.p.is_infinite() {
            self.alpha - 1.0
        } else {
            ((self.alpha - 1.0) * self.p + n + 1.0) / (self.p - 1.0)
        }
    }

    /// Exponent of `x_{n+1}` in the coefficient: `(n + p)/p`, `1` for `p = inf`.
    pub fn height_exponent(&self) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else {
            (self.n as f64 + self.p) / self.p
        }
    }

    /// Kernel normalization `k_{n,alpha}` (signed).
    pub fn normalization(&self) -> Result<f64> {
        normalization(self.n, self.alpha)
    }

    fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.n, self.alpha, p)
    }
}

/// Unit vector `z` in `R^{n+1}`, stored with `z_{n+1} >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction {
    components: Vec<f64>,
}

impl Direction {
    /// Accepts a unit vector (within 1e-12) of length `n + 1 >= 3`; flips it
    /// if needed so that the last component is non-negative.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 3 {
            return Err(Error::InvalidParams(format!(
                "direction needs at least 3 components, got {}",
                components.len()
            )));
        }
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "direction must be a unit vector (|z| = {norm})"
            )));
        }
        let mut components = components;
        let last = components[components.len() - 1];
        if last < 0.0 || (last == 0.0 && last.is_sign_negative()) {
            components.iter_mut().for_each(|c| *c = -*c);
        }
        Ok(Self { components })
    }

    /// Normalizes an arbitrary non-zero vector first.
    pub fn normalized(components: Vec<f64>) -> Result<Self> {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParams("direction must be non-zero".into()));
        }
        Self::new(components.into_iter().map(|c| c / norm).collect())
    }

    /// Inward normal `e_{n+1}`.
    pub fn normal(n: u32) -> Self {
        Self::from_angle(n, 0.0)
    }

    /// `(sin psi, 0, ..., 0, cos psi)`; `psi = pi/2` gives the tangential `e_1`.
    pub fn from_angle(n: u32, psi: f64) -> Self {
        let mut components = vec![0.0; n as usize + 1];
        if psi >= FRAC_PI_2 {
            components[0] = 1.0;
        } else {
            components[0] = psi.sin();
            components[n as usize] = psi.cos();
        }
        Self { components }
    }

    /// Direction with `|z'| / z_{n+1} = gamma` (infinite `gamma` is tangential).
    pub fn from_gamma(n: u32, gamma: f64) -> Result<Self> {
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::InvalidParams(format!("gamma must be >= 0 (gamma = {gamma})")));
        }
        Ok(Self::from_angle(n, quadrature::gamma_to_angle(gamma)))
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Boundary dimension `n` (one less than the number of components).
    pub fn n(&self) -> u32 {
        (self.components.len() - 1) as u32
    }

    pub fn vertical(&self) -> f64 {
        self.components[self.components.len() - 1]
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.components[..self.components.len() - 1]
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.horizontal().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `gamma = |z'| / z_{n+1}`, infinite for tangential directions.
    pub fn gamma(&self) -> f64 {
        if self.vertical() == 0.0 {
            f64::INFINITY
        } else {
            self.horizontal_norm() / self.vertical()
        }
    }

    /// `psi = atan(gamma)` in `[0, pi/2]`.
    pub fn angle(&self) -> f64 {
        self.horizontal_norm().atan2(self.vertical())
    }

    fn check_dimension(&self, params: &ProblemParams) -> Result<()> {
        if self.n() != params.n {
            return Err(Error::InvalidParams(format!(
                "direction has {} components, expected n + 1 = {}",
                self.components.len(),
                params.n + 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    ReducedQuadrature,
    BruteForce,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::ReducedQuadrature => "reduced_quadrature",
            Method::BruteForce => "brute_force",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// A computed sharp constant with its extremal diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    /// Maximizing (or evaluated) direction parameter; `inf` is tangential.
    #[serde(serialize_with = "opt_ext_f64")]
    pub gamma_star: Option<f64>,
    /// Maximizer `t = (e_sigma, e_{n+1})` of the `p = 1` problem.
    pub t_star: Option<f64>,
    pub diagnostics: Vec<String>,
}

fn base_diagnostics(params: &ProblemParams) -> Vec<String> {
    let mut d = Vec::new();
    if params.alpha <= 0.0 {
        d.push(format!(
            "formal normalization, alpha <= 0 (k = {:e}); magnitude |k| used",
            normalization(params.n, params.alpha).unwrap_or(f64::NAN)
        ));
    }
    d
}

fn require_p(params: &ProblemParams, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{what} is not defined for p = {}",
            params.p
        )))
    }
}

/// Sharp constant magnitude `|k_{n,alpha}|`.
fn kernel_scale(params: &ProblemParams) -> Result<f64> {
    Ok(params.normalization()?.abs())
}

/// `sqrt(alpha^2 + (n+alpha)(n-alpha) t^2) t^{n+alpha}`: length of the kernel
/// gradient vector times the weight, at `t = (e_sigma, e_{n+1})`.
pub fn p1_profile(n: u32, alpha: f64, t: f64) -> f64 {
    let n = n as f64;
    let radicand = alpha * alpha + (n + alpha) * (n - alpha) * t * t;
    radicand.max(0.0).sqrt() * t.powf(n + alpha)
}

/// `C_1` from the one-dimensional supremum, checked against `k n` for `alpha <= n`.
pub fn c1(params: &ProblemParams) -> Result<ConstantResult> {
    require_p(params, params.p == 1.0, "c1")?;
    let k = kernel_scale(params)?;
    let (n, alpha) = (params.n, params.alpha);
    let best = maximize_on_interval(
        |t| Ok::<_, Error>(p1_profile(n, alpha, t)),
        0.0,
        1.0,
        T_GRID_NODES,
        SUP_TOLERANCE,
    )?;
    let value = k * best.value;
    let mut diagnostics = base_diagnostics(params);
    let mut error_estimate = 0.0;
    if alpha <= n as f64 {
        let closed = k * n as f64;
        let delta = (value - closed).abs();
        if delta > C1_AGREEMENT * closed {
            return Err(Error::CrossCheck {
                what: "c1 supremum vs k n",
                left: value,
                right: closed,
            });
        }
        error_estimate = delta;
        diagnostics.push(format!("closed form k n = {closed:.17e}, |delta| = {delta:.3e}"));
    } else {
        diagnostics.push("alpha > n: closed form k n does not apply".into());
    }
    Ok(ConstantResult {
        value,
        method: Method::ReducedQuadrature,
        error_estimate,
        gamma_star: Some(0.0),
        t_star: Some(best.x),
        diagnostics,
    })
}

/// Objective of the directional `p = 1` problem at `t` and horizontal angle `chi`.
fn p1_directional_objective(n: u32, alpha: f64, z: &Direction, t: f64, chi: f64) -> f64 {
    let nf = n as f64;
    let zv = z.vertical();
    let zh = z.horizontal_norm();
    let s = (1.0 - t * t).max(0.0).sqrt();
    let proj = s * zh * chi.cos() + t * zv;
    (alpha * zv - (nf + alpha) * t * proj).abs() * t.powf(nf + alpha)
}

/// Directional constant `C_1(z)`: supremum over `e_sigma` in the upper hemisphere,
/// parametrized by `t = (e_sigma, e_{n+1})` and the angle `chi` between the
/// horizontal parts of `e_sigma` and `z`.
pub fn c1_directional(params: &ProblemParams, z: &Direction) -> Result<ConstantResult> {
    require_p(params, params.p == 1.0, "c1_directional")?;
    z.check_dimension(params)?;
    let k = kernel_scale(params)?;
    let (n, alpha) = (params.n, params.alpha);
    let sup_t = |chi: f64| {
        maximize_on_interval(
            |t| Ok::<_, Error>(p1_directional_objective(n, alpha, z, t, chi)),
            0.0,
            1.0,
            1025,
            SUP_TOLERANCE,
        )
    };
    let (t_star, best) = if z.horizontal_norm() == 0.0 {
        let m = sup_t(0.0)?;
        (m.x, m.value)
    } else {
        let outer = maximize_on_interval(|chi| sup_t(chi).map(|m| m.value), 0.0, PI, CHI_GRID_NODES, 1e-9)?;
        let m = sup_t(outer.x)?;
        (m.x, m.value)
    };
    let mut diagnostics = base_diagnostics(params);
    if z.vertical() == 1.0 && alpha <= n as f64 {
        diagnostics.push(format!("normal direction: k n = {:.17e}", k * n as f64));
    }
    Ok(ConstantResult {
        value: k * best,
        method: Method::ReducedQuadrature,
        error_estimate: 0.0,
        gamma_star: Some(z.gamma()),
        t_star: Some(t_star),
        diagnostics,
    })
}

fn check_moment_exponent(n: u32, alpha: f64) -> Result<()> {
    let e = n as f64 - 1.0 + 2.0 * alpha;
    if e <= -1.0 {
        Err(Error::Singularity { exponent: e })
    } else {
        Ok(())
    }
}

/// `int_0^pi sin^{n-2}(phi) cos^{2j}(phi) dphi = B((n-1)/2, j + 1/2)`.
fn phi_moment(n: u32, even_cos_power: u32) -> Result<f64> {
    beta(0.5 * (n as f64 - 1.0), 0.5 * (even_cos_power as f64 + 1.0))
}

/// `I1` expanded into beta functions:
/// `B((n-1)/2, 1/2) [ (n+a)^2 M(n-1, n+3+2a) - 2a(n+a) M(n-1, n+1+2a) + a^2 M(n-1, n-1+2a) ]`
/// with `M(s, c) = int_0^{pi/2} sin^s cos^c`.
pub fn i1_beta_expansion(n: u32, alpha: f64) -> Result<f64> {
    check_moment_exponent(n, alpha)?;
    let nf = n as f64;
    let s = nf - 1.0;
    let c = nf - 1.0 + 2.0 * alpha;
    let theta = (nf + alpha).powi(2) * sin_cos_moment(s, c + 4.0)?
        - 2.0 * alpha * (nf + alpha) * sin_cos_moment(s, c + 2.0)?
        + alpha * alpha * sin_cos_moment(s, c)?;
    Ok(phi_moment(n, 0)? * theta)
}

/// `I2 = (n+a)^2 B((n-1)/2, 3/2) M(n+1, n+1+2a)`.
pub fn i2_beta_expansion(n: u32, alpha: f64) -> Result<f64> {
    check_moment_exponent(n, alpha)?;
    let nf = n as f64;
    Ok((nf + alpha).powi(2) * phi_moment(n, 2)? * sin_cos_moment(nf + 1.0, nf + 1.0 + 2.0 * alpha)?)
}

/// The Gamma-product expression commonly quoted for `I1`:
/// `sqrt(pi) n (n+2)(n+a) G((n-1)/2) G((n+2+a)/2) / (4 (n+2a)(n+1+a) G(n+a))`.
///
/// It does not equal the defining integral (at `n = 2, a = 1` it gives
/// about 0.78305 against 3 pi / 8); it is evaluated for diagnostics only.
pub fn i1_gamma_formula(n: u32, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(
        PI.sqrt() * nf * (nf + 2.0) * (nf + alpha) * gamma(0.5 * (nf - 1.0))? * gamma(0.5 * (nf + 2.0 + alpha))?
            / (4.0 * (nf + 2.0 * alpha) * (nf + 1.0 + alpha) * gamma(nf + alpha)?),
    )
}

/// Gamma-product expression for `I2`:
/// `sqrt(pi) (n+a) G((n-1)/2) G((n+2+2a)/2) / (4 (n+1+a) G(n+a))`.
pub fn i2_gamma_formula(n: u32, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(
        PI.sqrt() * (nf + alpha) * gamma(0.5 * (nf - 1.0))? * gamma(0.5 * (nf + 2.0 + 2.0 * alpha))?
            / (4.0 * (nf + 1.0 + alpha) * gamma(nf + alpha)?),
    )
}

/// Gamma-product expression quoted for `C_2`:
/// `sqrt(omega_{n-1}) k { sqrt(pi)(n+a) n (n+2) G(n/2-1) G(n/2+a) / (8 (n+1+a) G(n+a)) }^{1/2}`.
/// `G(n/2 - 1)` has a pole at `n = 2`, reported as an error.
pub fn c2_gamma_formula(n: u32, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    let k = normalization(n, alpha)?.abs();
    let inner = PI.sqrt() * (nf + alpha) * nf * (nf + 2.0) * gamma(0.5 * nf - 1.0)? * gamma(0.5 * nf + alpha)?
        / (8.0 * (nf + 1.0 + alpha) * gamma(nf + alpha)?);
    Ok(sphere_area(n - 1)?.sqrt() * k * inner.sqrt())
}

fn product(a: IntegralResult, b: IntegralResult) -> IntegralResult {
    IntegralResult {
        value: a.value * b.value,
        error_estimate: a.value.abs() * b.error_estimate + b.value.abs() * a.error_estimate,
        evaluations: a.evaluations + b.evaluations,
    }
}

fn assert_agreement(what: &'static str, quad: f64, closed: f64) -> Result<()> {
    if (quad - closed).abs() > MOMENT_AGREEMENT * closed.abs() {
        Err(Error::CrossCheck {
            what,
            left: quad,
            right: closed,
        })
    } else {
        Ok(())
    }
}

/// `I1 = int_0^pi sin^{n-2} dphi int_0^{pi/2} ((n+a)cos^2 - a)^2 sin^{n-1} cos^{n-1+2a} dtheta`,
/// by quadrature, checked against [`i1_beta_expansion`].
pub fn i1(params: &ProblemParams, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let (n, alpha) = (params.n, params.alpha);
    check_moment_exponent(n, alpha)?;
    let integ = Integrator::new(cfg)?;
    let nf = n as f64;
    let phi = integ.integrate(|p| p.sin().powi(n as i32 - 2), 0.0, PI)?;
    let theta = integ.integrate_cos_weighted(
        |t| {
            let c = t.cos();
            ((nf + alpha) * c * c - alpha).powi(2) * t.sin().powi(n as i32 - 1)
        },
        nf - 1.0 + 2.0 * alpha,
        cfg.abs_tol,
        cfg.rel_tol,
    )?;
    let r = product(phi, theta);
    assert_agreement("I1 quadrature vs beta expansion", r.value, i1_beta_expansion(n, alpha)?)?;
    Ok(r)
}

/// `I2 = (n+a)^2 int_0^pi sin^{n-2} cos^2 dphi int_0^{pi/2} sin^{n+1} cos^{n+1+2a} dtheta`,
/// by quadrature, checked against [`i2_beta_expansion`].
pub fn i2(params: &ProblemParams, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let (n, alpha) = (params.n, params.alpha);
    check_moment_exponent(n, alpha)?;
    let integ = Integrator::new(cfg)?;
    let nf = n as f64;
    let phi = integ.integrate(|p| p.sin().powi(n as i32 - 2) * p.cos().powi(2), 0.0, PI)?;
    let theta = integ.integrate_cos_weighted(
        |t| t.sin().powi(n as i32 + 1),
        nf + 1.0 + 2.0 * alpha,
        cfg.abs_tol,
        cfg.rel_tol,
    )?;
    let mut r = product(phi, theta);
    let scale = (nf + alpha).powi(2);
    r.value *= scale;
    r.error_estimate *= scale;
    assert_agreement("I2 quadrature vs beta expansion", r.value, i2_beta_expansion(n, alpha)?)?;
    Ok(r)
}

/// `C_2 = sqrt(omega_{n-1}) |k| max(sqrt I1, sqrt I2)`; `gamma_star = 0` when
/// `I1 >= I2` (ties included), otherwise `inf`.
pub fn c2(params: &ProblemParams, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    require_p(params, params.p == 2.0, "c2")?;
    let (n, alpha) = (params.n, params.alpha);
    let k = kernel_scale(params)?;
    let first = i1(params, cfg)?;
    let second = i2(params, cfg)?;
    let omega = sphere_area(n - 1)?;
    let normal_wins = first.value >= second.value * (1.0 - TIE_RELATIVE_TOLERANCE);
    let chosen = if normal_wins { first } else { second };
    let value = omega.sqrt() * k * chosen.value.sqrt();
    let error_estimate = 0.5 * value * chosen.error_estimate / chosen.value;

    let mut diagnostics = base_diagnostics(params);
    let nf = n as f64;
    diagnostics.push(format!(
        "I1 = {:.17e}, I2 = {:.17e}, I1/I2 = {:.17e} (n(n+2)/(n+2a) = {:.17e})",
        first.value,
        second.value,
        first.value / second.value,
        nf * (nf + 2.0) / (nf + 2.0 * alpha)
    ));
    match i1_gamma_formula(n, alpha) {
        Ok(g) => diagnostics.push(format!(
            "Gamma-product I1 formula gives {g:.17e}, quadrature {:.17e} (relative gap {:.3e})",
            first.value,
            (g - first.value).abs() / first.value
        )),
        Err(e) => diagnostics.push(format!("Gamma-product I1 formula undefined: {e}")),
    }
    match c2_gamma_formula(n, alpha) {
        Ok(g) => diagnostics.push(format!(
            "Gamma-product C2 formula gives {g:.17e} (relative gap {:.3e})",
            (g - value).abs() / value
        )),
        Err(e) => diagnostics.push(format!("Gamma-product C2 formula undefined: {e}")),
    }
    Ok(ConstantResult {
        value,
        method: Method::ReducedQuadrature,
        error_estimate,
        gamma_star: Some(if normal_wins { 0.0 } else { f64::INFINITY }),
        t_star: None,
        diagnostics,
    })
}

/// The reduced double integral for a fixed direction angle `psi`, with
/// integrand exponent `q` and cosine weight exponent `e`.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    n: u32,
    alpha: f64,
    q: f64,
    e: f64,
}

/// `N(psi) = [ int int |G_psi|^q cos^e sin^{n-1} sin^{n-2} ]^{1/q}` with its error.
#[derive(Debug, Clone, Copy)]
struct ReducedNorm {
    value: f64,
    error: f64,
    evaluations: usize,
}

impl Reduced {
    fn from_params(params: &ProblemParams) -> Self {
        Self {
            n: params.n,
            alpha: params.alpha,
            q: params.q(),
            e: params.cos_exponent(),
        }
    }

    /// `G(phi, theta; gamma) / sqrt(1 + gamma^2)` written in `psi`.
    fn g(&self, cp: f64, sp: f64, cos_phi: f64, c: f64, s: f64) -> f64 {
        let na = self.n as f64 + self.alpha;
        let normal = na * c * c - self.alpha;
        if sp == 0.0 {
            normal
        } else if cp == 0.0 {
            na * c * s * cos_phi
        } else {
            cp * normal + sp * na * c * s * cos_phi
        }
    }

    fn angle_parts(psi: f64) -> (f64, f64) {
        if psi <= 0.0 {
            (1.0, 0.0)
        } else if psi >= FRAC_PI_2 {
            (0.0, 1.0)
        } else {
            (psi.cos(), psi.sin())
        }
    }

    /// Upper bound of `|G| cos^{e+/q}` used to keep `|G|^q` inside the f64 range.
    fn scale(&self, cp: f64, sp: f64) -> f64 {
        let lift = self.e.max(0.0) / self.q;
        let mut best = 0.0f64;
        let nodes = 513;
        for i in 0..nodes {
            let theta = FRAC_PI_2 * i as f64 / (nodes - 1) as f64;
            let (s, c) = theta.sin_cos();
            for cos_phi in [-1.0, 1.0] {
                let v = self.g(cp, sp, cos_phi, c, s).abs() * c.max(0.0).powf(lift);
                best = best.max(v);
            }
        }
        if best > 0.0 {
            1.01 * best
        } else {
            1.0
        }
    }

    fn norm(&self, psi: f64, integ: &Integrator) -> Result<ReducedNorm> {
        let (cp, sp) = Self::angle_parts(psi);
        let scale = self.scale(cp, sp);
        let lift = self.e.max(0.0) / self.q;
        let weight = self.e.min(0.0);
        let n = self.n as i32;
        let q = self.q;
        let r = integrate_2d_with(
            integ,
            |phi, theta| {
                let (s, c) = theta.sin_cos();
                let c = c.max(0.0);
                let g = self.g(cp, sp, phi.cos(), c, s).abs() * c.powf(lift) / scale;
                let gq = if q == 2.0 {
                    g * g
                } else if q == 1.0 {
                    g
                } else {
                    g.powf(q)
                };
                gq * s.powi(n - 1) * phi.sin().powi(n - 2)
            },
            weight,
        )?;
        let inv_q = 1.0 / q;
        let value = scale * r.value.max(0.0).powf(inv_q);
        let error = if r.value > 0.0 {
            value * inv_q * r.error_estimate / r.value
        } else {
            scale * r.error_estimate.powf(inv_q)
        };
        Ok(ReducedNorm {
            value,
            error,
            evaluations: r.evaluations,
        })
    }
}

/// Direct value of `int_{S^n_+} |(alpha e_{n+1} - (n+alpha)(e_s, e_{n+1}) e_s, z)|^q (e_s, e_{n+1})^e ds`
/// through the reduced double integral: `omega_{n-1} N(psi_z)^q`.
///
/// For `p = inf` the exponents are `q = 1`, `e = alpha - 1`.
pub fn sphere_integral_reduced(
    params: &ProblemParams,
    z: &Direction,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    require_p(params, params.p > 1.0, "the sphere integral")?;
    z.check_dimension(params)?;
    let red = Reduced::from_params(params);
    let integ = Integrator::new(cfg)?;
    let norm = red.norm(z.angle(), &integ)?;
    let omega = sphere_area(params.n - 1)?;
    let value = omega * norm.value.powf(red.q);
    Ok(IntegralResult {
        value,
        error_estimate: value * red.q * norm.error / norm.value.max(f64::MIN_POSITIVE),
        evaluations: norm.evaluations,
    })
}

fn prefactor(params: &ProblemParams) -> Result<f64> {
    Ok(sphere_area(params.n - 1)?.powf(1.0 / params.q()) * kernel_scale(params)?)
}

fn directional_reduced(params: &ProblemParams, z: &Direction, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    z.check_dimension(params)?;
    let red = Reduced::from_params(params);
    let integ = Integrator::new(cfg)?;
    let norm = red.norm(z.angle(), &integ)?;
    let pre = prefactor(params)?;
    Ok(ConstantResult {
        value: pre * norm.value,
        method: Method::ReducedQuadrature,
        error_estimate: pre * norm.error,
        gamma_star: Some(z.gamma()),
        t_star: None,
        diagnostics: base_diagnostics(params),
    })
}

fn sharp_reduced(params: &ProblemParams, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    let red = Reduced::from_params(params);
    let integ = Integrator::new(cfg)?;
    let mut worst_error = 0.0f64;
    let best = maximize_over_angle(|psi| {
        let r = red.norm(psi, &integ)?;
        worst_error = worst_error.max(r.error);
        Ok::<_, Error>(r.value)
    })?;
    let pre = prefactor(params)?;
    let mut diagnostics = base_diagnostics(params);
    diagnostics.push(format!(
        "supremum over gamma from {} objective evaluations at psi* = {:.17e}",
        best.evaluations, best.psi_star
    ));
    let mut gamma_star = best.gamma_star;
    if gamma_star > 0.0 {
        // Objective values carry quadrature noise of relative size tol_2d.
        let normal = red.norm(0.0, &integ)?.value;
        let tie = TIE_RELATIVE_TOLERANCE.max(cfg.tol_2d);
        if normal >= best.value * (1.0 - tie) {
            diagnostics.push(format!(
                "gamma* = {gamma_star:.6e} ties with the normal direction within {tie:.1e}; reporting 0"
            ));
            gamma_star = 0.0;
        }
    }
    if params.p != 2.0 {
        diagnostics.push("extremal direction reported, not claimed to be the normal".into());
    }
    Ok(ConstantResult {
        value: pre * best.value,
        method: Method::ReducedQuadrature,
        error_estimate: pre * worst_error,
        gamma_star: Some(gamma_star),
        t_star: None,
        diagnostics,
    })
}

/// Directional constant `C_p(z)` for `1 < p < inf` from the reduced double integral.
pub fn cp_directional(params: &ProblemParams, z: &Direction, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    require_p(params, params.p > 1.0 && params.p.is_finite(), "cp_directional")?;
    directional_reduced(params, z, cfg)
}

/// Sharp constant `C_p` for `1 < p < inf`: supremum over `gamma` of the reduced
/// double integral (grid over `psi = atan(gamma)` plus golden-section refinement).
pub fn cp(params: &ProblemParams, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    require_p(params, params.p > 1.0 && params.p.is_finite(), "cp")?;
    sharp_reduced(params, cfg)
}

/// Directional constant `C_inf(z)`.
pub fn c_infinity_directional(params: &ProblemParams, z: &Direction, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    require_p(params, params.p.is_infinite(), "c_infinity_directional")?;
    directional_reduced(params, z, cfg)
}

/// Sharp constant `C_inf = sup_z C_inf(z)`.
pub fn c_infinity(params: &ProblemParams, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    require_p(params, params.p.is_infinite(), "c_infinity")?;
    sharp_reduced(params, cfg)
}

/// Sharp constant `C_p` through the path appropriate for `p`.
pub fn sharp_constant(params: &ProblemParams, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    if params.p == 1.0 {
        c1(params)
    } else if params.p == 2.0 {
        c2(params, cfg)
    } else if params.p.is_infinite() {
        c_infinity(params, cfg)
    } else {
        cp(params, cfg)
    }
}

/// Directional constant `C_p(z)` for any `p`.
pub fn directional_constant(params: &ProblemParams, z: &Direction, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    if params.p == 1.0 {
        c1_directional(params, z)
    } else if params.p.is_infinite() {
        c_infinity_directional(params, z, cfg)
    } else {
        cp_directional(params, z, cfg)
    }
}

/// `C / x_{n+1}^{(n+p)/p}`.
pub fn scale_to_height(constant: f64, params: &ProblemParams, height: f64) -> f64 {
    constant / height.powf(params.height_exponent())
}

/// Sharp coefficient `C_p / x_{n+1}^{(n+p)/p}` at `x`.
pub fn coefficient(params: &ProblemParams, x: &HalfSpacePoint, cfg: &QuadratureConfig) -> Result<f64> {
    x.check_dimension(params.n)?;
    let c = sharp_constant(params, cfg)?;
    Ok(scale_to_height(c.value, params, x.height()))
}

/// Directional coefficient `C_p(z) / x_{n+1}^{(n+p)/p}`.
pub fn coefficient_directional(
    params: &ProblemParams,
    x: &HalfSpacePoint,
    z: &Direction,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    x.check_dimension(params.n)?;
    let c = directional_constant(params, z, cfg)?;
    Ok(scale_to_height(c.value, params, x.height()))
}

/// `C_p` along `p` near one, used for the continuity check against `C_1`.
pub fn cp_near_one(params: &ProblemParams, p: f64, cfg: &QuadratureConfig) -> Result<ConstantResult> {
    cp(&params.with_p(p)?, cfg)
}
