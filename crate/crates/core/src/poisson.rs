//! Generalized Poisson integrals `u_f(x) = k int x_{n+1}^a |y - x|^{-(n+a)} f(y') dy'`
//! on the half-space, their gradients and the sharpness harness.
//!
//! Integrals over the boundary are taken in polar coordinates around a
//! centre (the projection `x'` for `u_f`), with a radial split at the height
//! `h = x_{n+1}` and the tail mapped through `r = h / s`. Only `n = 2, 3`
//! are supported.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{directional_constant, scale_to_height, Direction, ProblemParams};
use crate::error::{Error, Result};
use crate::quadrature::{Integrator, QuadratureConfig, VectorIntegral};
use crate::serde_ext::ext_f64;
use crate::specfun::{ball_volume, normalization};

/// Ratio overshoot tolerated by [`sharpness_ratio`] before it reports a violation.
pub const SHARPNESS_TOLERANCE: f64 = 1e-5;

/// Point `x = (x', x_{n+1})` of the upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpacePoint {
    horizontal: Vec<f64>,
    height: f64,
}

impl HalfSpacePoint {
    pub fn new(horizontal: Vec<f64>, height: f64) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() {
            return Err(Error::InvalidParams(format!("x_(n+1) must be positive (got {height})")));
        }
        if horizontal.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("x' must be finite".into()));
        }
        Ok(Self { horizontal, height })
    }

    /// `(0, ..., 0, height)`.
    pub fn above_origin(n: u32, height: f64) -> Result<Self> {
        Self::new(vec![0.0; n as usize], height)
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.horizontal
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn n(&self) -> u32 {
        self.horizontal.len() as u32
    }

    pub fn check_dimension(&self, n: u32) -> Result<()> {
        if self.n() != n {
            return Err(Error::InvalidParams(format!(
                "point has n = {}, expected n = {n}",
                self.n()
            )));
        }
        Ok(())
    }

    /// The point moved by `delta` along coordinate `axis` (`axis = n` is vertical).
    pub fn shifted(&self, axis: usize, delta: f64) -> Result<Self> {
        let mut p = self.clone();
        if axis == self.horizontal.len() {
            p.height += delta;
            if !(p.height > 0.0) {
                return Err(Error::InvalidParams("shift leaves the half-space".into()));
            }
        } else {
            p.horizontal[axis] += delta;
        }
        Ok(p)
    }
}

/// Where a boundary function lives.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// Vanishes outside the closed ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// `|f(y)| = O(|y - center|^{-decay})`; `scale` is the length beyond which the
    /// tail behaviour sets in.
    Unbounded {
        center: Vec<f64>,
        scale: f64,
        #[serde(serialize_with = "ext_f64")]
        decay: f64,
    },
}

impl Support {
    fn center(&self) -> &[f64] {
        match self {
            Support::Ball { center, .. } | Support::Unbounded { center, .. } => center,
        }
    }
}

type Rule = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type NormRule = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

/// A boundary datum `f` on `R^n`.
#[derive(Clone)]
pub struct BoundaryFunction {
    n: u32,
    rule: Rule,
    support: Support,
    analytic_norm: Option<NormRule>,
    /// Radii about `kink_center` where `f` is not smooth.
    kinks: Vec<f64>,
    kink_center: Vec<f64>,
    label: String,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("support", &self.support)
            .field("kinks", &self.kinks)
            .finish()
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_n(n: u32) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::Dimension {
            n: n as usize,
            reason: "boundary quadrature is implemented for n = 2 and n = 3",
        })
    }
}

impl BoundaryFunction {
    /// Arbitrary rule with the given support; the p-norm is computed numerically.
    pub fn custom<F>(n: u32, rule: F, support: Support, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if support.center().len() != n as usize {
            return Err(Error::InvalidParams("support centre has the wrong dimension".into()));
        }
        Ok(Self {
            n,
            rule: Arc::new(rule),
            support,
            analytic_norm: None,
            kinks: Vec::new(),
            kink_center: vec![0.0; n as usize],
            label: label.into(),
        })
    }

    /// `height` times the indicator of the closed ball `|y - center| <= radius`.
    pub fn indicator_ball(center: Vec<f64>, radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParams(format!("radius must be positive (got {radius})")));
        }
        let n = center.len() as u32;
        let volume = ball_volume(n)? * radius.powi(n as i32);
        let c = center.clone();
        let r2 = radius * radius;
        let mut f = Self::custom(
            n,
            move |y| if dist2(y, &c) <= r2 { height } else { 0.0 },
            Support::Ball { center, radius },
            format!("indicator ball radius {radius:e}"),
        )?;
        f.analytic_norm = Some(Arc::new(move |p| {
            Some(if p.is_infinite() {
                height.abs()
            } else {
                height.abs() * volume.powf(1.0 / p)
            })
        }));
        Ok(f)
    }

    /// Indicator of a ball of radius `radius` scaled to unit mass.
    pub fn bump(center: Vec<f64>, radius: f64) -> Result<Self> {
        let n = center.len() as u32;
        let volume = ball_volume(n)? * radius.powi(n as i32);
        let mut f = Self::indicator_ball(center, radius, 1.0 / volume)?;
        f.label = format!("unit-mass bump radius {radius:e}");
        Ok(f)
    }

    /// `f = 0`.
    pub fn zero(n: u32) -> Result<Self> {
        let mut f = Self::custom(
            n,
            |_| 0.0,
            Support::Ball {
                center: vec![0.0; n as usize],
                radius: 0.0,
            },
            "zero",
        )?;
        f.analytic_norm = Some(Arc::new(|_| Some(0.0)));
        Ok(f)
    }

    /// `weight exp(-|y - center|^2 / (2 width^2))`.
    pub fn gaussian(center: Vec<f64>, width: f64, weight: f64) -> Result<Self> {
        let n = center.len();
        let mut f = Self::gaussian_mixture(vec![(center, width, weight)])?;
        f.analytic_norm = Some(Arc::new(move |p| {
            Some(if p.is_infinite() {
                weight.abs()
            } else {
                weight.abs() * (2.0 * PI * width * width / p).powf(n as f64 / (2.0 * p))
            })
        }));
        Ok(f)
    }

    /// Sum of Gaussians `(center, width, weight)`.
    pub fn gaussian_mixture(components: Vec<(Vec<f64>, f64, f64)>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidParams("empty Gaussian mixture".into()));
        };
        let n = first.0.len();
        if components.iter().any(|(c, w, _)| c.len() != n || !(*w > 0.0)) {
            return Err(Error::InvalidParams(
                "mixture components need equal dimension and width > 0".into(),
            ));
        }
        let mut centroid = vec![0.0; n];
        for (c, _, _) in &components {
            centroid
                .iter_mut()
                .zip(c)
                .for_each(|(m, v)| *m += v / components.len() as f64);
        }
        let scale = components
            .iter()
            .map(|(c, w, _)| dist2(c, &centroid).sqrt() + 3.0 * w)
            .fold(0.0, f64::max);
        let comps: Vec<(Vec<f64>, f64, f64)> = components.into_iter().map(|(c, w, a)| (c, -0.5 / (w * w), a)).collect();
        let count = comps.len();
        Self::custom(
            n as u32,
            move |y| comps.iter().map(|(c, k, a)| a * (k * dist2(y, c)).exp()).sum(),
            Support::Unbounded {
                center: centroid,
                scale,
                decay: f64::INFINITY,
            },
            format!("gaussian mixture of {count}"),
        )
    }

    /// `weight exp(-|y-c|^2/(2 width^2)) cos((k, y - c))`; the sup-norm is `|weight|`,
    /// attained at `c`.
    pub fn modulated_gaussian(center: Vec<f64>, width: f64, wave: Vec<f64>, weight: f64) -> Result<Self> {
        let n = center.len();
        if wave.len() != n || !(width > 0.0) {
            return Err(Error::InvalidParams(
                "modulated Gaussian needs width > 0 and matching wave vector".into(),
            ));
        }
        let c = center.clone();
        let k = -0.5 / (width * width);
        let mut f = Self::custom(
            n as u32,
            move |y| {
                let phase: f64 = y.iter().zip(&c).zip(&wave).map(|((y, c), w)| w * (y - c)).sum();
                weight * (k * dist2(y, &c)).exp() * phase.cos()
            },
            Support::Unbounded {
                center,
                scale: 3.0 * width,
                decay: f64::INFINITY,
            },
            "modulated gaussian",
        )?;
        f.analytic_norm = Some(Arc::new(move |p| p.is_infinite().then_some(weight.abs())));
        Ok(f)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.rule)(y)
    }

    /// Closed-form `||f||_p` when one is known.
    pub fn analytic_norm(&self, p: f64) -> Option<f64> {
        self.analytic_norm.as_ref().and_then(|g| g(p))
    }

    fn radial_kinks(&self, center: &[f64]) -> &[f64] {
        if self.kink_center == center {
            &self.kinks
        } else {
            &[]
        }
    }
}

/// Polar-coordinate integration of `R^n` about `center`.
struct Polar<'a> {
    integ: &'a Integrator,
    center: &'a [f64],
    split: f64,
    support: &'a Support,
    kinks: &'a [f64],
    abs_tol: f64,
    rel_tol: f64,
}

impl Polar<'_> {
    /// `[r_lo, r_hi]` covered by the support along the ray `center + r omega`.
    fn radial_range(&self, omega: &[f64]) -> Option<(f64, f64)> {
        match self.support {
            Support::Unbounded { .. } => Some((0.0, f64::INFINITY)),
            Support::Ball { center, radius } => {
                if *radius <= 0.0 {
                    return None;
                }
                let d: Vec<f64> = self.center.iter().zip(center).map(|(a, b)| a - b).collect();
                let b: f64 = d.iter().zip(omega).map(|(d, w)| d * w).sum();
                let disc = b * b - (d.iter().map(|v| v * v).sum::<f64>() - radius * radius);
                if disc <= 0.0 {
                    return None;
                }
                let root = disc.sqrt();
                let (lo, hi) = ((-b - root).max(0.0), -b + root);
                (hi > lo).then_some((lo, hi))
            }
        }
    }

    /// `int f(center + r omega) r^{n-1} dr` along one ray.
    fn radial<const K: usize, F>(&self, omega: &[f64], f: &F, tol_scale: f64) -> Result<[f64; K]>
    where
        F: Fn(&[f64], f64) -> [f64; K],
    {
        let Some((lo, hi)) = self.radial_range(omega) else {
            return Ok([0.0; K]);
        };
        let n = omega.len() as i32;
        let h = self.split;
        let abs = 0.25 * self.abs_tol * tol_scale;
        let mut y = vec![0.0; omega.len()];
        let mut at = |r: f64| {
            y.iter_mut()
                .zip(self.center.iter().zip(omega))
                .for_each(|(y, (c, w))| *y = c + r * w);
            let mut v = f(&y, r);
            let w = r.powi(n - 1);
            v.iter_mut().for_each(|v| *v *= w);
            v
        };
        let mut total = [0.0; K];
        let mut add = |v: VectorIntegral<K>| total.iter_mut().zip(v.value).for_each(|(t, v)| *t += v);
        if lo < h {
            let top = hi.min(h);
            let mut breaks = vec![lo];
            breaks.extend(self.kinks.iter().copied().filter(|&k| k > lo && k < top));
            breaks.push(top);
            add(self.integ.integrate_vec(&mut at, &breaks, abs, self.rel_tol)?);
        }
        if hi > h {
            let a = lo.max(h);
            let mut breaks = vec![if hi.is_finite() { h / hi } else { 0.0 }];
            let mut inner: Vec<f64> = self
                .kinks
                .iter()
                .copied()
                .filter(|&k| k > a && k < hi)
                .map(|k| h / k)
                .collect();
            inner.reverse();
            breaks.extend(inner);
            breaks.push(h / a);
            add(self.integ.integrate_vec(
                |s| {
                    if s <= 0.0 {
                        return [0.0; K];
                    }
                    let mut v = at(h / s);
                    let jac = h / (s * s);
                    v.iter_mut().for_each(|v| *v *= jac);
                    v
                },
                &breaks,
                abs,
                self.rel_tol,
            )?);
        }
        Ok(total)
    }

    /// `int_{R^n} f(y) dy`; `f` receives `y` and `|y - center|`.
    fn integrate<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(&[f64], f64) -> [f64; K],
    {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let guard = |r: Result<[f64; K]>| match r {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [0.0; K]
            }
        };
        let angles = [0.0, FRAC_PI_2, PI, 1.5 * PI, 2.0 * PI];
        let out = match self.center.len() {
            2 => self.integ.integrate_vec(
                |phi| {
                    if failure.borrow().is_some() {
                        return [0.0; K];
                    }
                    guard(self.radial(&[phi.cos(), phi.sin()], &f, 0.1 / (2.0 * PI)))
                },
                &angles,
                self.abs_tol,
                self.rel_tol,
            )?,
            3 => self.integ.integrate_vec(
                |theta| {
                    if failure.borrow().is_some() {
                        return [0.0; K];
                    }
                    let (st, ct) = theta.sin_cos();
                    let ring = self.integ.integrate_vec(
                        |phi| {
                            if failure.borrow().is_some() {
                                return [0.0; K];
                            }
                            let omega = [st * phi.cos(), st * phi.sin(), ct];
                            guard(self.radial(&omega, &f, 0.01 / (2.0 * PI * PI)))
                        },
                        &angles,
                        0.1 * self.abs_tol / PI,
                        self.rel_tol,
                    );
                    let mut v = guard(ring.map(|r| r.value));
                    v.iter_mut().for_each(|v| *v *= st);
                    v
                },
                &[0.0, FRAC_PI_2, PI],
                self.abs_tol,
                self.rel_tol,
            )?,
            n => {
                return Err(Error::Dimension {
                    n,
                    reason: "boundary quadrature is implemented for n = 2 and n = 3",
                })
            }
        };
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(out.value)
    }
}

fn check_inputs(f: &BoundaryFunction, x: &HalfSpacePoint, params: &ProblemParams) -> Result<()> {
    check_n(params.n())?;
    x.check_dimension(params.n())?;
    if f.n != params.n() {
        return Err(Error::InvalidParams(format!(
            "boundary function has n = {}, expected {}",
            f.n,
            params.n()
        )));
    }
    if let Support::Unbounded { decay, .. } = f.support {
        if params.alpha() + decay <= 0.0 {
            return Err(Error::Divergent(format!(
                "kernel decay alpha = {} plus data decay {decay} is not positive",
                params.alpha()
            )));
        }
    }
    Ok(())
}

fn polar_about<'a>(integ: &'a Integrator, f: &'a BoundaryFunction, x: &'a HalfSpacePoint) -> Polar<'a> {
    let cfg = integ.config();
    Polar {
        integ,
        center: x.horizontal(),
        split: x.height(),
        support: &f.support,
        kinks: f.radial_kinks(x.horizontal()),
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
    }
}

/// `u_f(x)`.
pub fn evaluate(
    f: &BoundaryFunction,
    x: &HalfSpacePoint,
    params: &ProblemParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_inputs(f, x, params)?;
    let k = params.normalization()?;
    let integ = Integrator::new(cfg)?;
    let h = x.height();
    let na = params.n() as f64 + params.alpha();
    let [v] = polar_about(&integ, f, x).integrate(|y, r| {
        let fy = f.eval(y);
        if fy == 0.0 {
            return [0.0];
        }
        // (h / rho)^{n+a} h^{-n}
        let t = h / r.hypot(h);
        [fy * t.powf(na) / h.powi(params.n() as i32)]
    })?;
    Ok(k * v)
}

/// `grad u_f(x)` from the analytic integrand
/// `k h^{a-1} rho^{-(n+a)} f(y') [ (n+a) h r omega / rho^2, a - (n+a) h^2 / rho^2 ]`.
pub fn gradient(
    f: &BoundaryFunction,
    x: &HalfSpacePoint,
    params: &ProblemParams,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    check_inputs(f, x, params)?;
    let k = params.normalization()?;
    let integ = Integrator::new(cfg)?;
    let n = params.n() as usize;
    let alpha = params.alpha();
    let na = n as f64 + alpha;
    let h = x.height();
    let xh = x.horizontal();
    let v = polar_about(&integ, f, x).integrate::<4, _>(|y, r| {
        let fy = f.eval(y);
        if fy == 0.0 {
            return [0.0; 4];
        }
        let rho2 = r * r + h * h;
        let t = h / rho2.sqrt();
        let base = fy * t.powf(na) / h.powi(n as i32 + 1);
        let c2 = h * h / rho2;
        let mut out = [0.0; 4];
        for i in 0..n {
            out[i] = base * na * h * (y[i] - xh[i]) / rho2;
        }
        out[3] = base * (alpha - na * c2);
        out
    })?;
    let mut g: Vec<f64> = v[..n].iter().map(|c| k * c).collect();
    g.push(k * v[3]);
    Ok(g)
}

/// Central differences of `u_f` with the given step in each coordinate.
///
/// The `2(n+1)` shifted values are integrated together in polar coordinates
/// about `x'`, so quadrature errors largely cancel in the differences.
pub fn gradient_fd(
    f: &BoundaryFunction,
    x: &HalfSpacePoint,
    params: &ProblemParams,
    step: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 0.25 * x.height()) {
        return Err(Error::InvalidParams(format!(
            "step must lie in (0, x_(n+1)/4) (step = {step})"
        )));
    }
    check_inputs(f, x, params)?;
    let k = params.normalization()?;
    let integ = Integrator::new(cfg)?;
    let n = params.n() as usize;
    let alpha = params.alpha();
    let na = n as f64 + alpha;
    let points: Vec<HalfSpacePoint> = (0..=n)
        .flat_map(|axis| [x.shifted(axis, step), x.shifted(axis, -step)])
        .collect::<Result<_>>()?;
    let v = polar_about(&integ, f, x).integrate::<8, _>(|y, _| {
        let fy = f.eval(y);
        let mut out = [0.0; 8];
        if fy == 0.0 {
            return out;
        }
        for (o, pt) in out.iter_mut().zip(&points) {
            let h = pt.height();
            let r2: f64 = y.iter().zip(pt.horizontal()).map(|(a, b)| (a - b) * (a - b)).sum();
            *o = fy * h.powf(alpha) / (r2 + h * h).powf(0.5 * na);
        }
        out
    })?;
    Ok((0..=n)
        .map(|axis| k * (v[2 * axis] - v[2 * axis + 1]) / (2.0 * step))
        .collect())
}

/// `||f||_p`, closed form when known, otherwise by polar quadrature about the
/// support centre. `p = inf` needs a closed form.
pub fn lp_norm(f: &BoundaryFunction, p: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if let Some(v) = f.analytic_norm(p) {
        return Ok(v);
    }
    if p.is_infinite() {
        return Err(Error::InvalidParams(format!(
            "no closed-form sup norm for '{}'",
            f.label
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParams(format!("p must be >= 1 (p = {p})")));
    }
    check_n(f.n)?;
    let (split, decay) = match &f.support {
        Support::Ball { radius, .. } => (radius.max(f64::MIN_POSITIVE), f64::INFINITY),
        Support::Unbounded { scale, decay, .. } => (*scale, *decay),
    };
    if decay * p <= f.n as f64 {
        return Err(Error::Divergent(format!("|f|^p decays like r^-{}", decay * p)));
    }
    let integ = Integrator::new(cfg)?;
    let center = f.support.center();
    let polar = Polar {
        integ: &integ,
        center,
        split,
        support: &f.support,
        kinks: f.radial_kinks(center),
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
    };
    let [v] = polar.integrate(|y, _| [f.eval(y).abs().powf(p)])?;
    Ok(v.powf(1.0 / p))
}

/// `f* = sgn g |g|^{1/(p-1)}` on `|y' - x'| <= truncation_radius`, where `g` is the
/// kernel of `(grad u_f(x), z)` scaled by `x_{n+1}^{n+a}`. For `p = inf` this is `sgn g`.
pub fn extremal_boundary_function(
    params: &ProblemParams,
    x: &HalfSpacePoint,
    z: &Direction,
    truncation_radius: f64,
) -> Result<BoundaryFunction> {
    let p = params.p();
    if !(p >= 1.1) {
        return Err(Error::InvalidParams(format!(
            "extremal construction needs p >= 1.1 (p = {p}); use a bump for p = 1"
        )));
    }
    if !(truncation_radius > 0.0) {
        return Err(Error::InvalidParams("truncation radius must be positive".into()));
    }
    x.check_dimension(params.n())?;
    if z.n() != params.n() {
        return Err(Error::InvalidParams("direction dimension mismatch".into()));
    }
    let n = params.n() as usize;
    let alpha = params.alpha();
    let na = n as f64 + alpha;
    let h = x.height();
    let xh = x.horizontal().to_vec();
    let zv = z.vertical();
    let zh = z.horizontal().to_vec();
    let expo = if p.is_infinite() { 0.0 } else { 1.0 / (p - 1.0) };
    let c = xh.clone();
    let r2max = truncation_radius * truncation_radius;
    let rule = move |y: &[f64]| {
        let r2 = dist2(y, &c);
        if r2 > r2max {
            return 0.0;
        }
        let rho2 = r2 + h * h;
        let c2 = h * h / rho2;
        let proj: f64 = y.iter().zip(&c).zip(&zh).map(|((y, c), z)| (y - c) * z).sum();
        let g = (alpha * zv - na * c2 * zv + na * h * proj / rho2) * c2.powf(0.5 * na);
        if expo == 0.0 {
            g.signum()
        } else {
            g.signum() * g.abs().powf(expo)
        }
    };
    let mut f = BoundaryFunction::custom(
        params.n(),
        rule,
        Support::Ball {
            center: xh.clone(),
            radius: truncation_radius,
        },
        format!("extremal truncated at radius {truncation_radius:e}"),
    )?;
    if z.horizontal_norm() == 0.0 && alpha > 0.0 {
        let zero = h * (n as f64 / alpha).sqrt();
        if zero < truncation_radius {
            f.kinks = vec![zero];
        }
    }
    f.kink_center = xh;
    if p.is_infinite() {
        f.analytic_norm = Some(Arc::new(|p| p.is_infinite().then_some(1.0)));
    }
    Ok(f)
}

/// Outcome of testing `|(grad u_f(x), z)| <= C_p(z) x_{n+1}^{-(n+p)/p} ||f||_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub params: ProblemParams,
    pub point: HalfSpacePoint,
    pub direction: Vec<f64>,
    pub function: String,
    pub gradient: Vec<f64>,
    /// `(grad u_f(x), z)`.
    pub derivative_value: f64,
    pub p_norm: f64,
    /// `C_p(z) x_{n+1}^{-(n+p)/p} ||f||_p`.
    pub bound: f64,
    pub ratio: f64,
}

fn report_from_parts(
    params: &ProblemParams,
    x: &HalfSpacePoint,
    z: &Direction,
    f: &BoundaryFunction,
    directional: f64,
    cfg: &QuadratureConfig,
) -> Result<SharpnessReport> {
    let grad = gradient(f, x, params, cfg)?;
    let derivative_value: f64 = grad.iter().zip(z.components()).map(|(g, z)| g * z).sum();
    let p_norm = lp_norm(f, params.p(), cfg)?;
    let bound = scale_to_height(directional, params, x.height()) * p_norm;
    let ratio = if bound > 0.0 {
        derivative_value.abs() / bound
    } else {
        0.0
    };
    if ratio > 1.0 + SHARPNESS_TOLERANCE {
        return Err(Error::CrossCheck {
            what: "sharp gradient inequality",
            left: derivative_value.abs(),
            right: bound,
        });
    }
    Ok(SharpnessReport {
        params: *params,
        point: x.clone(),
        direction: z.components().to_vec(),
        function: f.label.clone(),
        gradient: grad,
        derivative_value,
        p_norm,
        bound,
        ratio,
    })
}

/// Ratio `|(grad u_f(x), z)| / (C_p(z) x_{n+1}^{-(n+p)/p} ||f||_p)`.
///
/// Fails with a cross-check error when the ratio exceeds `1 + SHARPNESS_TOLERANCE`.
pub fn sharpness_ratio(
    params: &ProblemParams,
    x: &HalfSpacePoint,
    z: &Direction,
    f: &BoundaryFunction,
    cfg: &QuadratureConfig,
) -> Result<SharpnessReport> {
    let c = directional_constant(params, z, cfg)?;
    report_from_parts(params, x, z, f, c.value, cfg)
}

/// [`sharpness_ratio`] for many functions sharing one directional constant,
/// evaluated in parallel; reports keep the input order.
pub fn sharpness_batch(
    params: &ProblemParams,
    x: &HalfSpacePoint,
    z: &Direction,
    functions: &[BoundaryFunction],
    cfg: &QuadratureConfig,
) -> Result<Vec<SharpnessReport>> {
    let c = directional_constant(params, z, cfg)?;
    functions
        .par_iter()
        .map(|f| report_from_parts(params, x, z, f, c.value, cfg))
        .collect()
}

/// Largest ratio over a set of directions.
pub fn best_direction_ratio(
    params: &ProblemParams,
    x: &HalfSpacePoint,
    f: &BoundaryFunction,
    directions: &[Direction],
    cfg: &QuadratureConfig,
) -> Result<SharpnessReport> {
    let mut best: Option<SharpnessReport> = None;
    for z in directions {
        let r = sharpness_ratio(params, x, z, f, cfg)?;
        if best.as_ref().is_none_or(|b| r.ratio > b.ratio) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::InvalidParams("no directions given".into()))
}

/// Seeded Gaussian mixture near `x'`: 1 to 4 components with centres
/// `x' + N(0, h^2)`, widths in `[0.3h, 2h]` and weights in `[-1, 1]`.
pub fn random_gaussian_mixture(x: &HalfSpacePoint, seed: u64) -> Result<BoundaryFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = x.height();
    let offset = Normal::new(0.0, h).expect("positive height");
    let width = Uniform::new_inclusive(0.3 * h, 2.0 * h);
    let weight = Uniform::new_inclusive(-1.0, 1.0);
    let count = rng.gen_range(1..=4);
    let components = (0..count)
        .map(|_| {
            let c = x.horizontal().iter().map(|v| v + offset.sample(&mut rng)).collect();
            (c, width.sample(&mut rng), weight.sample(&mut rng))
        })
        .collect();
    let mut f = BoundaryFunction::gaussian_mixture(components)?;
    f.label = format!("random gaussian mixture seed {seed}");
    Ok(f)
}

/// Kernel mass `k int x_{n+1}^a |y - x|^{-(n+a)} dy'` over `|y' - x'| <= radius`.
pub fn kernel_mass(params: &ProblemParams, height: f64, radius: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let x = HalfSpacePoint::above_origin(params.n(), height)?;
    let f = BoundaryFunction::indicator_ball(vec![0.0; params.n() as usize], radius, 1.0)?;
    evaluate(&f, &x, params, cfg)
}

/// `k_{n,a}` re-exported for callers assembling bounds by hand.
pub fn kernel_normalization(params: &ProblemParams) -> Result<f64> {
    normalization(params.n(), params.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn params(n: u32, alpha: f64, p: f64) -> ProblemParams {
        ProblemParams::new(n, alpha, p).unwrap()
    }

    #[test]
    fn point_validation() {
        assert!(HalfSpacePoint::new(vec![0.0, 0.0], 0.0).is_err());
        assert!(HalfSpacePoint::new(vec![0.0, 0.0], -1.0).is_err());
        let x = HalfSpacePoint::new(vec![1.0, 2.0], 0.5).unwrap();
        assert_eq!(x.shifted(2, 0.1).unwrap().height(), 0.6);
        assert!(x.shifted(2, -0.6).is_err());
    }

    #[test]
    fn truncated_constant_has_unit_mass() {
        let p = params(2, 1.0, 2.0);
        let m = kernel_mass(&p, 1.0, 1e4, &cfg()).unwrap();
        // Exact mass of the disk: 1 - h / sqrt(h^2 + R^2).
        assert_relative_eq!(m, 1.0 - 1.0 / (1.0f64 + 1e8).sqrt(), max_relative = 1e-10);
        assert!((m - 1.0).abs() < 1e-4);
        // n = 3: outside mass (2/pi) (pi/2 - atan R + R/(R^2+1)).
        let p3 = params(3, 1.0, 2.0);
        let r = 1e4f64;
        let exact = 1.0 - 2.0 / PI * (FRAC_PI_2 - r.atan() + r / (r * r + 1.0));
        assert_relative_eq!(kernel_mass(&p3, 1.0, r, &cfg()).unwrap(), exact, max_relative = 1e-10);
    }

    #[test]
    fn kernel_mass_for_fractional_alpha() {
        // Exact: mass inside radius R equals the regularized incomplete beta of
        // R^2/(R^2+h^2); check the full mass limit through a large radius instead.
        for alpha in [0.5, 1.5, 2.0] {
            let p = params(2, alpha, 2.0);
            let m = kernel_mass(&p, 1.0, 1e6, &cfg()).unwrap();
            let tail = 1e-6f64.powf(alpha);
            assert!((m - 1.0).abs() < 2.0 * tail + 1e-7, "alpha {alpha}: {m}");
        }
    }

    #[test]
    fn unit_disk_matches_closed_form() {
        // u at (0,0,1) for the unit-disk indicator, alpha = 1: 1 - 1/sqrt(2).
        let p = params(2, 1.0, 2.0);
        let f = BoundaryFunction::indicator_ball(vec![0.0, 0.0], 1.0, 1.0).unwrap();
        let x = HalfSpacePoint::above_origin(2, 1.0).unwrap();
        let u = evaluate(&f, &x, &p, &cfg()).unwrap();
        assert_relative_eq!(u, 1.0 - 0.5f64.sqrt(), max_relative = 1e-12);
        assert!(u > 0.0 && u < 1.0);
    }

    #[test]
    fn off_centre_ball_is_bounded_and_clipped_correctly() {
        let p = params(2, 1.0, 2.0);
        let f = BoundaryFunction::indicator_ball(vec![2.0, 1.0], 0.7, 1.0).unwrap();
        let x = HalfSpacePoint::new(vec![0.3, -0.2], 0.8).unwrap();
        let u = evaluate(&f, &x, &p, &cfg()).unwrap();
        assert!(u > 0.0 && u < 1.0);
        // Same integral with polar coordinates about the ball centre.
        let k = p.normalization().unwrap();
        let integ = Integrator::new(&cfg()).unwrap();
        let sup = f.support.clone();
        let polar = Polar {
            integ: &integ,
            center: &[2.0, 1.0],
            split: 0.7,
            support: &sup,
            kinks: &[],
            abs_tol: 1e-12,
            rel_tol: 1e-12,
        };
        let [v] = polar
            .integrate(|y, _| {
                let r2 = dist2(y, x.horizontal());
                [0.8 / (r2 + 0.64).powf(1.5)]
            })
            .unwrap();
        assert_relative_eq!(u, k * v, max_relative = 1e-9);
    }

    #[test]
    fn radial_data_has_no_horizontal_gradient() {
        let p = params(2, 1.0, 2.0);
        let f = BoundaryFunction::gaussian(vec![0.4, -0.3], 0.9, 1.0).unwrap();
        let x = HalfSpacePoint::new(vec![0.4, -0.3], 1.0).unwrap();
        let g = gradient(&f, &x, &p, &cfg()).unwrap();
        assert!(g[0].abs() < 1e-8 && g[1].abs() < 1e-8, "{g:?}");
        assert!(g[2].abs() > 1e-3);
    }

    #[test]
    fn constant_data_has_vanishing_gradient() {
        let p = params(2, 1.0, 2.0);
        let f = BoundaryFunction::indicator_ball(vec![0.0, 0.0], 1e4, 1.0).unwrap();
        let x = HalfSpacePoint::above_origin(2, 1.0).unwrap();
        let g = gradient(&f, &x, &p, &cfg()).unwrap();
        assert!(g.iter().all(|c| c.abs() < 1e-3), "{g:?}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = params(2, 1.0, 2.0);
        let f =
            BoundaryFunction::gaussian_mixture(vec![(vec![0.2, 0.1], 0.8, 1.0), (vec![-0.5, 0.4], 0.5, -0.6)]).unwrap();
        let x = HalfSpacePoint::new(vec![0.0, 0.0], 1.0).unwrap();
        let g = gradient(&f, &x, &p, &cfg()).unwrap();
        let fd = gradient_fd(&f, &x, &p, 1e-4, &cfg()).unwrap();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * scale, "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn zero_function() {
        let p = params(3, 1.0, 2.0);
        let f = BoundaryFunction::zero(3).unwrap();
        let x = HalfSpacePoint::above_origin(3, 1.0).unwrap();
        assert_eq!(gradient_fd(&f, &x, &p, 1e-3, &cfg()).unwrap(), vec![0.0; 4]);
        assert_eq!(gradient(&f, &x, &p, &cfg()).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn dimension_and_divergence_errors() {
        let p4 = params(4, 1.0, 2.0);
        let f = BoundaryFunction::gaussian(vec![0.0; 4], 1.0, 1.0).unwrap();
        let x = HalfSpacePoint::above_origin(4, 1.0).unwrap();
        assert!(matches!(evaluate(&f, &x, &p4, &cfg()), Err(Error::Dimension { .. })));
        let p = params(2, -0.5, 2.0);
        let slow = BoundaryFunction::custom(
            2,
            |y| 1.0 / (1.0 + y[0] * y[0] + y[1] * y[1]).powf(0.2),
            Support::Unbounded {
                center: vec![0.0, 0.0],
                scale: 1.0,
                decay: 0.4,
            },
            "slow",
        )
        .unwrap();
        let x = HalfSpacePoint::above_origin(2, 1.0).unwrap();
        assert!(matches!(evaluate(&slow, &x, &p, &cfg()), Err(Error::Divergent(_))));
    }

    #[test]
    fn numeric_norms_match_closed_forms() {
        let f = BoundaryFunction::gaussian(vec![0.3, 0.1], 0.7, -2.0).unwrap();
        let numeric = BoundaryFunction::gaussian_mixture(vec![(vec![0.3, 0.1], 0.7, -2.0)]).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert_relative_eq!(
                lp_norm(&numeric, p, &cfg()).unwrap(),
                lp_norm(&f, p, &cfg()).unwrap(),
                max_relative = 1e-9
            );
        }
        let b = BoundaryFunction::bump(vec![0.0, 0.0, 0.0], 0.1).unwrap();
        assert_relative_eq!(lp_norm(&b, 1.0, &cfg()).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn extremal_sign_change_on_the_cone() {
        let p = params(2, 1.0, 2.0);
        let x = HalfSpacePoint::above_origin(2, 1.0).unwrap();
        let f = extremal_boundary_function(&p, &x, &Direction::normal(2), 100.0).unwrap();
        // (n+a) cos^2 = a  <=>  r = h sqrt(n / a) = sqrt 2.
        let r0 = 2f64.sqrt();
        assert!(f.eval(&[r0 - 1e-6, 0.0]) < 0.0);
        assert!(f.eval(&[r0 + 1e-6, 0.0]) > 0.0);
        assert_eq!(f.eval(&[100.1, 0.0]), 0.0);
        assert!(extremal_boundary_function(&params(2, 1.0, 1.05), &x, &Direction::normal(2), 1.0).is_err());
    }

    #[test]
    fn extremal_p2_nearly_attains_bound() {
        let p = params(2, 1.0, 2.0);
        let x = HalfSpacePoint::above_origin(2, 1.0).unwrap();
        let z = Direction::normal(2);
        let f = extremal_boundary_function(&p, &x, &z, 100.0).unwrap();
        let r = sharpness_ratio(&p, &x, &z, &f, &cfg()).unwrap();
        assert!(r.ratio >= 0.99 && r.ratio <= 1.0 + 1e-6, "{}", r.ratio);
    }

    #[test]
    fn extremal_p_infinity_is_a_sign_pattern() {
        let p = params(2, 1.0, f64::INFINITY);
        let x = HalfSpacePoint::above_origin(2, 1.0).unwrap();
        let z = Direction::normal(2);
        // The tail beyond R carries a fraction of order R^-alpha.
        let f = extremal_boundary_function(&p, &x, &z, 1e4).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0]), -1.0);
        assert_eq!(f.eval(&[5.0, 0.0]), 1.0);
        assert_eq!(lp_norm(&f, f64::INFINITY, &cfg()).unwrap(), 1.0);
        let r = sharpness_ratio(&p, &x, &z, &f, &cfg()).unwrap();
        assert!(r.ratio >= 0.999 && r.ratio <= 1.0 + 1e-6, "{}", r.ratio);
    }

    #[test]
    fn bump_nearly_attains_p1_bound() {
        let p = params(2, 1.0, 1.0);
        let x = HalfSpacePoint::above_origin(2, 1.0).unwrap();
        let f = BoundaryFunction::bump(vec![0.0, 0.0], 1e-3).unwrap();
        let r = sharpness_ratio(&p, &x, &Direction::normal(2), &f, &cfg()).unwrap();
        assert!(r.ratio >= 0.99 && r.ratio <= 1.0, "{}", r.ratio);
    }

    #[test]
    fn random_mixtures_respect_the_bound() {
        let p = params(2, 1.0, 2.0);
        let x = HalfSpacePoint::new(vec![0.1, -0.2], 1.0).unwrap();
        let fs: Vec<_> = (0..4).map(|s| random_gaussian_mixture(&x, s).unwrap()).collect();
        let reports = sharpness_batch(&p, &x, &Direction::normal(2), &fs, &cfg()).unwrap();
        assert!(reports.iter().all(|r| r.ratio <= 1.0 + 1e-6));
        let again = random_gaussian_mixture(&x, 2).unwrap();
        assert_eq!(again.eval(&[0.3, 0.3]), fs[2].eval(&[0.3, 0.3]));
    }
}
