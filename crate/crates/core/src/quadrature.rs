//! Deterministic adaptive quadrature and a compactified scalar maximizer.
//!
//! The workhorse is a globally adaptive Gauss-Legendre scheme: every segment
//! carries the rule applied to the whole segment and to both halves, the
//! difference serves as its error estimate, and the segment with the largest
//! estimate is bisected until the summed estimate meets the tolerance.
//!
//! Integrals over the polar angle `theta in [0, pi/2]` with a weight
//! `cos^beta(theta)` are split at `pi/4`; the part near `pi/2` is mapped to
//! `t = cos(theta)` and, for `beta < 0`, further to `t = T u^{1/(beta+1)}`,
//! which absorbs the endpoint singularity exactly.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which two objective values count as a tie.
pub const TIE_RELATIVE_TOLERANCE: f64 = 1e-9;

/// Coarse grid size over the compactified angle `psi = atan(gamma)`.
pub const GAMMA_GRID_NODES: usize = 64;

/// Golden-section stopping width in `psi`.
pub const GOLDEN_TOLERANCE: f64 = 1e-10;

const MAX_SEGMENTS: usize = 200_000;

/// Tolerances and sizes shared by every numerical routine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Gauss-Legendre nodes per panel.
    pub base_order: usize,
    /// Maximum bisection depth below each initial panel.
    pub max_depth: usize,
    /// Relative tolerance of two-dimensional integrals.
    pub tol_2d: f64,
    pub mc_samples: usize,
    pub rng_seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            base_order: 32,
            max_depth: 24,
            tol_2d: 1e-8,
            mc_samples: 1_000_000,
            rng_seed: 0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.abs_tol) || !positive(self.rel_tol) || !positive(self.tol_2d) {
            return Err(Error::InvalidParams("all tolerances must be > 0".into()));
        }
        if self.base_order < 2 {
            return Err(Error::InvalidParams("base_order must be >= 2".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidParams("max_depth must be >= 1".into()));
        }
        Ok(())
    }

    /// Same configuration with both 1-D tolerances replaced.
    pub fn with_tolerances(&self, abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Vector-valued counterpart of [`IntegralResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorIntegral<const K: usize> {
    pub value: [f64; K],
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        let n = order.max(1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fixed-order rule on `[a, b]`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.apply_vec::<1, _>(a, b, |x| [f(x)])[0]
    }

    pub fn apply_vec<const K: usize, F: FnMut(f64) -> [f64; K]>(&self, a: f64, b: f64, mut f: F) -> [f64; K] {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = [0.0; K];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(c + h * x);
            for k in 0..K {
                acc[k] += w * v[k];
            }
        }
        acc.map(|s| s * h)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Segment<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    left: [f64; K],
    right: [f64; K],
    err: f64,
    depth: usize,
}

#[derive(PartialEq)]
struct Ranked(f64, usize);

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; lower index wins ties so the order is reproducible.
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn max_norm<const K: usize>(v: &[f64; K]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Adaptive integrator bound to a configuration and a cached rule.
#[derive(Debug, Clone)]
pub struct Integrator {
    cfg: QuadratureConfig,
    rule: GaussLegendre,
}

impl Integrator {
    pub fn new(cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            rule: GaussLegendre::new(cfg.base_order),
        })
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    /// `int_a^b f` to the configured tolerances.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<IntegralResult> {
        self.integrate_tol(f, &[a, b], self.cfg.abs_tol, self.cfg.rel_tol)
    }

    /// Scalar integral over consecutive panels given by `breaks`.
    pub fn integrate_tol<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        breaks: &[f64],
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<IntegralResult> {
        let r = self.integrate_vec::<1, _>(|x| [f(x)], breaks, abs_tol, rel_tol)?;
        Ok(IntegralResult {
            value: r.value[0],
            error_estimate: r.error_estimate,
            evaluations: r.evaluations,
        })
    }

    /// Vector-valued adaptive integral; errors are measured in the max norm.
    pub fn integrate_vec<const K: usize, F: FnMut(f64) -> [f64; K]>(
        &self,
        mut f: F,
        breaks: &[f64],
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<VectorIntegral<K>> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams(format!(
                "integration breaks must be strictly increasing: {breaks:?}"
            )));
        }
        let n_rule = self.rule.order();
        let mut evaluations = 0usize;
        let make = |a: f64, b: f64, whole: [f64; K], depth: usize, f: &mut F| {
            let m = 0.5 * (a + b);
            let left = self.rule.apply_vec(a, m, &mut *f);
            let right = self.rule.apply_vec(m, b, &mut *f);
            let mut value = [0.0; K];
            let mut diff = [0.0; K];
            for k in 0..K {
                value[k] = left[k] + right[k];
                diff[k] = value[k] - whole[k];
            }
            Segment {
                a,
                b,
                value,
                left,
                right,
                err: max_norm(&diff),
                depth,
            }
        };

        let mut segments = Vec::new();
        for w in breaks.windows(2) {
            let whole = self.rule.apply_vec(w[0], w[1], &mut f);
            segments.push(make(w[0], w[1], whole, 0, &mut f));
        }
        evaluations += n_rule * 3 * segments.len();

        let mut heap: BinaryHeap<Ranked> = segments.iter().enumerate().map(|(i, s)| Ranked(s.err, i)).collect();
        let mut active = vec![true; segments.len()];
        let mut total = [0.0; K];
        let mut err = 0.0;
        let mut magnitude = 0.0;
        for s in &segments {
            for k in 0..K {
                total[k] += s.value[k];
            }
            err += s.err;
            magnitude += max_norm(&s.value);
        }
        let mut frozen_err = 0.0;

        loop {
            let tol = abs_tol
                .max(rel_tol * max_norm(&total))
                .max(64.0 * f64::EPSILON * magnitude);
            if err <= tol {
                // Resum in index order so the result does not carry update drift.
                let mut value = [0.0; K];
                let mut error_estimate = 0.0;
                for (s, _) in segments.iter().zip(&active).filter(|(_, &a)| a) {
                    for k in 0..K {
                        value[k] += s.value[k];
                    }
                    error_estimate += s.err;
                }
                return Ok(VectorIntegral {
                    value,
                    error_estimate,
                    evaluations,
                });
            }
            let fail = || Error::NonConvergence {
                estimate: max_norm(&total),
                error: err,
                tolerance: tol,
            };
            if frozen_err > tol || segments.len() >= MAX_SEGMENTS {
                return Err(fail());
            }
            let Some(Ranked(_, idx)) = heap.pop() else {
                return Err(fail());
            };
            let s = &segments[idx];
            if s.depth >= self.cfg.max_depth {
                frozen_err += s.err;
                continue;
            }
            let (a, b, depth, left, right) = (s.a, s.b, s.depth, s.left, s.right);
            for k in 0..K {
                total[k] -= s.value[k];
            }
            err -= s.err;
            magnitude -= max_norm(&s.value);
            let m = 0.5 * (a + b);
            active[idx] = false;
            let l = make(a, m, left, depth + 1, &mut f);
            let r = make(m, b, right, depth + 1, &mut f);
            evaluations += 4 * n_rule;
            for child in [l, r] {
                for k in 0..K {
                    total[k] += child.value[k];
                }
                err += child.err;
                magnitude += max_norm(&child.value);
                heap.push(Ranked(child.err, segments.len()));
                segments.push(child);
                active.push(true);
            }
            err = err.max(0.0);
        }
    }

    /// `int_0^{pi/2} g(theta) cos^beta(theta) dtheta` for `beta > -1`.
    ///
    /// `g` must be bounded; all of the endpoint singularity is carried by the weight.
    pub fn integrate_cos_weighted<G: FnMut(f64) -> f64>(
        &self,
        mut g: G,
        beta: f64,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<IntegralResult> {
        if !(beta > -1.0) {
            return Err(Error::Singularity { exponent: beta });
        }
        let near_pole = self.integrate_tol(
            |theta| g(theta) * theta.cos().powf(beta),
            &[0.0, FRAC_PI_4],
            0.5 * abs_tol,
            rel_tol,
        )?;
        let t_max = FRAC_PI_4.cos();
        let near_equator = if beta < 0.0 {
            // t = T u^{1/(beta+1)} turns t^beta dt into a constant multiple of du.
            let inv = 1.0 / (beta + 1.0);
            let scale = t_max.powf(beta + 1.0) * inv;
            let r = self.integrate_tol(
                |u| {
                    let t = t_max * u.powf(inv);
                    g(t.acos()) / (1.0 - t * t).sqrt()
                },
                &[0.0, 1.0],
                0.5 * abs_tol / scale,
                rel_tol,
            )?;
            IntegralResult {
                value: scale * r.value,
                error_estimate: scale * r.error_estimate,
                evaluations: r.evaluations,
            }
        } else {
            self.integrate_tol(
                |t| g(t.acos()) * t.powf(beta) / (1.0 - t * t).sqrt(),
                &[0.0, t_max],
                0.5 * abs_tol,
                rel_tol,
            )?
        };
        Ok(IntegralResult {
            value: near_pole.value + near_equator.value,
            error_estimate: near_pole.error_estimate + near_equator.error_estimate,
            evaluations: near_pole.evaluations + near_equator.evaluations,
        })
    }
}

/// `int_a^b g` with the adaptive Gauss-Legendre scheme.
pub fn integrate_1d<G: FnMut(f64) -> f64>(g: G, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    if !(a < b) {
        return Err(Error::InvalidParams(format!(
            "integrate_1d requires a < b (a = {a}, b = {b})"
        )));
    }
    Integrator::new(cfg)?.integrate(g, a, b)
}

/// `int_0^pi dphi int_0^{pi/2} f(phi, theta) cos^beta(theta) dtheta`.
///
/// `f` must be bounded on the rectangle; the weight exponent `cos_exponent`
/// must exceed -1. The inner integral runs at a tenth of `tol_2d`.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    f: F,
    cos_exponent: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let integrator = Integrator::new(cfg)?;
    integrate_2d_with(&integrator, f, cos_exponent)
}

pub(crate) fn integrate_2d_with<F: FnMut(f64, f64) -> f64>(
    integrator: &Integrator,
    f: F,
    cos_exponent: f64,
) -> Result<IntegralResult> {
    if !(cos_exponent > -1.0) {
        return Err(Error::Singularity { exponent: cos_exponent });
    }
    let cfg = integrator.config();
    let inner_abs = 0.1 * cfg.abs_tol;
    let inner_rel = 0.1 * cfg.tol_2d;
    let f = RefCell::new(f);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_err = RefCell::new(0.0f64);
    let inner_evals = RefCell::new(0usize);
    let outer = integrator.integrate_tol(
        |phi| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            let mut f = f.borrow_mut();
            match integrator.integrate_cos_weighted(|theta| (*f)(phi, theta), cos_exponent, inner_abs, inner_rel) {
                Ok(r) => {
                    let mut e = inner_err.borrow_mut();
                    *e = e.max(r.error_estimate);
                    *inner_evals.borrow_mut() += r.evaluations;
                    r.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        &[0.0, PI],
        cfg.abs_tol,
        cfg.tol_2d,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let inner_err = inner_err.into_inner();
    Ok(IntegralResult {
        value: outer.value,
        error_estimate: outer.error_estimate + PI * inner_err,
        evaluations: inner_evals.into_inner(),
    })
}

/// Location and value of a maximum over an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

fn is_tie(v: f64, best: f64) -> bool {
    v >= best - TIE_RELATIVE_TOLERANCE * best.abs().max(f64::MIN_POSITIVE)
}

/// Maximize `f` on `[a, b]`: uniform grid of `grid_nodes` points (endpoints
/// included), golden-section refinement around the best node, and a final
/// comparison in which near-ties go to the smallest abscissa.
pub fn maximize_on_interval<E, F: FnMut(f64) -> std::result::Result<f64, E>>(
    mut f: F,
    a: f64,
    b: f64,
    grid_nodes: usize,
    x_tol: f64,
) -> std::result::Result<Maximum, E> {
    let nodes = grid_nodes.max(3);
    let step = (b - a) / (nodes - 1) as f64;
    let mut grid = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let x = if i == nodes - 1 { b } else { a + step * i as f64 };
        grid.push((x, f(x)?));
    }
    let mut evaluations = nodes;
    let grid_best = grid.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    let best_idx = grid.iter().position(|g| is_tie(g.1, grid_best)).unwrap_or(0);

    let lo = grid[best_idx.saturating_sub(1)].0;
    let hi = grid[(best_idx + 1).min(nodes - 1)].0;
    let (gx, gv, used) = golden_maximize(&mut f, lo, hi, x_tol)?;
    evaluations += used;

    // Refined points this close to an end are represented by the end itself.
    let snap = (10.0 * x_tol).max(1e-6 * (b - a));
    let mut candidates = vec![grid[0], grid[best_idx], grid[nodes - 1]];
    if gx - a > snap && b - gx > snap {
        candidates.push((gx, gv));
    }
    candidates.sort_by(|p, q| p.0.total_cmp(&q.0));
    let best = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let (x, value) = *candidates
        .iter()
        .find(|c| is_tie(c.1, best))
        .expect("candidate list is non-empty");
    Ok(Maximum { x, value, evaluations })
}

fn golden_maximize<E, F: FnMut(f64) -> std::result::Result<f64, E>>(
    f: &mut F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
) -> std::result::Result<(f64, f64, usize), E> {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2;
    while hi - lo > x_tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
        evals += 1;
    }
    Ok(if f1 >= f2 { (x1, f1, evals) } else { (x2, f2, evals) })
}

/// Result of a supremum over `gamma in [0, +inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMaximum {
    /// Maximizing `gamma`; `f64::INFINITY` when the tangential endpoint wins.
    pub gamma_star: f64,
    /// Same point as the angle `atan(gamma_star)` in `[0, pi/2]`.
    pub psi_star: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Supremum of an objective written in the compactified angle `psi = atan(gamma)`.
///
/// `objective(pi/2)` must return the tangential limit.
pub fn maximize_over_angle<E, F: FnMut(f64) -> std::result::Result<f64, E>>(
    objective: F,
) -> std::result::Result<GammaMaximum, E> {
    let m = maximize_on_interval(objective, 0.0, FRAC_PI_2, GAMMA_GRID_NODES, GOLDEN_TOLERANCE)?;
    Ok(GammaMaximum {
        gamma_star: angle_to_gamma(m.x),
        psi_star: m.x,
        value: m.value,
        evaluations: m.evaluations,
    })
}

/// `sup_{gamma >= 0} h(gamma)` where `h_at_infinity` is the limit of `h` as `gamma -> inf`.
pub fn maximize_over_gamma<H: FnMut(f64) -> f64>(mut h: H, h_at_infinity: f64) -> GammaMaximum {
    let r: std::result::Result<_, std::convert::Infallible> =
        maximize_over_angle(|psi| Ok(if psi >= FRAC_PI_2 { h_at_infinity } else { h(psi.tan()) }));
    match r {
        Ok(m) => m,
        Err(never) => match never {},
    }
}

pub fn angle_to_gamma(psi: f64) -> f64 {
    if psi >= FRAC_PI_2 {
        f64::INFINITY
    } else {
        psi.tan()
    }
}

pub fn gamma_to_angle(gamma: f64) -> f64 {
    if gamma.is_infinite() {
        FRAC_PI_2
    } else {
        gamma.atan()
    }
}
