//! Command-line front end: `kappa`, `constant`, `sweep`, `verify`, `sharpness`.
//!
//! Exit codes: 0 success, 2 invalid parameters, 3 numerical failure,
//! 4 verification failure, 1 I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::constants::{
    coefficient_directional, directional_constant, scale_to_height, sharp_constant, ConstantResult, Direction,
    ProblemParams,
};
use crate::error::Error;
use crate::poisson::{
    extremal_boundary_function, random_gaussian_mixture, sharpness_ratio, BoundaryFunction, HalfSpacePoint,
    SharpnessReport,
};
use crate::quadrature::QuadratureConfig;
use crate::serde_ext::format_f64;
use crate::specfun::{is_formal_normalization, normalization};
use crate::verify::{run_suite, CheckKind, Suite, SuiteOptions, SuiteReport};

/// Environment variable naming a default `key = value` configuration file.
pub const CONFIG_ENV: &str = "POISSON_SHARP_CONFIG";

/// Fixed header of `sweep` CSV output.
pub const CSV_HEADER: &str = "n,alpha,p,value,gamma_star,t_star,method,error_estimate";

pub const EXIT_IO: i32 = 1;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "poisson-sharp",
    version,
    about = "Sharp gradient constants for generalized Poisson integrals"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// `key = value` file with quadrature settings (default: $POISSON_SHARP_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Tolerance of the reduced double integrals.
    #[arg(long, global = true)]
    tol_2d: Option<f64>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long, global = true)]
    base_order: Option<usize>,
    /// Maximum bisection depth.
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    mc_samples: Option<usize>,
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Leave wall time out of JSON reports so that reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Lebesgue exponent; `inf` for p = infinity.
    #[arg(long, value_parser = parse_ext_f64)]
    p: f64,
}

#[derive(Debug, Args)]
struct DirectionArgs {
    /// Comma-separated components of z (n + 1 values).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "gamma")]
    direction: Option<String>,
    /// Direction by gamma = |z'| / z_(n+1); `inf` is tangential.
    #[arg(long, value_parser = parse_ext_f64)]
    gamma: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kernel normalization k_{n,alpha}.
    Kappa {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Sharp constant C_p, or C_p(z) with a direction.
    Constant {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        direction: DirectionArgs,
        /// Also report the coefficient C_p / x_(n+1)^((n+p)/p) at this height.
        #[arg(long)]
        height: Option<f64>,
    },
    /// Grid of sharp constants, one CSV row per grid point.
    Sweep {
        /// `a:b` (inclusive) or a comma list.
        #[arg(long)]
        n_range: String,
        /// `start:stop:count` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        alpha_range: String,
        /// `start:stop:count` or a comma list; `inf` allowed in lists.
        #[arg(long)]
        p_range: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an oracle suite and print pass/fail lines.
    Verify {
        #[arg(long)]
        suite: Suite,
        /// Random boundary functions per grid point (inequality suite).
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Ratio of |(grad u_f(x), z)| to its sharp bound for an extremal f.
    Sharpness {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        direction: DirectionArgs,
        /// Truncation radius of the extremal function, in units of x_(n+1).
        #[arg(long, default_value_t = 100.0)]
        truncation: f64,
        /// Bump radius for p = 1, in units of x_(n+1).
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        /// Additionally test this many seeded random Gaussian mixtures.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
}

fn parse_ext_f64(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "infinity" | "Infinity" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("'{s}': {e}")),
    }
}

/// Reads a `key = value` configuration file over `base`; `#` starts a comment.
pub fn parse_config(text: &str, base: QuadratureConfig) -> Result<QuadratureConfig, Error> {
    let mut cfg = base;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidParams(format!(
                "config line {}: expected key = value",
                lineno + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        let bad = |e: &dyn std::fmt::Display| Error::InvalidParams(format!("config line {}: {key}: {e}", lineno + 1));
        match key {
            "abs_tol" => cfg.abs_tol = value.parse().map_err(|e| bad(&e))?,
            "rel_tol" => cfg.rel_tol = value.parse().map_err(|e| bad(&e))?,
            "tol_2d" => cfg.tol_2d = value.parse().map_err(|e| bad(&e))?,
            "base_order" => cfg.base_order = value.parse().map_err(|e| bad(&e))?,
            "max_depth" => cfg.max_depth = value.parse().map_err(|e| bad(&e))?,
            "mc_samples" => cfg.mc_samples = value.parse().map_err(|e| bad(&e))?,
            "rng_seed" | "seed" => cfg.rng_seed = value.parse().map_err(|e| bad(&e))?,
            _ => return Err(bad(&"unknown key")),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_config(g: &GlobalOpts) -> Result<QuadratureConfig, Error> {
    let path = g
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = QuadratureConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::InvalidParams(format!("cannot read config {}: {e}", path.display())))?;
        cfg = parse_config(&text, cfg)?;
    }
    if let Some(v) = g.abs_tol {
        cfg.abs_tol = v;
    }
    if let Some(v) = g.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = g.tol_2d {
        cfg.tol_2d = v;
    }
    if let Some(v) = g.base_order {
        cfg.base_order = v;
    }
    if let Some(v) = g.max_depth {
        cfg.max_depth = v;
    }
    if let Some(v) = g.mc_samples {
        cfg.mc_samples = v;
    }
    if let Some(v) = g.seed {
        cfg.rng_seed = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// JSON formatter writing every float with 17 significant digits.
struct Precise(PrettyFormatter<'static>);

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report serialization");
    String::from_utf8(buf).expect("utf-8 JSON")
}

/// Machine-readable record of one invocation.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ProblemParams>,
    pub config: QuadratureConfig,
    pub results: Vec<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

enum Failure {
    Numeric(Error),
    Io(io::Error),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

struct Ctx<'a> {
    argv: Vec<String>,
    cfg: QuadratureConfig,
    format: Format,
    timing: bool,
    start: Instant,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn report(&self, params: Option<ProblemParams>, results: Vec<serde_json::Value>, seed: Option<u64>) -> RunReport {
        RunReport {
            command: self.argv.clone(),
            version: env!("CARGO_PKG_VERSION"),
            params,
            config: self.cfg.clone(),
            results,
            seed,
            wall_time_seconds: self.timing.then(|| self.start.elapsed().as_secs_f64()),
        }
    }
}

fn value_of<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable result")
}

fn parse_direction(n: u32, d: &DirectionArgs) -> Result<Option<Direction>, Error> {
    if let Some(text) = &d.direction {
        let comps = text
            .split(',')
            .map(|s| parse_ext_f64(s).map_err(Error::InvalidParams))
            .collect::<Result<Vec<f64>, Error>>()?;
        if comps.len() != n as usize + 1 {
            return Err(Error::InvalidParams(format!(
                "direction needs n + 1 = {} components, got {}",
                n + 1,
                comps.len()
            )));
        }
        return Direction::normalized(comps).map(Some);
    }
    d.gamma.map(|g| Direction::from_gamma(n, g)).transpose()
}

fn optional(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

fn csv_row(p: &ProblemParams, r: &ConstantResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        p.n(),
        format_f64(p.alpha()),
        format_f64(p.p()),
        format_f64(r.value),
        optional(r.gamma_star),
        optional(r.t_star),
        r.method.as_str(),
        format_f64(r.error_estimate)
    )
}

fn text_constant(p: &ProblemParams, r: &ConstantResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "n = {}, alpha = {}, p = {}",
        p.n(),
        format_f64(p.alpha()),
        format_f64(p.p())
    );
    let _ = writeln!(s, "value          {}", format_f64(r.value));
    let _ = writeln!(s, "method         {}", r.method.as_str());
    let _ = writeln!(s, "error_estimate {}", format_f64(r.error_estimate));
    if let Some(g) = r.gamma_star {
        let _ = writeln!(s, "gamma_star     {}", format_f64(g));
    }
    if let Some(t) = r.t_star {
        let _ = writeln!(s, "t_star         {}", format_f64(t));
    }
    for d in &r.diagnostics {
        let _ = writeln!(s, "note           {d}");
    }
    s
}

fn cmd_kappa(ctx: &mut Ctx, n: u32, alpha: f64) -> Result<(), Failure> {
    let k = normalization(n, alpha)?;
    let formal = is_formal_normalization(alpha);
    match ctx.format {
        Format::Text => {
            writeln!(ctx.out, "{}", format_f64(k))?;
            if formal {
                writeln!(ctx.out, "note: formal normalization, alpha <= 0")?;
            }
        }
        Format::Csv => {
            writeln!(ctx.out, "n,alpha,kappa,formal")?;
            writeln!(ctx.out, "{n},{},{},{formal}", format_f64(alpha), format_f64(k))?;
        }
        Format::Json => {
            let result = serde_json::json!({ "n": n, "alpha": alpha, "kappa": k, "formal": formal });
            let report = ctx.report(None, vec![result], None);
            writeln!(ctx.out, "{}", to_json(&report))?;
        }
    }
    Ok(())
}

fn cmd_constant(
    ctx: &mut Ctx,
    params: &ParamArgs,
    direction: &DirectionArgs,
    height: Option<f64>,
) -> Result<(), Failure> {
    let p = ProblemParams::new(params.n, params.alpha, params.p)?;
    p.normalization()?;
    let z = parse_direction(p.n(), direction)?;
    let r = match &z {
        Some(z) => directional_constant(&p, z, &ctx.cfg)?,
        None => sharp_constant(&p, &ctx.cfg)?,
    };
    let coefficient = height
        .map(|h| -> Result<f64, Error> {
            let x = HalfSpacePoint::above_origin(p.n(), h)?;
            match &z {
                Some(z) => coefficient_directional(&p, &x, z, &ctx.cfg),
                None => Ok(scale_to_height(r.value, &p, x.height())),
            }
        })
        .transpose()?;
    match ctx.format {
        Format::Text => {
            write!(ctx.out, "{}", text_constant(&p, &r))?;
            if let (Some(h), Some(c)) = (height, coefficient) {
                writeln!(
                    ctx.out,
                    "coefficient    {} (x_(n+1) = {})",
                    format_f64(c),
                    format_f64(h)
                )?;
            }
        }
        Format::Csv => {
            writeln!(ctx.out, "{CSV_HEADER}")?;
            writeln!(ctx.out, "{}", csv_row(&p, &r))?;
        }
        Format::Json => {
            let mut v = value_of(&r);
            if let (Some(h), Some(c)) = (height, coefficient) {
                v["height"] = serde_json::json!(h);
                v["coefficient"] = serde_json::json!(c);
            }
            if let Some(z) = &z {
                v["direction"] = value_of(&z.components());
            }
            let report = ctx.report(Some(p), vec![v], None);
            writeln!(ctx.out, "{}", to_json(&report))?;
        }
    }
    Ok(())
}

fn parse_n_range(s: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::InvalidParams(format!("invalid n range '{s}'"));
    if let Some((a, b)) = s.split_once(':') {
        let (a, b): (u32, u32) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// `start:stop:count` (inclusive linspace) or a comma list.
pub fn parse_real_range(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::InvalidParams(format!("invalid range '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => {
            let a = parse_ext_f64(a).map_err(|_| bad())?;
            let b = parse_ext_f64(b).map_err(|_| bad())?;
            let count: usize = c.trim().parse().map_err(|_| bad())?;
            if count == 0 || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            if count == 1 {
                return Ok(vec![a]);
            }
            Ok((0..count)
                .map(|i| {
                    if i == count - 1 {
                        b
                    } else {
                        a + (b - a) * i as f64 / (count - 1) as f64
                    }
                })
                .collect())
        }
        [_] => s.split(',').map(|t| parse_ext_f64(t).map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

fn cmd_sweep(
    ctx: &mut Ctx,
    n_range: &str,
    alpha_range: &str,
    p_range: &str,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let ns = parse_n_range(n_range)?;
    let alphas = parse_real_range(alpha_range)?;
    let ps = parse_real_range(p_range)?;
    let mut grid = Vec::new();
    for &n in &ns {
        for &alpha in &alphas {
            for &p in &ps {
                match ProblemParams::new(n, alpha, p) {
                    Ok(pp) => grid.push(pp),
                    Err(e) => writeln!(ctx.err, "skipping (n={n}, alpha={alpha}, p={p}): {e}")?,
                }
            }
        }
    }
    let cfg = ctx.cfg.clone();
    let results: Vec<Result<ConstantResult, Error>> = grid.par_iter().map(|p| sharp_constant(p, &cfg)).collect();
    let mut rows = Vec::new();
    for (p, r) in grid.iter().zip(results) {
        match r {
            Ok(r) => rows.push((*p, r)),
            Err(e @ (Error::InvalidParams(_) | Error::DegenerateNormalization(_) | Error::Singularity { .. })) => {
                writeln!(ctx.err, "skipping (n={}, alpha={}, p={}): {e}", p.n(), p.alpha(), p.p())?
            }
            Err(e) => return Err(e.into()),
        }
    }
    let as_json = ctx.format == Format::Json || out.is_some_and(|o| o.extension().is_some_and(|e| e == "json"));
    let text = if as_json {
        let results = rows
            .iter()
            .map(|(p, r)| {
                let mut v = value_of(r);
                v["params"] = value_of(p);
                v
            })
            .collect();
        to_json(&ctx.report(None, results, None)) + "\n"
    } else {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for (p, r) in &rows {
            s.push_str(&csv_row(p, r));
            s.push('\n');
        }
        s
    };
    match out {
        Some(path) => {
            fs::write(path, text)?;
            writeln!(ctx.out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => write!(ctx.out, "{text}")?,
    }
    Ok(())
}

fn print_suite(out: &mut dyn Write, r: &SuiteReport) -> io::Result<()> {
    for c in &r.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        let (value, reference) = (format_f64(c.value), format_f64(c.reference));
        match c.kind {
            CheckKind::Relative => writeln!(
                out,
                "{verdict} {}: value {value} reference {reference} delta {:.3e} tolerance {:.1e}",
                c.name, c.delta, c.tolerance
            )?,
            CheckKind::AtMost => writeln!(out, "{verdict} {}: {value} <= {reference}", c.name)?,
            CheckKind::AtLeast => writeln!(out, "{verdict} {}: {value} >= {reference}", c.name)?,
        }
    }
    for n in &r.notes {
        writeln!(out, "NOTE {n}")?;
    }
    writeln!(
        out,
        "suite {}: {} ({} checks, {} failed)",
        r.suite,
        if r.passed() { "passed" } else { "FAILED" },
        r.checks.len(),
        r.failures()
    )
}

fn cmd_verify(ctx: &mut Ctx, suite: Suite, samples: usize) -> Result<(), Failure> {
    let opts = SuiteOptions {
        cfg: ctx.cfg.clone(),
        samples,
    };
    let r = run_suite(suite, &opts)?;
    match ctx.format {
        Format::Json => {
            let seed = matches!(suite, Suite::Reduction | Suite::Inequality).then_some(ctx.cfg.rng_seed);
            let report = ctx.report(None, vec![value_of(&r)], seed);
            writeln!(ctx.out, "{}", to_json(&report))?;
        }
        _ => print_suite(ctx.out, &r)?,
    }
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sharpness(
    ctx: &mut Ctx,
    params: &ParamArgs,
    direction: &DirectionArgs,
    truncation: f64,
    epsilon: f64,
    height: f64,
    random: usize,
) -> Result<(), Failure> {
    let p = ProblemParams::new(params.n, params.alpha, params.p)?;
    p.normalization()?;
    let z = parse_direction(p.n(), direction)?.unwrap_or_else(|| Direction::normal(p.n()));
    let x = HalfSpacePoint::above_origin(p.n(), height)?;
    let f = if p.p() == 1.0 {
        BoundaryFunction::bump(vec![0.0; p.n() as usize], epsilon * height)?
    } else {
        extremal_boundary_function(&p, &x, &z, truncation * height)?
    };
    let mut reports: Vec<SharpnessReport> = vec![sharpness_ratio(&p, &x, &z, &f, &ctx.cfg)?];
    for seed in 0..random as u64 {
        let g = random_gaussian_mixture(&x, ctx.cfg.rng_seed.wrapping_add(seed))?;
        reports.push(sharpness_ratio(&p, &x, &z, &g, &ctx.cfg)?);
    }
    match ctx.format {
        Format::Json => {
            let seed = (random > 0).then_some(ctx.cfg.rng_seed);
            let report = ctx.report(Some(p), reports.iter().map(value_of).collect(), seed);
            writeln!(ctx.out, "{}", to_json(&report))?;
        }
        Format::Csv => {
            writeln!(ctx.out, "function,derivative_value,bound,ratio")?;
            for r in &reports {
                writeln!(
                    ctx.out,
                    "{},{},{},{}",
                    r.function,
                    format_f64(r.derivative_value),
                    format_f64(r.bound),
                    format_f64(r.ratio)
                )?;
            }
        }
        Format::Text => {
            for r in &reports {
                writeln!(ctx.out, "{}", r.function)?;
                writeln!(ctx.out, "  derivative {}", format_f64(r.derivative_value))?;
                writeln!(ctx.out, "  bound      {}", format_f64(r.bound))?;
                writeln!(ctx.out, "  ratio      {}", format_f64(r.ratio))?;
            }
        }
    }
    Ok(())
}

/// Runs the command line `argv` (including the program name), writing to the
/// given streams, and returns the process exit code.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let cfg = match resolve_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let mut ctx = Ctx {
        argv: argv.iter().skip(1).cloned().collect(),
        cfg,
        format: cli.global.format,
        timing: !cli.global.no_timing,
        start: Instant::now(),
        out,
        err,
    };
    let result = match &cli.command {
        Command::Kappa { n, alpha } => cmd_kappa(&mut ctx, *n, *alpha),
        Command::Constant {
            params,
            direction,
            height,
        } => cmd_constant(&mut ctx, params, direction, *height),
        Command::Sweep {
            n_range,
            alpha_range,
            p_range,
            out,
        } => cmd_sweep(&mut ctx, n_range, alpha_range, p_range, out.as_deref()),
        Command::Verify { suite, samples } => cmd_verify(&mut ctx, *suite, *samples),
        Command::Sharpness {
            params,
            direction,
            truncation,
            epsilon,
            height,
            random,
        } => cmd_sharpness(&mut ctx, params, direction, *truncation, *epsilon, *height, *random),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Numeric(e)) => {
            let _ = writeln!(ctx.err, "error: {e}");
            e.exit_code()
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(Failure::Io(e)) => {
            let _ = writeln!(ctx.err, "error: {e}");
            EXIT_IO
        }
        Err(Failure::Verify) => EXIT_VERIFY,
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run_with(argv, &mut out, &mut err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("poisson-sharp").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn kappa_text() {
        let (code, out, _) = run_capture(&["kappa", "--n", "2", "--alpha", "1"]);
        assert_eq!(code, 0);
        let k: f64 = out.trim().parse().unwrap();
        assert!((k - 0.5 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn constant_p1_is_one_over_pi() {
        let (code, out, _) = run_capture(&["constant", "--n", "2", "--alpha", "1", "--p", "1", "--format", "csv"]);
        assert_eq!(code, 0);
        let row = out.lines().nth(1).unwrap();
        let value: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((value - 1.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn degenerate_normalization_exit_code() {
        let (code, _, err) = run_capture(&["constant", "--n", "2", "--alpha", "-2", "--p", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("error"));
        let (code, _, err) = run_capture(&["constant", "--n", "2", "--alpha", "-1.5", "--p", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("alpha > -n/p"), "{err}");
    }

    #[test]
    fn config_parsing() {
        let cfg = parse_config("# c\nabs_tol = 1e-9\nseed=5 # note\n\n", QuadratureConfig::default()).unwrap();
        assert_eq!(cfg.abs_tol, 1e-9);
        assert_eq!(cfg.rng_seed, 5);
        assert!(parse_config("bogus = 1", QuadratureConfig::default()).is_err());
        assert!(parse_config("abs_tol = -1", QuadratureConfig::default()).is_err());
        assert!(parse_config("abs_tol", QuadratureConfig::default()).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_n_range("2:4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_n_range("2,5").unwrap(), vec![2, 5]);
        assert_eq!(parse_real_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_real_range("1,inf").unwrap(), vec![1.0, f64::INFINITY]);
        assert!(parse_real_range("1:2").is_err());
    }

    #[test]
    fn json_floats_have_seventeen_digits() {
        let s = to_json(&serde_json::json!({ "x": 0.1 }));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }
}
