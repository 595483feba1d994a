//! Analytic gradient of `u_f` against central differences.

use poisson_sharp::poisson::{evaluate, gradient, gradient_fd, random_gaussian_mixture};
use poisson_sharp::{HalfSpacePoint, ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    let params = ProblemParams::new(2, 0.5, 2.0)?;
    let x = HalfSpacePoint::new(vec![0.2, -0.1], 0.8)?;
    for seed in 0..3 {
        let f = random_gaussian_mixture(&x, seed)?;
        println!("{}", f.label());
        println!("  u(x)      = {:.12e}", evaluate(&f, &x, &params, &cfg)?);
        let g = gradient(&f, &x, &params, &cfg)?;
        for step in [1e-2, 1e-3, 1e-4] {
            let d = gradient_fd(&f, &x, &params, step * x.height(), &cfg)?;
            let err = d.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("  step {step:e}: max |fd - grad| = {err:.3e}");
        }
        println!("  grad      = {g:.10?}");
    }
    Ok(())
}
