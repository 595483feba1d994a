//! For `p = 2` the extremal direction is normal or tangential, switching at
//! `alpha = n(n+1)/2`.

use poisson_sharp::constants::{c2, i1, i2};
use poisson_sharp::{ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    for n in [2u32, 3] {
        println!("n = {n}, threshold {}", n * (n + 1) / 2);
        for alpha in [1.0, 2.9, 3.0, 3.1, 4.0, 6.0, 7.0] {
            let p = ProblemParams::new(n, alpha, 2.0)?;
            let r = c2(&p, &cfg)?;
            println!(
                "  alpha = {alpha:>4}: C2 = {:.12e}, I1 = {:.10e}, I2 = {:.10e}, gamma* = {}",
                r.value,
                i1(&p, &cfg)?.value,
                i2(&p, &cfg)?.value,
                r.gamma_star.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
