//! `C_1` as a one-dimensional supremum; the maximizer leaves `t = 1` for large alpha.

use poisson_sharp::constants::{c1, p1_profile};
use poisson_sharp::ProblemParams;

fn main() -> poisson_sharp::Result<()> {
    let n = 2;
    for alpha in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let r = c1(&ProblemParams::new(n, alpha, 1.0)?)?;
        let k = ProblemParams::new(n, alpha, 1.0)?.normalization()?;
        println!(
            "alpha = {alpha:>5}: C1 = {:.15e}, t* = {:.12}, k n = {:.15e}",
            r.value,
            r.t_star.unwrap_or(f64::NAN),
            k.abs() * n as f64
        );
    }
    println!("profile at alpha = 10:");
    for i in 0..=10 {
        let t = 0.9 + 0.01 * i as f64;
        println!("  t = {t:.2}  {:.10}", p1_profile(n, 10.0, t));
    }
    Ok(())
}
