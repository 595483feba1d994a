//! At `alpha = 1` the sharp constants reduce to the classical harmonic ones.

use poisson_sharp::constants::{c1, c2};
use poisson_sharp::verify::{classical_k1, classical_k2};
use poisson_sharp::{ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    println!("{:>3} {:>22} {:>22} {:>22} {:>22}", "n", "C1", "K1", "C2", "K2");
    for n in 2..=8 {
        let v1 = c1(&ProblemParams::new(n, 1.0, 1.0)?)?.value;
        let v2 = c2(&ProblemParams::new(n, 1.0, 2.0)?, &cfg)?.value;
        println!(
            "{n:>3} {v1:>22.15e} {:>22.15e} {v2:>22.15e} {:>22.15e}",
            classical_k1(n)?,
            classical_k2(n)?
        );
    }
    Ok(())
}
