//! Kernel normalization `k_{n,alpha}` and its total mass.

use poisson_sharp::poisson::kernel_mass;
use poisson_sharp::specfun::{is_formal_normalization, normalization, sphere_area};
use poisson_sharp::{ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    println!("{:>3} {:>6} {:>22} {:>8}", "n", "alpha", "k_{n,alpha}", "formal");
    for n in [2u32, 3, 5] {
        for alpha in [-1.5, -0.5, 0.5, 1.0, 2.0, 4.0] {
            let k = normalization(n, alpha)?;
            println!("{n:>3} {alpha:>6} {k:>22.15e} {:>8}", is_formal_normalization(alpha));
        }
    }
    // For alpha > 0 the kernel integrates to one over the boundary.
    let p = ProblemParams::new(2, 1.0, 1.0)?;
    for radius in [1.0, 10.0, 1e3] {
        println!(
            "mass within radius {radius:>6}: {:.12}",
            kernel_mass(&p, 1.0, radius, &cfg)?
        );
    }
    println!("omega_3 = {:.15} (4 pi)", sphere_area(3)?);
    Ok(())
}
