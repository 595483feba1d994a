//! `C_p(z)` as the direction tilts from the normal to the boundary plane.

use poisson_sharp::constants::{directional_constant, sharp_constant};
use poisson_sharp::{Direction, ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    let params = ProblemParams::new(2, 2.0, 3.0)?;
    let best = sharp_constant(&params, &cfg)?;
    println!("C_p = {:.12e} at gamma* = {:?}", best.value, best.gamma_star);
    for gamma in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, f64::INFINITY] {
        let z = Direction::from_gamma(2, gamma)?;
        let c = directional_constant(&params, &z, &cfg)?;
        println!("  gamma = {gamma:>5}: C_p(z) = {:.12e}", c.value);
    }
    Ok(())
}
