//! Sharp constants for general `p`, including `p = inf`.

use poisson_sharp::constants::sharp_constant;
use poisson_sharp::{ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    for alpha in [0.5, 1.0, 2.0] {
        println!("n = 2, alpha = {alpha}");
        for p in [1.0, 1.25, 1.5, 2.0, 3.0, 6.0, f64::INFINITY] {
            let r = sharp_constant(&ProblemParams::new(2, alpha, p)?, &cfg)?;
            println!(
                "  p = {p:>5}: C_p = {:.12e}  gamma* = {:<12} ({})",
                r.value,
                r.gamma_star.map_or("-".into(), |g| format!("{g:.6}")),
                r.method.as_str()
            );
        }
    }
    Ok(())
}
