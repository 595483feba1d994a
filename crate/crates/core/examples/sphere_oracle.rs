//! The reduced double integral against direct quadrature on the half-sphere and
//! against Monte Carlo.

use poisson_sharp::constants::sphere_integral_reduced;
use poisson_sharp::oracle::{oracle_config, sphere_integral_forms, sphere_integral_mc};
use poisson_sharp::{Direction, ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    let oracle = oracle_config();
    for (n, alpha, p, gamma) in [(2u32, 1.0, 2.0, 0.5), (2, 0.5, 3.0, 2.0), (3, 2.0, 1.5, 0.0)] {
        let params = ProblemParams::new(n, alpha, p)?;
        let z = Direction::from_gamma(n, gamma)?;
        let reduced = sphere_integral_reduced(&params, &z, &cfg)?;
        let forms = sphere_integral_forms(&params, &z, &oracle)?;
        println!("n={n} alpha={alpha} p={p} gamma={gamma}");
        println!("  reduced        {:.12e}", reduced.value);
        println!("  half sphere    {:.12e}", forms.half.value);
        println!("  whole sphere/2 {:.12e}", 0.5 * forms.whole.value);
    }
    let params = ProblemParams::new(4, 1.0, 2.0)?;
    let z = Direction::from_gamma(4, 1.0)?;
    let mut mc_cfg = cfg.clone();
    mc_cfg.mc_samples = 400_000;
    let mc = sphere_integral_mc(&params, &z, &mc_cfg)?;
    let reduced = sphere_integral_reduced(&params, &z, &cfg)?;
    println!(
        "n=4: reduced {:.8e}, Monte Carlo {:.8e} +- {:.1e}",
        reduced.value, mc.value, mc.error_estimate
    );
    Ok(())
}
