//! Near-extremal boundary data push `|(grad u_f(x), z)|` up to the sharp bound.

use poisson_sharp::poisson::{extremal_boundary_function, random_gaussian_mixture, sharpness_ratio};
use poisson_sharp::{BoundaryFunction, Direction, HalfSpacePoint, ProblemParams, QuadratureConfig};

fn main() -> poisson_sharp::Result<()> {
    let cfg = QuadratureConfig::default();
    let x = HalfSpacePoint::above_origin(2, 1.0)?;
    let z = Direction::normal(2);

    let p1 = ProblemParams::new(2, 1.0, 1.0)?;
    for eps in [1e-1, 1e-2, 1e-3] {
        let bump = BoundaryFunction::bump(vec![0.0, 0.0], eps)?;
        println!(
            "p = 1, bump radius {eps:e}: ratio {:.8}",
            sharpness_ratio(&p1, &x, &z, &bump, &cfg)?.ratio
        );
    }
    for p in [1.5, 2.0, 4.0] {
        let params = ProblemParams::new(2, 1.0, p)?;
        for radius in [10.0, 100.0] {
            let f = extremal_boundary_function(&params, &x, &z, radius)?;
            let r = sharpness_ratio(&params, &x, &z, &f, &cfg)?;
            println!("p = {p}, truncation {radius:>5}: ratio {:.8}", r.ratio);
        }
    }
    let p2 = ProblemParams::new(2, 1.0, 2.0)?;
    let worst = (0..20)
        .map(|seed| Ok(sharpness_ratio(&p2, &x, &z, &random_gaussian_mixture(&x, seed)?, &cfg)?.ratio))
        .collect::<poisson_sharp::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("largest ratio over 20 random mixtures: {worst:.6}");
    Ok(())
}
