//! Heat flow from a Gaussian, compared with the closed-form solution.

use psidyn::propagator::{solve, CauchyProblem, DuhamelSpec};
use psidyn::quadrature::QuadratureSpec;
use psidyn::spectral::{forward_transform, inverse_transform, make_grid, sample, Side};
use psidyn::symbols::SecondOrderSymbol;
use psidyn::Complex64;

fn main() -> psidyn::Result<()> {
    let grid = make_grid(1, 256, 40.0)?;
    let u0 = sample(&grid, Side::Physical, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0))?;
    let problem = CauchyProblem::new(SecondOrderSymbol::heat(1)?, forward_transform(&u0)?, 1.0)?;
    let times = [0.25, 0.5, 1.0];
    let traj = solve(&problem, &times, &QuadratureSpec::default(), &DuhamelSpec::default())?;

    println!("{:>6} {:>14} {:>14}", "t", "max |u|", "rel L2 error");
    for (j, &t) in times.iter().enumerate() {
        let u = inverse_transform(&traj.materialized(j)?)?;
        let s = 1.0 + 2.0 * t;
        let exact = sample(&grid, Side::Physical, |x| Complex64::new((-x[0] * x[0] / (2.0 * s)).exp() / s.sqrt(), 0.0))?;
        let diff = u.combine(Complex64::new(1.0, 0.0), &exact, Complex64::new(-1.0, 0.0))?;
        println!("{t:>6} {:>14.6e} {:>14.3e}", u.max_abs(), diff.lq_norm(2.0) / exact.lq_norm(2.0));
    }
    Ok(())
}
