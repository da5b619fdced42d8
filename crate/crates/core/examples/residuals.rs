//! Verification of a computed solution: the integrated equation residual
//! converges at second order under mesh halving, the weak form against bump
//! test functions is bounded by it, and two meshes agree on a non-elliptic
//! problem.

use psidyn::propagator::{solve, CauchyProblem, DuhamelSpec, Forcing, TimeRule};
use psidyn::quadrature::QuadratureSpec;
use psidyn::spectral::{make_grid, sample, Side};
use psidyn::symbols::SecondOrderSymbol;
use psidyn::verify::{gronwall_gap, representation_residual, weak_form_residual, RefinementTable, TestFunction};
use psidyn::Complex64;

fn main() -> psidyn::Result<()> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let grid = make_grid(1, 64, 20.0)?;
    let quad = QuadratureSpec::default();
    let u0 = sample(&grid, Side::Frequency, |xi| c((-xi[0] * xi[0] / 2.0).exp()))?;
    let forcing = || Forcing::pointwise(move |s, xi| c(s.cos() * (-xi[0] * xi[0] / 2.0).exp()));
    let heat = CauchyProblem::new(SecondOrderSymbol::heat(1)?, u0.clone(), 1.0)?.with_forcing(forcing())?;

    let run = |p: &CauchyProblem, steps: usize| {
        let times: Vec<f64> = (1..=steps).map(|j| j as f64 / steps as f64).collect();
        solve(p, &times, &quad, &DuhamelSpec::uniform(steps, TimeRule::Trapezoid))
    };
    let steps = [16usize, 32, 64, 128];
    let mut errors = Vec::new();
    for &n in &steps {
        errors.push(representation_residual(&run(&heat, n)?, &heat, 2.0)?.max_residual);
    }
    let table = RefinementTable::new(steps.iter().map(|&n| 1.0 / n as f64).collect(), errors)?;
    println!("{}", serde_json::to_string_pretty(&table.to_json())?);

    let traj = run(&heat, 32)?;
    let rep = representation_residual(&traj, &heat, 2.0)?.max_residual;
    for phi in TestFunction::shrinking(&grid, 2.0, 3)? {
        let weak = weak_form_residual(&traj, &heat, &phi)?.max_residual;
        println!("bump r0 = {:.2}: weak residual {weak:.3e} <= {:.3e}", phi.radius(), phi.l1_mass() * rep);
    }

    let sym = SecondOrderSymbol::isotropic(1, Complex64::new(-1.0, 1.0))?.with_potential(Complex64::new(0.0, 1.0));
    let p = CauchyProblem::new(sym, u0, 1.0)?.with_forcing(forcing())?;
    let times = [0.5, 1.0];
    let coarse = solve(&p, &times, &quad, &DuhamelSpec::uniform(32, TimeRule::Trapezoid))?;
    let fine = solve(&p, &times, &quad, &DuhamelSpec::uniform(64, TimeRule::Trapezoid))?;
    let gap = gronwall_gap(&coarse, &fine, p.symbol(), &quad, 4.0)?;
    println!("gap between 32 and 64 steps: {:?}, growth factor {:?}", gap.residuals, gap.bound);
    Ok(())
}
