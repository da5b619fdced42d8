//! Well-posedness certificates for a heat problem with forcing: the local
//! integrability conditions, the weighted bounds and the second-order
//! coefficient condition.

use psidyn::propagator::{CauchyProblem, Forcing};
use psidyn::quadrature::{PanelLayout, QuadratureSpec};
use psidyn::spectral::{make_grid, sample, Side};
use psidyn::symbols::{Coefficient, SecondOrderSymbol};
use psidyn::wellposedness::{
    check_condition_a, check_condition_b, check_second_order, check_weight_lower_bounds, check_weighted, WeightSpec,
};
use psidyn::Complex64;

fn main() -> psidyn::Result<()> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let grid = make_grid(1, 64, 20.0)?;
    let quad = QuadratureSpec::default();
    let u0 = sample(&grid, Side::Frequency, move |xi| c((-xi[0] * xi[0] / 2.0).exp()))?;
    let problem = CauchyProblem::new(SecondOrderSymbol::heat(1)?, u0, 1.0)?
        .with_forcing(Forcing::pointwise(move |s, xi| c(s.cos() * (-xi[0] * xi[0] / 2.0).exp())))?;

    for report in [
        check_condition_a(&problem, 1.0, 2.0, &quad)?,
        check_condition_b(&problem, 1.0, 2.0, &quad)?,
    ] {
        println!("{:?}: bound {:.6}, finite {}", report.condition, report.bound, report.finite);
    }

    let weights = WeightSpec::bessel(2.0);
    let w = check_weighted(&problem, &weights, 2.0, 2.0, 1.0, 4.0, &quad)?;
    println!("weighted L_(2,inf): bound {:.4}, components {}", w.bound, serde_json::Value::Object(w.components.clone()));
    let lb = check_weight_lower_bounds(&weights, &grid, 1.0, 4.0, &quad)?;
    println!("weight lower bound {:.4}, finite {}", lb.bound, lb.finite);

    // a(t) = t^{-1/4} is in L_2(0, 1) but unbounded near 0.
    let a = Coefficient::closure("t^-1/4", move |t: f64| c(t.powf(-0.25)));
    let graded = QuadratureSpec { layout: PanelLayout::GradedLeft { exponent: 6.0 }, panels: 16, ..quad };
    let r = check_second_order(&SecondOrderSymbol::isotropic(1, a)?, 2.0, 1.0, &graded)?;
    println!("||a||_L2(0,1) = {:.6} (exact {:.6}), finite {}", r.bound, 2f64.sqrt(), r.finite);
    Ok(())
}
