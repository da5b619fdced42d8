use rayon::prelude::*;
use serde_json::json;

use super::{ball, ConditionId, ConditionReport};
use crate::error::Result;
use crate::propagator::{eval_symbol, exponent, CauchyProblem};
use crate::quadrature::QuadratureSpec;

/// `\int_{B_R} exp(\int_0^t Re psi) |u0_hat| dxi
///  + \int_{B_R} \int_0^t exp(\int_s^t Re psi) |f_hat(s)| ds dxi`.
pub fn check_condition_a(problem: &CauchyProblem, t: f64, radius: f64, quad: &QuadratureSpec) -> Result<ConditionReport> {
    quad.validate()?;
    let grid = *problem.grid();
    let modes = ball(&grid, radius)?;
    let cell = grid.frequency_cell_volume();
    let sym = problem.symbol();
    let policy = problem.zero_mode();
    let u0 = problem.u0_hat().values();
    let forced = !problem.forcing().is_none();

    let mut report = ConditionReport::new(ConditionId::CondA, json!({ "t": t, "R": radius, "modes": modes.len() }), quad);
    report.symbol = Some(sym.descriptor().to_json(quad));

    // The initial-data term does not depend on the time resolution.
    let initial: Vec<f64> = modes
        .par_iter()
        .map(|(k, xi)| Ok(exponent(sym, 0.0, t, xi, quad, policy)?.0.value.re.exp() * u0[*k].norm()))
        .collect::<Result<_>>()?;
    let initial: f64 = initial.iter().sum::<f64>() * cell;

    report.refine(quad.panels, |panels| {
        let forcing = if forced {
            let per_mode: Vec<f64> = modes
                .par_iter()
                .map(|(k, xi)| {
                    let mut acc = 0.0;
                    for (s, w) in quad.nodes(0.0, t, panels) {
                        let decay = exponent(sym, s, t, xi, quad, policy)?.0.value.re.exp();
                        acc += w * decay * problem.forcing().eval(s, *k, xi)?.norm();
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            per_mode.iter().sum::<f64>() * cell
        } else {
            0.0
        };
        Ok((initial + forcing, vec![("initial", initial), ("forcing", forcing)]))
    })
}

/// `\int_{B_R} \int_0^t |psi(rho)| exp(\int_0^rho Re psi) |u0_hat| drho dxi
///  + \int_{B_R} \int_0^t |psi(rho)| \int_0^rho exp(\int_s^rho Re psi) |f_hat(s)| ds drho dxi`,
/// with the inner `s` integral on the same number of panels as the outer one.
pub fn check_condition_b(problem: &CauchyProblem, t: f64, radius: f64, quad: &QuadratureSpec) -> Result<ConditionReport> {
    quad.validate()?;
    let grid = *problem.grid();
    let modes = ball(&grid, radius)?;
    let cell = grid.frequency_cell_volume();
    let sym = problem.symbol();
    let policy = problem.zero_mode();
    let u0 = problem.u0_hat().values();
    let forced = !problem.forcing().is_none();

    let mut report = ConditionReport::new(ConditionId::CondB, json!({ "t": t, "R": radius, "modes": modes.len() }), quad);
    report.symbol = Some(sym.descriptor().to_json(quad));

    report.refine(quad.panels, |panels| {
        let per_mode: Vec<(f64, f64)> = modes
            .par_iter()
            .map(|(k, xi)| {
                let mut initial = 0.0;
                let mut forcing = 0.0;
                for (rho, w) in quad.nodes(0.0, t, panels) {
                    let weight = eval_symbol(sym, rho, xi, policy)?.norm();
                    if weight == 0.0 {
                        continue;
                    }
                    let growth = exponent(sym, 0.0, rho, xi, quad, policy)?.0.value.re.exp();
                    initial += w * weight * growth * u0[*k].norm();
                    if forced {
                        let mut inner = 0.0;
                        for (s, ws) in quad.nodes(0.0, rho, panels) {
                            let decay = exponent(sym, s, rho, xi, quad, policy)?.0.value.re.exp();
                            inner += ws * decay * problem.forcing().eval(s, *k, xi)?.norm();
                        }
                        forcing += w * weight * inner;
                    }
                }
                Ok((initial, forcing))
            })
            .collect::<Result<_>>()?;
        let initial = per_mode.iter().map(|m| m.0).sum::<f64>() * cell;
        let forcing = per_mode.iter().map(|m| m.1).sum::<f64>() * cell;
        Ok((initial + forcing, vec![("initial", initial), ("forcing", forcing)]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::propagator::Forcing;
    use crate::spectral::{make_grid, sample, Field, Side, SpectralGrid};
    use crate::symbols::SecondOrderSymbol;
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn gaussian(g: &SpectralGrid) -> Field {
        sample(g, Side::Frequency, |xi| c((-xi[0] * xi[0] / 2.0).exp())).unwrap()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec { panels: 8, ..QuadratureSpec::default() }
    }

    #[test]
    fn heat_condition_a_is_below_data_mass() {
        let g = make_grid(1, 64, 20.0).unwrap();
        let p = CauchyProblem::new(SecondOrderSymbol::heat(1).unwrap(), gaussian(&g), 2.0).unwrap();
        let r = check_condition_a(&p, 1.0, 2.0, &quad()).unwrap();
        let mass: f64 = g.ball_modes(2.0).unwrap().iter().map(|&k| p.u0_hat().values()[k].norm()).sum::<f64>()
            * g.frequency_cell_volume();
        assert!(r.finite);
        assert!(r.bound <= mass && r.bound > 0.0);
        // independent lattice sum of exp(-t xi^2)|u0_hat|
        let oracle: f64 = g.ball_modes(2.0).unwrap().iter().map(|&k| {
            let xi2 = g.frequency_norm_sq(k);
            (-xi2).exp() * (-xi2 / 2.0).exp()
        }).sum::<f64>() * g.frequency_cell_volume();
        assert!((r.bound - oracle).abs() < 1e-12);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = make_grid(1, 16, 10.0).unwrap();
        let p = CauchyProblem::new(SecondOrderSymbol::heat(1).unwrap(), Field::zeros(g, Side::Frequency), 1.0).unwrap();
        assert_eq!(check_condition_a(&p, 0.5, 1.0, &quad()).unwrap().bound, 0.0);
        assert_eq!(check_condition_b(&p, 0.5, 1.0, &quad()).unwrap().bound, 0.0);
    }

    #[test]
    fn zero_symbol_condition_b_vanishes() {
        let g = make_grid(1, 16, 10.0).unwrap();
        let p = CauchyProblem::new(SecondOrderSymbol::potential(1, 0.0).unwrap(), gaussian(&g), 1.0)
            .unwrap()
            .with_forcing(Forcing::pointwise(|_, _| c(1.0)))
            .unwrap();
        let r = check_condition_b(&p, 0.5, 1.0, &quad()).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.finite);
    }

    #[test]
    fn unit_modulus_symbol_reduces_to_t_times_condition_a() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let sym = SecondOrderSymbol::potential(1, Complex64::new(0.0, 1.0)).unwrap();
        let p = CauchyProblem::new(sym, gaussian(&g), 2.0).unwrap();
        let t = 0.7;
        let a = check_condition_a(&p, t, 3.0, &quad()).unwrap();
        let b = check_condition_b(&p, t, 3.0, &quad()).unwrap();
        assert!((b.bound - t * a.bound).abs() < 1e-12 * a.bound);
    }

    #[test]
    fn radius_beyond_grid() {
        let g = make_grid(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let p = CauchyProblem::new(SecondOrderSymbol::heat(1).unwrap(), gaussian(&g), 1.0).unwrap();
        assert!(matches!(check_condition_a(&p, 0.5, 5.0, &quad()), Err(Error::RadiusExceedsGrid { .. })));
    }

    #[test]
    fn monotone_in_radius_and_time() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let p = CauchyProblem::new(SecondOrderSymbol::isotropic(1, -0.5).unwrap(), gaussian(&g), 2.0)
            .unwrap()
            .with_forcing(Forcing::pointwise(|s, xi| c((1.0 + s) / (1.0 + xi[0] * xi[0]))))
            .unwrap();
        let mut last = 0.0;
        for r in [0.5, 1.0, 2.0, 3.0] {
            let b = check_condition_b(&p, 0.5, r, &quad()).unwrap().bound;
            assert!(b >= last);
            last = b;
        }
        let early = check_condition_b(&p, 0.25, 2.0, &quad()).unwrap().bound;
        let late = check_condition_b(&p, 0.75, 2.0, &quad()).unwrap().bound;
        assert!(late >= early);
    }
}
