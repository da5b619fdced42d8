use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::solve::{eval_symbol, exponent};
use super::{LogComplex, ZeroModePolicy};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::spectral::{inverse_transform, Field, Side, SpectralGrid};
use crate::symbols::Symbol;

/// `M(s, t, xi) = exp(\int_s^t psi(r, xi) dr)` in log form.
pub fn multiplier(sym: &dyn Symbol, s: f64, t: f64, xi: &[f64], quad: &QuadratureSpec) -> Result<LogComplex> {
    Ok(LogComplex::exp(sym.integral(s, t, xi, quad)?.value))
}

/// [`multiplier`] on every lattice frequency of `grid`.
pub fn multiplier_field(
    sym: &dyn Symbol,
    s: f64,
    t: f64,
    grid: &SpectralGrid,
    quad: &QuadratureSpec,
    policy: ZeroModePolicy,
) -> Result<Vec<LogComplex>> {
    let dim = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let xi = grid.frequency(k);
            let (i, _) = exponent(sym, s, t, &xi[..dim], quad, policy)?;
            Ok(LogComplex::exp(i.value))
        })
        .collect()
}

/// Physical kernel `K(s, t, .)`: the solution at time `t` started from a unit
/// point mass at time `s`, i.e. the inverse transform of `(2 pi)^{-d/2} M(s, t, .)`.
/// Convolution with it propagates physical data from `s` to `t`.
///
/// Fails with `KernelOverflow` listing every mode whose multiplier cannot be
/// materialized. A vanishing log argument is dropped (multiplier 1).
pub fn kernel_snapshot(sym: &dyn Symbol, s: f64, t: f64, grid: &SpectralGrid, quad: &QuadratureSpec) -> Result<Field> {
    kernel_snapshot_with(sym, s, t, grid, quad, ZeroModePolicy::Drop)
}

pub fn kernel_snapshot_with(
    sym: &dyn Symbol,
    s: f64,
    t: f64,
    grid: &SpectralGrid,
    quad: &QuadratureSpec,
    policy: ZeroModePolicy,
) -> Result<Field> {
    let m = multiplier_field(sym, s, t, grid, quad, policy)?;
    let modes: Vec<usize> = m
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.is_materializable())
        .map(|(k, _)| k)
        .collect();
    if !modes.is_empty() {
        return Err(Error::KernelOverflow { modes });
    }
    let norm = (2.0 * PI).powf(-(grid.dim() as f64) / 2.0);
    let values = m.iter().map(|l| l.scaled(0.0) * norm).collect();
    inverse_transform(&Field::new(*grid, Side::Frequency, values)?)
}

/// `psi(t, .) u_hat`, zero outside the symbol's declared support.
pub fn apply_operator(sym: &dyn Symbol, t: f64, u_hat: &Field, policy: ZeroModePolicy) -> Result<Field> {
    u_hat.expect_side(Side::Frequency)?;
    let grid = *u_hat.grid();
    let dim = grid.dim();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let xi = grid.frequency(k);
            let xi = &xi[..dim];
            if !sym.in_support(t, xi) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(eval_symbol(sym, t, xi, policy)? * u_hat.values()[k])
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid, Side::Frequency, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, sample};
    use crate::symbols::{log_laplacian, ClosureSymbol, Coefficient, SecondOrderSymbol};
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn heat_multiplier() {
        let q = QuadratureSpec::default();
        let h = SecondOrderSymbol::heat(1).unwrap();
        let m = multiplier(&h, 0.0, 0.3, &[2.0], &q).unwrap();
        assert_eq!(m.log_mag(), -1.2);
        assert_eq!(m.phase(), 0.0);
        assert!((m.materialize().unwrap().re - (-1.2f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn log_laplacian_multiplier_is_power() {
        let q = QuadratureSpec::default();
        let l = log_laplacian();
        for t in [0.25, 1.0, 2.0] {
            for xi in [0.5, 1.0, 3.0] {
                let v = multiplier(&l, 0.0, t, &[xi], &q).unwrap().materialize().unwrap();
                let oracle = xi.powf(2.0 * t);
                assert!((v.re - oracle).abs() <= 1e-12 * oracle && v.im == 0.0);
            }
        }
    }

    #[test]
    fn cancelling_coefficient_gives_unit_multiplier() {
        let q = QuadratureSpec::default();
        let a = Coefficient::piecewise(vec![0.5], vec![c(1.0), c(-1.0)]).unwrap();
        let sym = SecondOrderSymbol::isotropic(1, a).unwrap();
        let m = multiplier(&sym, 0.0, 1.0, &[7.0], &q).unwrap();
        assert_eq!(m, LogComplex::one());
    }

    #[test]
    fn heat_kernel_is_gaussian() {
        let g = make_grid(1, 512, 40.0).unwrap();
        let t = 0.25;
        let k = kernel_snapshot(&SecondOrderSymbol::heat(1).unwrap(), 0.0, t, &g, &QuadratureSpec::default()).unwrap();
        let exact = sample(&g, Side::Physical, |x| c((-x[0] * x[0] / (4.0 * t)).exp() / (4.0 * PI * t).sqrt())).unwrap();
        let err = k.combine(c(1.0), &exact, c(-1.0)).unwrap().max_abs();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn zero_symbol_kernel_has_unit_mass() {
        let g = make_grid(2, 16, 3.0).unwrap();
        let k = kernel_snapshot(&SecondOrderSymbol::potential(2, 0.0).unwrap(), 0.0, 1.0, &g, &QuadratureSpec::default()).unwrap();
        let mass: Complex64 = k.values().iter().sum::<Complex64>() * g.cell_volume();
        assert!((mass - c(1.0)).norm() < 1e-10);
    }

    #[test]
    fn backward_heat_kernel_overflows() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let sym = SecondOrderSymbol::isotropic(1, -1.0).unwrap();
        match kernel_snapshot(&sym, 0.0, 1.0, &g, &QuadratureSpec::default()) {
            Err(Error::KernelOverflow { modes }) => {
                let expected: Vec<usize> = (0..g.len()).filter(|&k| g.frequency_norm_sq(k) >= 700.0).collect();
                assert_eq!(modes, expected);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn apply_operator_cases() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        let k = g.index_of_offsets(&[3]).unwrap();
        let u = Field::unit(g, Side::Frequency, k, c(1.0));
        let out = apply_operator(&SecondOrderSymbol::heat(1).unwrap(), 0.0, &u, ZeroModePolicy::Drop).unwrap();
        assert_eq!(out.values()[k], c(-9.0));

        let ones = Field::new(g, Side::Frequency, vec![c(1.0); 8]).unwrap();
        let out = apply_operator(&log_laplacian(), 0.0, &ones, ZeroModePolicy::Drop).unwrap();
        assert_eq!(out.values()[g.origin_index()], c(0.0));
        assert!(apply_operator(&log_laplacian(), 0.0, &ones, ZeroModePolicy::Error).is_err());

        let half = ClosureSymbol::new("one", |_, _| c(1.0)).with_support(|_, xi| xi[0] >= 0.0);
        let out = apply_operator(&half, 0.0, &ones, ZeroModePolicy::Drop).unwrap();
        assert_eq!(out.values()[0], c(0.0));
        assert_eq!(out.values()[7], c(1.0));
    }

    proptest! {
        #[test]
        fn constant_symbol_scales(re in -3.0f64..3.0, im in -3.0f64..3.0, seed in any::<u32>()) {
            let g = make_grid(1, 8, 1.0).unwrap();
            let cst = Complex64::new(re, im);
            let sym = SecondOrderSymbol::potential(1, cst).unwrap();
            let u = sample(&g, Side::Frequency, |xi| Complex64::new((xi[0] + seed as f64).sin(), xi[0].cos())).unwrap();
            let out = apply_operator(&sym, 0.5, &u, ZeroModePolicy::Drop).unwrap();
            for (a, b) in out.values().iter().zip(u.values()) {
                prop_assert_eq!(*a, cst * b);
            }
        }

        #[test]
        fn cocycle(s in 0.0f64..1.0, h1 in 0.0f64..1.0, h2 in 0.0f64..1.0, xi in -3.0f64..3.0) {
            let q = QuadratureSpec::default();
            let sym = SecondOrderSymbol::isotropic(1, Coefficient::closure("cos", |t| Complex64::new(t.cos(), 1.0))).unwrap()
                .with_potential(Complex64::new(0.0, 1.0));
            let a = multiplier(&sym, s, s + h1, &[xi], &q).unwrap();
            let b = multiplier(&sym, s + h1, s + h1 + h2, &[xi], &q).unwrap();
            let ab = multiplier(&sym, s, s + h1 + h2, &[xi], &q).unwrap();
            let prod = a * b;
            prop_assert!((prod.log_mag() - ab.log_mag()).abs() <= 10.0 * q.abs_tol);
            let dphase = crate::propagator::wrap_phase(prod.phase() - ab.phase());
            prop_assert!(dphase.abs() <= 10.0 * q.abs_tol);
        }
    }
}
