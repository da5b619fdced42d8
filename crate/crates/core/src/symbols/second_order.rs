use num_complex::Complex64;
use serde_json::json;

use super::{check_dim, Coefficient, Symbol, SymbolDescriptor};
use crate::error::{Error, Result};
use crate::quadrature::{Integral, QuadratureSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `psi(t, xi) = -a_ij(t) xi_i xi_j + i b_j(t) xi_j + c(t)`.
///
/// No symmetry or definiteness is required of `a`. The time integral is the
/// same combination of coefficient integrals, so it is exact whenever every
/// coefficient is a breakpoint table.
#[derive(Debug, Clone)]
pub struct SecondOrderSymbol {
    dim: usize,
    a: Vec<Coefficient>,
    b: Vec<Coefficient>,
    c: Coefficient,
}

/// Builds a second-order symbol from a row-major `d x d` matrix `a`, a
/// `d`-vector `b` (empty for zero) and a scalar `c`.
pub fn second_order(a: Vec<Coefficient>, b: Vec<Coefficient>, c: Coefficient) -> Result<SecondOrderSymbol> {
    let dim = (1..=3)
        .find(|d| d * d == a.len())
        .ok_or_else(|| Error::InvalidArgument(format!("a has {} entries, expected 1, 4 or 9", a.len())))?;
    let b = if b.is_empty() {
        vec![Coefficient::zero(); dim]
    } else {
        b
    };
    if b.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: b.len(),
        });
    }
    Ok(SecondOrderSymbol { dim, a, b, c })
}

impl SecondOrderSymbol {
    /// `a(t) delta_ij`, no drift, no potential.
    pub fn isotropic(dim: usize, a: impl Into<Coefficient>) -> Result<Self> {
        let a = a.into();
        let matrix = (0..dim * dim)
            .map(|k| if k / dim == k % dim { a.clone() } else { Coefficient::zero() })
            .collect();
        second_order(matrix, Vec::new(), Coefficient::zero())
    }

    /// The heat symbol `-|xi|^2`.
    pub fn heat(dim: usize) -> Result<Self> {
        Self::isotropic(dim, 1.0)
    }

    /// The zeroth-order symbol `c(t)`.
    pub fn potential(dim: usize, c: impl Into<Coefficient>) -> Result<Self> {
        second_order(vec![Coefficient::zero(); dim * dim], Vec::new(), c.into())
    }

    pub fn with_potential(mut self, c: impl Into<Coefficient>) -> Self {
        self.c = c.into();
        self
    }

    pub fn with_drift(mut self, b: Vec<Coefficient>) -> Result<Self> {
        if b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: b.len(),
            });
        }
        self.b = b;
        Ok(self)
    }

    pub fn a(&self) -> &[Coefficient] {
        &self.a
    }

    pub fn b(&self) -> &[Coefficient] {
        &self.b
    }

    pub fn c(&self) -> &Coefficient {
        &self.c
    }

    /// All coefficients, `a` row-major, then `b`, then `c`.
    pub fn coefficients(&self) -> impl Iterator<Item = &Coefficient> {
        self.a.iter().chain(self.b.iter()).chain(std::iter::once(&self.c))
    }

    /// Weights multiplying each entry of [`coefficients`](Self::coefficients) at `xi`.
    fn weights<'a>(&self, xi: &'a [f64]) -> impl Iterator<Item = Complex64> + 'a {
        let d = self.dim;
        let a = (0..d * d).map(move |k| Complex64::new(-xi[k / d] * xi[k % d], 0.0));
        let b = (0..d).map(move |j| I * xi[j]);
        a.chain(b).chain(std::iter::once(Complex64::new(1.0, 0.0)))
    }
}

impl Symbol for SecondOrderSymbol {
    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        check_dim(Some(self.dim), xi)?;
        Ok(self
            .coefficients()
            .zip(self.weights(xi))
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, w)| c.eval(t) * w)
            .sum())
    }

    fn integral(&self, s: f64, t: f64, xi: &[f64], quad: &QuadratureSpec) -> Result<Integral> {
        check_dim(Some(self.dim), xi)?;
        let mut total = Integral::exact(Complex64::new(0.0, 0.0));
        for (c, w) in self.coefficients().zip(self.weights(xi)) {
            if c.is_zero() || w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let i = c.integral(s, t, quad)?;
            total.value += i.value * w;
            total.abs_err += i.abs_err * w.norm();
        }
        Ok(total)
    }

    fn descriptor(&self) -> SymbolDescriptor {
        SymbolDescriptor::new(
            "second_order",
            json!({
                "dim": self.dim,
                "a": self.a.iter().map(Coefficient::descriptor).collect::<Vec<_>>(),
                "b": self.b.iter().map(Coefficient::descriptor).collect::<Vec<_>>(),
                "c": self.c.descriptor(),
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::integrate_symbol;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sign_changing() -> Coefficient {
        Coefficient::piecewise(vec![0.5], vec![c(1.0), c(-1.0)]).unwrap()
    }

    #[test]
    fn heat_symbol_values() {
        let h = SecondOrderSymbol::heat(1).unwrap();
        assert_eq!(h.eval(0.3, &[2.0]).unwrap(), c(-4.0));
        let h2 = SecondOrderSymbol::heat(2).unwrap();
        assert_eq!(h2.eval(0.0, &[1.0, 1.0]).unwrap(), c(-2.0));
        let drift = h2.with_drift(vec![0.0.into(), 1.0.into()]).unwrap();
        assert_eq!(drift.eval(0.0, &[1.0, 1.0]).unwrap(), Complex64::new(-2.0, 1.0));
    }

    #[test]
    fn sign_changing_coefficient_integrates_to_zero() {
        let sym = SecondOrderSymbol::isotropic(1, sign_changing()).unwrap();
        let q = QuadratureSpec::default();
        for xi in [0.0, 0.5, 3.0, 17.0, 1e3] {
            let v = integrate_symbol(&sym, 0.0, 1.0, &[xi], &q).unwrap();
            assert!(v.norm() < 1e-14, "{xi}: {v}");
        }
    }

    #[test]
    fn heat_integral() {
        let q = QuadratureSpec::default();
        let h = SecondOrderSymbol::heat(1).unwrap();
        assert_eq!(integrate_symbol(&h, 0.0, 0.5, &[2.0], &q).unwrap(), c(-2.0));
    }

    #[test]
    fn closure_coefficients_use_quadrature() {
        let q = QuadratureSpec::default();
        let a = Coefficient::closure("1+t", |t| c(1.0 + t));
        let sym = SecondOrderSymbol::isotropic(1, a).unwrap();
        let i = sym.integral(0.0, 1.0, &[2.0], &q).unwrap();
        assert!((i.value.re + 4.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn shape_validation() {
        assert!(second_order(vec![Coefficient::zero(); 3], vec![], Coefficient::zero()).is_err());
        assert!(second_order(vec![Coefficient::zero(); 4], vec![Coefficient::zero()], Coefficient::zero()).is_err());
        let h = SecondOrderSymbol::heat(2).unwrap();
        assert!(matches!(h.eval(0.0, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        // Re psi = -Re a_ij xi_i xi_j - Im b_j xi_j + Re c
        #[test]
        fn real_part_identity(ar in -2.0f64..2.0, ai in -2.0f64..2.0, br in -2.0f64..2.0,
                              bi in -2.0f64..2.0, cr in -2.0f64..2.0, ci in -2.0f64..2.0,
                              x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let a = Complex64::new(ar, ai);
            let off = Complex64::new(ai, ar);
            let b = Complex64::new(br, bi);
            let sym = second_order(
                vec![a.into(), off.into(), Coefficient::zero(), a.into()],
                vec![b.into(), Coefficient::zero()],
                Complex64::new(cr, ci).into(),
            ).unwrap();
            let v = sym.eval(0.0, &[x, y]).unwrap();
            let expected = -ar * x * x - off.re * x * y - ar * y * y - bi * x + cr;
            prop_assert!((v.re - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }

        #[test]
        fn integral_is_additive(s in 0.0f64..1.0, h1 in 0.0f64..1.0, h2 in 0.0f64..1.0, xi in -4.0f64..4.0) {
            let q = QuadratureSpec::default();
            let sym = SecondOrderSymbol::isotropic(1, sign_changing()).unwrap()
                .with_potential(Coefficient::closure("sin", |t| Complex64::new(t.sin(), t.cos())));
            let a = integrate_symbol(&sym, s, s + h1, &[xi], &q).unwrap();
            let b = integrate_symbol(&sym, s + h1, s + h1 + h2, &[xi], &q).unwrap();
            let total = integrate_symbol(&sym, s, s + h1 + h2, &[xi], &q).unwrap();
            prop_assert!((a + b - total).norm() <= 10.0 * q.abs_tol);
        }
    }
}
