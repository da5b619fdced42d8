//! Symbols `psi(t, xi)` and their time integrals.
//!
//! Every family implements [`Symbol`]: pointwise evaluation, the integral
//! `\int_s^t psi(r, xi) dr` (exact where the time dependence is piecewise
//! constant, quadrature otherwise), an optional support predicate and a JSON
//! descriptor. Symbols are immutable and `Send + Sync`; closures supplied to
//! any family must be reentrant.

mod coefficient;
mod log;
mod second_order;
mod tabulated;

pub use coefficient::{Coefficient, PiecewiseConstant, TimeFn};
pub use log::{log_laplacian, log_symbol, principal_log, LogSymbol, PsiExp, BRANCH};
pub use second_order::{second_order, SecondOrderSymbol};
pub use tabulated::TabulatedSymbol;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{Integral, QuadratureSpec};


/// Name, parameters and branch convention of a symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolDescriptor {
    pub family: String,
    pub parameters: Value,
    pub branch: Option<String>,
}

impl SymbolDescriptor {
    pub fn new(family: impl Into<String>, parameters: Value) -> Self {
        Self {
            family: family.into(),
            parameters,
            branch: None,
        }
    }

    /// `{family, parameters, branch, quadrature}` as embedded in reports.
    pub fn to_json(&self, quad: &QuadratureSpec) -> Value {
        json!({
            "family": self.family,
            "parameters": self.parameters,
            "branch": self.branch,
            "quadrature": quad,
        })
    }
}

pub trait Symbol: Send + Sync {
    /// Spatial dimension the symbol is defined for, `None` if any.
    fn dim(&self) -> Option<usize> {
        None
    }

    fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64>;

    /// `\int_s^t psi(r, xi) dr` with an error estimate; negated for `t < s`.
    fn integral(&self, s: f64, t: f64, xi: &[f64], quad: &QuadratureSpec) -> Result<Integral> {
        quadrature_integral(self, s, t, xi, quad)
    }

    /// `false` where `psi(t, .)` is declared to vanish.
    fn in_support(&self, _t: f64, _xi: &[f64]) -> bool {
        true
    }

    fn descriptor(&self) -> SymbolDescriptor;
}

impl<S: Symbol + ?Sized> Symbol for Arc<S> {
    fn dim(&self) -> Option<usize> {
        (**self).dim()
    }
    fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        (**self).eval(t, xi)
    }
    fn integral(&self, s: f64, t: f64, xi: &[f64], quad: &QuadratureSpec) -> Result<Integral> {
        (**self).integral(s, t, xi, quad)
    }
    fn in_support(&self, t: f64, xi: &[f64]) -> bool {
        (**self).in_support(t, xi)
    }
    fn descriptor(&self) -> SymbolDescriptor {
        (**self).descriptor()
    }
}

/// `\int_s^t psi(r, xi) dr` within `quad.abs_tol`.
pub fn integrate_symbol(
    sym: &(impl Symbol + ?Sized),
    s: f64,
    t: f64,
    xi: &[f64],
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    Ok(sym.integral(s, t, xi, quad)?.value)
}

/// Adaptive quadrature of `sym.eval` in time; the fallback for every family.
pub fn quadrature_integral<S: Symbol + ?Sized>(
    sym: &S,
    s: f64,
    t: f64,
    xi: &[f64],
    quad: &QuadratureSpec,
) -> Result<Integral> {
    if t < s {
        let i = quadrature_integral(sym, t, s, xi, quad)?;
        return Ok(Integral {
            value: -i.value,
            abs_err: i.abs_err,
        });
    }
    quad.integrate(s, t, |r| sym.eval(r, xi))
}

pub(crate) fn check_dim(expected: Option<usize>, xi: &[f64]) -> Result<()> {
    match expected {
        Some(d) if d != xi.len() => Err(Error::DimensionMismatch {
            expected: d,
            found: xi.len(),
        }),
        _ => Ok(()),
    }
}

pub type SymbolFn = Arc<dyn Fn(f64, &[f64]) -> Complex64 + Send + Sync>;
pub type SupportFn = Arc<dyn Fn(f64, &[f64]) -> bool + Send + Sync>;

/// User-supplied symbol, integrated in time by quadrature.
#[derive(Clone)]
pub struct ClosureSymbol {
    name: String,
    dim: Option<usize>,
    f: SymbolFn,
    support: Option<SupportFn>,
}

impl ClosureSymbol {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64, &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim: None,
            f: Arc::new(f),
            support: None,
        }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    /// Declares where `psi(t, .)` may be nonzero.
    pub fn with_support(
        mut self,
        support: impl Fn(f64, &[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.support = Some(Arc::new(support));
        self
    }
}

impl Symbol for ClosureSymbol {
    fn dim(&self) -> Option<usize> {
        self.dim
    }

    fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        check_dim(self.dim, xi)?;
        let v = (self.f)(t, xi);
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "symbol {} is not finite at t = {t}, xi = {xi:?}",
                self.name
            )));
        }
        Ok(v)
    }

    fn in_support(&self, t: f64, xi: &[f64]) -> bool {
        self.support.as_ref().is_none_or(|s| s(t, xi))
    }

    fn descriptor(&self) -> SymbolDescriptor {
        SymbolDescriptor::new("closure", json!({ "name": self.name, "dim": self.dim }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closure_symbol_integrates_by_quadrature() {
        let sym = ClosureSymbol::new("t xi", |t, xi| Complex64::new(t * xi[0], 0.0));
        let q = QuadratureSpec::default();
        let v = integrate_symbol(&sym, 0.0, 2.0, &[3.0], &q).unwrap();
        assert!((v.re - 6.0).abs() < 1e-12);
        let back = integrate_symbol(&sym, 2.0, 0.0, &[3.0], &q).unwrap();
        assert!((back.re + 6.0).abs() < 1e-12);
        assert_eq!(integrate_symbol(&sym, 0.7, 0.7, &[3.0], &q).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closure_support_and_dim() {
        let sym = ClosureSymbol::new("one", |_, _| Complex64::new(1.0, 0.0))
            .with_dim(2)
            .with_support(|_, xi| xi[0] > 0.0);
        assert!(sym.in_support(0.0, &[1.0, 0.0]));
        assert!(!sym.in_support(0.0, &[-1.0, 0.0]));
        assert!(matches!(sym.eval(0.0, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn descriptor_json_has_all_keys() {
        let sym = log_laplacian();
        let v = sym.descriptor().to_json(&QuadratureSpec::default());
        for key in ["family", "parameters", "branch", "quadrature"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["branch"], BRANCH);
    }

    proptest! {
        #[test]
        fn quadrature_integral_is_additive(s in 0.0f64..1.0, h1 in 0.0f64..1.0, h2 in 0.0f64..1.0,
                                           xi in -3.0f64..3.0) {
            let sym = ClosureSymbol::new("osc", |t, xi| {
                Complex64::new((3.0 * t).cos() * xi[0], -(t * xi[0]).sin())
            });
            let q = QuadratureSpec::default();
            let t = s + h1;
            let r = t + h2;
            let a = integrate_symbol(&sym, s, t, &[xi], &q).unwrap();
            let b = integrate_symbol(&sym, t, r, &[xi], &q).unwrap();
            let c = integrate_symbol(&sym, s, r, &[xi], &q).unwrap();
            prop_assert!((a + b - c).norm() <= 10.0 * q.abs_tol);
        }
    }
}
