use num_complex::Complex64;
use serde_json::json;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{check_dim, quadrature_integral, Coefficient, Symbol, SymbolDescriptor, SymbolFn};
use crate::error::{Error, Result};
use crate::quadrature::{Integral, QuadratureSpec};

/// Branch convention recorded in descriptors.
pub const BRANCH: &str = "principal: arg in (-pi, pi]";

/// Principal logarithm with `arg` in `(-pi, pi]`; `-0.0` imaginary parts on the
/// negative real axis map to `+pi`.
pub fn principal_log(z: Complex64) -> Complex64 {
    let mut arg = z.im.atan2(z.re);
    if arg <= -PI {
        arg = PI;
    }
    Complex64::new(z.norm().ln(), arg)
}

/// The argument `psi_exp(t, xi)` of the logarithm.
#[derive(Clone)]
pub enum PsiExp {
    /// `|xi|^2`.
    AbsSquared,
    /// `alpha_ij(t) xi_i xi_j` with a row-major `d x d` coefficient matrix.
    QuadraticForm { alpha: Vec<Coefficient> },
    Custom {
        name: String,
        f: SymbolFn,
        time_independent: bool,
    },
}

impl fmt::Debug for PsiExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiExp::AbsSquared => write!(f, "AbsSquared"),
            PsiExp::QuadraticForm { alpha } => f.debug_struct("QuadraticForm").field("alpha", alpha).finish(),
            PsiExp::Custom { name, time_independent, .. } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("time_independent", time_independent)
                .finish(),
        }
    }
}

impl PsiExp {
    pub fn custom(
        name: impl Into<String>,
        time_independent: bool,
        f: impl Fn(f64, &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        PsiExp::Custom {
            name: name.into(),
            f: Arc::new(f),
            time_independent,
        }
    }

    pub fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        match self {
            PsiExp::AbsSquared => Ok(Complex64::new(xi.iter().map(|v| v * v).sum(), 0.0)),
            PsiExp::QuadraticForm { alpha } => {
                let d = xi.len();
                if alpha.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: (alpha.len() as f64).sqrt() as usize,
                        found: d,
                    });
                }
                Ok((0..d * d).map(|k| alpha[k].eval(t) * (xi[k / d] * xi[k % d])).sum())
            }
            PsiExp::Custom { f, .. } => Ok(f(t, xi)),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            PsiExp::AbsSquared => true,
            PsiExp::QuadraticForm { alpha } => alpha.iter().all(Coefficient::is_constant),
            PsiExp::Custom { time_independent, .. } => *time_independent,
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            PsiExp::QuadraticForm { alpha } => (1..=3).find(|d| d * d == alpha.len()),
            _ => None,
        }
    }

    fn descriptor(&self) -> serde_json::Value {
        match self {
            PsiExp::AbsSquared => json!("abs_squared"),
            PsiExp::QuadraticForm { alpha } => json!({
                "quadratic_form": alpha.iter().map(Coefficient::descriptor).collect::<Vec<_>>()
            }),
            PsiExp::Custom { name, time_independent, .. } => json!({
                "custom": name,
                "time_independent": time_independent,
            }),
        }
    }
}

/// `psi(t, xi) = beta(t) log psi_exp(t, xi)` on the principal branch.
#[derive(Debug, Clone)]
pub struct LogSymbol {
    beta: Coefficient,
    psi_exp: PsiExp,
}

pub fn log_symbol(beta: impl Into<Coefficient>, psi_exp: PsiExp) -> LogSymbol {
    LogSymbol {
        beta: beta.into(),
        psi_exp,
    }
}

/// `log(-Laplacian)`, i.e. `beta = 1`, `psi_exp = |xi|^2`.
pub fn log_laplacian() -> LogSymbol {
    log_symbol(1.0, PsiExp::AbsSquared)
}

impl LogSymbol {
    pub fn beta(&self) -> &Coefficient {
        &self.beta
    }

    pub fn psi_exp(&self) -> &PsiExp {
        &self.psi_exp
    }

    /// `log psi_exp(t, xi)`, failing with `ZeroArgument` at zeros.
    pub fn log_argument(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        let z = self.psi_exp.eval(t, xi)?;
        if z.norm() == 0.0 {
            return Err(Error::ZeroArgument { t, xi: xi.to_vec() });
        }
        if !z.is_finite() {
            return Err(Error::InvalidArgument(format!("psi_exp not finite at t = {t}, xi = {xi:?}")));
        }
        Ok(principal_log(z))
    }
}

impl Symbol for LogSymbol {
    fn dim(&self) -> Option<usize> {
        self.psi_exp.dim()
    }

    fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), xi)?;
        Ok(self.beta.eval(t) * self.log_argument(t, xi)?)
    }

    fn integral(&self, s: f64, t: f64, xi: &[f64], quad: &QuadratureSpec) -> Result<Integral> {
        check_dim(self.dim(), xi)?;
        if !self.psi_exp.is_time_independent() {
            return quadrature_integral(self, s, t, xi, quad);
        }
        let log = self.log_argument(s, xi)?;
        let b = self.beta.integral(s, t, quad)?;
        Ok(Integral {
            value: b.value * log,
            abs_err: b.abs_err * log.norm(),
        })
    }

    fn descriptor(&self) -> SymbolDescriptor {
        let mut d = SymbolDescriptor::new(
            "log",
            json!({ "beta": self.beta.descriptor(), "psi_exp": self.psi_exp.descriptor() }),
        );
        d.branch = Some(BRANCH.to_string());
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::integrate_symbol;
    use proptest::prelude::*;

    #[test]
    fn log_of_positive_argument() {
        let s = log_laplacian();
        let v = s.eval(0.0, &[2.0, 0.0]).unwrap();
        assert!((v.re - 4f64.ln()).abs() < 1e-15 && v.im == 0.0);
        let v = s.eval(0.0, &[0.0, 3.0]).unwrap();
        assert!((v.re - 9f64.ln()).abs() < 1e-15);
        assert_eq!(s.eval(0.0, &[1.0]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn negative_one_maps_to_i_pi() {
        let s = log_symbol(1.0, PsiExp::custom("-1", true, |_, _| Complex64::new(-1.0, 0.0)));
        assert_eq!(s.eval(0.0, &[1.0]).unwrap(), Complex64::new(0.0, PI));
        let s = log_symbol(1.0, PsiExp::custom("-1-0i", true, |_, _| Complex64::new(-1.0, -0.0)));
        assert_eq!(s.eval(0.0, &[1.0]).unwrap(), Complex64::new(0.0, PI));
    }

    #[test]
    fn zero_argument_is_an_error() {
        let s = log_laplacian();
        assert!(matches!(s.eval(0.0, &[0.0, 0.0]), Err(Error::ZeroArgument { .. })));
        let q = QuadratureSpec::default();
        assert!(matches!(s.integral(0.0, 1.0, &[0.0], &q), Err(Error::ZeroArgument { .. })));
    }

    #[test]
    fn time_constant_integrand_is_exact() {
        let q = QuadratureSpec::default();
        let s = log_laplacian();
        let v = integrate_symbol(&s, 0.0, 0.75, &[1.5, 2.0], &q).unwrap();
        assert_eq!(v.re, 0.75 * 6.25f64.ln());
    }

    #[test]
    fn time_dependent_argument_falls_back_to_quadrature() {
        let q = QuadratureSpec::default();
        // log(e^t |xi|^2) = t + log|xi|^2
        let s = log_symbol(1.0, PsiExp::custom("e^t|xi|^2", false, |t, xi| {
            Complex64::new(t.exp() * xi[0] * xi[0], 0.0)
        }));
        let v = integrate_symbol(&s, 0.0, 1.0, &[2.0], &q).unwrap();
        assert!((v.re - (0.5 + 4f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn quadratic_form_argument() {
        let s = log_symbol(
            2.0,
            PsiExp::QuadraticForm { alpha: vec![1.0.into(), 0.0.into(), 0.0.into(), 4.0.into()] },
        );
        let v = s.eval(0.0, &[1.0, 1.0]).unwrap();
        assert!((v.re - 2.0 * 5f64.ln()).abs() < 1e-14);
        assert_eq!(s.dim(), Some(2));
    }

    proptest! {
        #[test]
        fn principal_branch(re in -10.0f64..10.0, im in -10.0f64..10.0) {
            prop_assume!(re != 0.0 || im != 0.0);
            let l = principal_log(Complex64::new(re, im));
            prop_assert!(l.im > -PI && l.im <= PI);
            let back = l.exp();
            prop_assert!((back - Complex64::new(re, im)).norm() < 1e-12 * (1.0 + re.hypot(im)));
        }
    }
}
