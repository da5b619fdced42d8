use num_complex::Complex64;
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{lp_norm, Integral, QuadratureSpec};

pub type TimeFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Piecewise-constant function of time: `values[0]` before `breaks[0]`,
/// `values[i]` on `[breaks[i-1], breaks[i])`, the last value after the last break.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breaks: Vec<f64>,
    values: Vec<Complex64>,
}

impl PiecewiseConstant {
    pub fn new(breaks: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breaks need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { breaks, values })
    }

    pub fn constant(value: Complex64) -> Self {
        Self {
            breaks: Vec::new(),
            values: vec![value],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.values[self.breaks.partition_point(|&b| b <= t)]
    }

    /// Pieces overlapping `[s, t]` as `(length, value)` pairs, in time order.
    fn pieces(&self, s: f64, t: f64) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        let n = self.values.len();
        (0..n).filter_map(move |i| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { self.breaks[i - 1] };
            let hi = if i == n - 1 { f64::INFINITY } else { self.breaks[i] };
            let a = s.max(lo);
            let b = t.min(hi);
            (b > a).then(|| (b - a, self.values[i]))
        })
    }

    /// Exact `\int_s^t` (negated when `t < s`).
    pub fn integral(&self, s: f64, t: f64) -> Complex64 {
        if t < s {
            return -self.integral(t, s);
        }
        self.pieces(s, t).map(|(len, v)| v * len).sum()
    }

    pub fn lp_norm(&self, s: f64, t: f64, p: f64) -> f64 {
        if p.is_infinite() {
            return self.pieces(s, t).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        }
        self.pieces(s, t)
            .map(|(len, v)| v.norm().powf(p) * len)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// A scalar time coefficient: an exactly integrable breakpoint table or a
/// closure integrated by quadrature. Closures must be reentrant.
#[derive(Clone)]
pub enum Coefficient {
    Piecewise(PiecewiseConstant),
    Closure { name: String, f: TimeFn },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Piecewise(p) => f.debug_tuple("Piecewise").field(p).finish(),
            Coefficient::Closure { name, .. } => f.debug_struct("Closure").field("name", name).finish(),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::constant(Complex64::new(v, 0.0))
    }
}

impl From<Complex64> for Coefficient {
    fn from(v: Complex64) -> Self {
        Coefficient::constant(v)
    }
}

impl From<PiecewiseConstant> for Coefficient {
    fn from(p: PiecewiseConstant) -> Self {
        Coefficient::Piecewise(p)
    }
}

impl Coefficient {
    pub fn constant(value: Complex64) -> Self {
        Coefficient::Piecewise(PiecewiseConstant::constant(value))
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn piecewise(breaks: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        Ok(Coefficient::Piecewise(PiecewiseConstant::new(breaks, values)?))
    }

    pub fn closure(name: impl Into<String>, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Coefficient::Closure {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Coefficient::Piecewise(p) => p.eval(t),
            Coefficient::Closure { f, .. } => f(t),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficient::Piecewise(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Piecewise(p) if p.breaks.is_empty())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Piecewise(p) if p.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)))
    }

    pub fn integral(&self, s: f64, t: f64, quad: &QuadratureSpec) -> Result<Integral> {
        match self {
            Coefficient::Piecewise(p) => Ok(Integral::exact(p.integral(s, t))),
            Coefficient::Closure { f, .. } => {
                if t < s {
                    let i = quad.integrate(t, s, |r| Ok(f(r)))?;
                    return Ok(Integral {
                        value: -i.value,
                        abs_err: i.abs_err,
                    });
                }
                quad.integrate(s, t, |r| Ok(f(r)))
            }
        }
    }

    /// `||coef||_{L_p(s, t)}`; exact for breakpoint tables.
    pub fn lp_norm(&self, s: f64, t: f64, p: f64, quad: &QuadratureSpec) -> Result<Integral> {
        match self {
            Coefficient::Piecewise(pc) => Ok(Integral::exact(Complex64::new(pc.lp_norm(s, t, p), 0.0))),
            Coefficient::Closure { f, .. } => lp_norm(quad, s, t, p, |r| Ok(f(r).norm())),
        }
    }

    pub fn descriptor(&self) -> Value {
        match self {
            Coefficient::Piecewise(p) if p.breaks.is_empty() => complex_json(p.values[0]),
            Coefficient::Piecewise(p) => json!({
                "breaks": p.breaks,
                "values": p.values.iter().map(|v| complex_json(*v)).collect::<Vec<_>>(),
            }),
            Coefficient::Closure { name, .. } => json!({ "closure": name }),
        }
    }
}

pub(crate) fn complex_json(v: Complex64) -> Value {
    json!([v.re, v.im])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn sign_changing_table_cancels_exactly() {
        let a = Coefficient::piecewise(vec![0.5], vec![c(1.0), c(-1.0)]).unwrap();
        assert_eq!(a.eval(0.25), c(1.0));
        assert_eq!(a.eval(0.5), c(-1.0));
        let q = QuadratureSpec::default();
        assert_eq!(a.integral(0.0, 1.0, &q).unwrap().value.re, 0.0);
        assert_eq!(a.integral(0.0, 0.75, &q).unwrap().value.re, 0.25);
        assert_eq!(a.integral(0.75, 0.0, &q).unwrap().value.re, -0.25);
    }

    #[test]
    fn table_validation() {
        assert!(PiecewiseConstant::new(vec![0.5, 0.5], vec![c(1.0); 3]).is_err());
        assert!(PiecewiseConstant::new(vec![0.5], vec![c(1.0)]).is_err());
    }

    #[test]
    fn closure_integral_by_quadrature() {
        let q = QuadratureSpec::default();
        let a = Coefficient::closure("t^2", |t| c(t * t));
        let i = a.integral(0.0, 3.0, &q).unwrap();
        assert!((i.value.re - 9.0).abs() < 1e-12);
        assert!(!a.is_exact());
    }

    #[test]
    fn lp_norm_of_table() {
        let a = Coefficient::piecewise(vec![0.5], vec![c(2.0), c(-4.0)]).unwrap();
        let q = QuadratureSpec::default();
        let l1 = a.lp_norm(0.0, 1.0, 1.0, &q).unwrap().value.re;
        assert!((l1 - 3.0).abs() < 1e-15);
        let linf = a.lp_norm(0.0, 1.0, f64::INFINITY, &q).unwrap().value.re;
        assert_eq!(linf, 4.0);
        let linf_left = a.lp_norm(0.0, 0.5, f64::INFINITY, &q).unwrap().value.re;
        assert_eq!(linf_left, 2.0);
    }
}
