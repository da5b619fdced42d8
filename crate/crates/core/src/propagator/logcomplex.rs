use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::ops::{Mul, MulAssign};

use crate::error::{Error, Result};

/// Largest log-magnitude that may be turned into an ordinary `f64` complex.
pub const MATERIALIZE_LIMIT: f64 = 700.0;

const TAU: f64 = 2.0 * PI;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let mut r = x - TAU * ((x - PI) / TAU).ceil();
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// `exp(log_mag + i phase)` kept in log form so magnitudes far outside the
/// `f64` range stay representable. Zero is `log_mag = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogComplex {
    log_mag: f64,
    phase: f64,
}

impl LogComplex {
    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::zero();
        }
        Self {
            log_mag,
            phase: wrap_phase(phase),
        }
    }

    pub fn zero() -> Self {
        Self {
            log_mag: f64::NEG_INFINITY,
            phase: 0.0,
        }
    }

    pub fn one() -> Self {
        Self {
            log_mag: 0.0,
            phase: 0.0,
        }
    }

    /// `exp(z)` without evaluating the exponential.
    pub fn exp(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::zero();
        }
        Self::new(z.norm().ln(), z.im.atan2(z.re))
    }

    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn is_materializable(&self) -> bool {
        self.log_mag < MATERIALIZE_LIMIT
    }

    pub fn materialize(&self) -> Result<Complex64> {
        if !self.is_materializable() {
            return Err(Error::MagnitudeOverflow { log_mag: self.log_mag });
        }
        Ok(self.scaled(0.0))
    }

    /// `exp(log_mag - shift + i phase)`; the caller guarantees the result is in range.
    pub fn scaled(&self, shift: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.log_mag - shift).exp(), self.phase)
    }

    pub fn powf(&self, p: f64) -> Self {
        Self::new(self.log_mag * p, self.phase * p)
    }

    /// Sum of `terms` via the log-sum-exp shift, exact up to rounding in the
    /// largest term's scale.
    pub fn sum<I: IntoIterator<Item = LogComplex>>(terms: I) -> Self {
        let terms: Vec<LogComplex> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(m) = terms.iter().map(|t| t.log_mag).reduce(f64::max) else {
            return Self::zero();
        };
        let acc: Complex64 = terms.iter().map(|t| t.scaled(m)).sum();
        let z = LogComplex::from_complex(acc);
        if z.is_zero() {
            return z;
        }
        Self::new(z.log_mag + m, z.phase)
    }
}

impl std::ops::Add for LogComplex {
    type Output = LogComplex;
    fn add(self, rhs: LogComplex) -> LogComplex {
        LogComplex::sum([self, rhs])
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::zero();
        }
        LogComplex::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl MulAssign for LogComplex {
    fn mul_assign(&mut self, rhs: LogComplex) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrapping() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(2.5 * PI) - 0.5 * PI).abs() < 1e-15);
        assert_eq!(wrap_phase(0.25), 0.25);
    }

    #[test]
    fn materialization_limit() {
        assert!(LogComplex::new(699.0, 0.0).materialize().is_ok());
        assert!(matches!(
            LogComplex::new(700.0, 0.0).materialize(),
            Err(Error::MagnitudeOverflow { .. })
        ));
        assert_eq!(LogComplex::zero().materialize().unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sum_far_beyond_f64_range() {
        let a = LogComplex::new(5000.0, 0.0);
        let b = LogComplex::new(5000.0 + 2f64.ln(), 0.0);
        let s = a + b;
        assert!((s.log_mag() - (5000.0 + 3f64.ln())).abs() < 1e-12);
        let cancel = LogComplex::new(5000.0, 0.0) + LogComplex::new(5000.0, PI);
        assert!(cancel.log_mag() < 5000.0 - 30.0);
        assert_eq!(LogComplex::sum([]), LogComplex::zero());
    }

    proptest! {
        #[test]
        fn multiplication_matches_complex(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
            let x = Complex64::new(a, b);
            let y = Complex64::new(c, d);
            let p = (LogComplex::from_complex(x) * LogComplex::from_complex(y)).materialize().unwrap();
            prop_assert!((p - x * y).norm() <= 1e-12 * (1.0 + (x * y).norm()));
            let s = (LogComplex::from_complex(x) + LogComplex::from_complex(y)).materialize().unwrap();
            prop_assert!((s - (x + y)).norm() <= 1e-12 * (1.0 + x.norm() + y.norm()));
        }

        #[test]
        fn phase_stays_principal(l in -100.0f64..100.0, p in -1e4f64..1e4, q in -1e4f64..1e4) {
            let z = LogComplex::new(l, p) * LogComplex::new(1.0, q);
            prop_assert!(z.phase() > -PI && z.phase() <= PI);
            prop_assert_eq!(z.log_mag(), l + 1.0);
        }
    }
}
