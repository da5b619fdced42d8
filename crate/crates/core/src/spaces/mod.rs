//! Weighted Bessel potential norms and lattice checks of their embedding and
//! isometry inequalities.
//!
//! With `<x> = (1 + |x|^2)^{1/2}`:
//!
//! - inner: `||(I - Laplacian)^{g1/2} (<x>^{g2} f)||_{L_q}`
//! - outer: `||<x>^{g2} (I - Laplacian)^{g1/2} f||_{L_q}`
//!
//! Fourier transforms are measured by viewing them as physical fields on the
//! dual grid.

mod props;

pub use props::{check_proposition, random_field, PropId, PropParams, PropertyReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{forward_transform, inverse_transform, Field, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselKind {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselNormSpec {
    pub kind: BesselKind,
    /// Regularity exponent.
    pub gamma1: f64,
    /// Weight exponent.
    pub gamma2: f64,
    /// Integrability exponent in space.
    pub q: f64,
    /// Integrability exponent in time for trajectory norms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl BesselNormSpec {
    pub fn inner(gamma1: f64, gamma2: f64, q: f64) -> Self {
        Self { kind: BesselKind::Inner, gamma1, gamma2, q, p: None }
    }

    pub fn outer(gamma1: f64, gamma2: f64, q: f64) -> Self {
        Self { kind: BesselKind::Outer, gamma1, gamma2, q, p: None }
    }

    pub fn with_time_exponent(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.q >= 1.0) {
            return Err(Error::InvalidArgument(format!("q must lie in [1, inf], got {}", self.q)));
        }
        if let Some(p) = self.p {
            if !(p >= 1.0) {
                return Err(Error::InvalidArgument(format!("p must lie in [1, inf], got {p}")));
            }
        }
        if !self.gamma1.is_finite() || !self.gamma2.is_finite() {
            return Err(Error::InvalidArgument("exponents must be finite".into()));
        }
        Ok(())
    }
}

/// `(I - Laplacian)^{gamma/2} f`: forward transform, multiply by
/// `(1 + |xi|^2)^{gamma/2}`, inverse transform.
pub fn bessel_multiplier_apply(f: &Field, gamma: f64) -> Result<Field> {
    f.expect_side(Side::Physical)?;
    if gamma == 0.0 {
        return Ok(f.clone());
    }
    let hat = forward_transform(f)?;
    let grid = *hat.grid();
    let scaled = hat.map(|k, v| v * (1.0 + grid.frequency_norm_sq(k)).powf(gamma / 2.0))?;
    inverse_transform(&scaled)
}

/// `(1 + |x|^2)^{gamma/2} f` on the physical lattice.
pub fn physical_weight(f: &Field, gamma: f64) -> Result<Field> {
    f.expect_side(Side::Physical)?;
    if gamma == 0.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    f.map(|k, v| v * (1.0 + grid.position_norm_sq(k)).powf(gamma / 2.0))
}

fn expect_kind(spec: &BesselNormSpec, kind: BesselKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::InvalidArgument(format!("expected a {kind:?} norm spec, got {:?}", spec.kind)));
    }
    Ok(())
}

pub fn inner_norm(f: &Field, spec: &BesselNormSpec) -> Result<f64> {
    expect_kind(spec, BesselKind::Inner)?;
    let g = bessel_multiplier_apply(&physical_weight(f, spec.gamma2)?, spec.gamma1)?;
    Ok(g.lq_norm(spec.q))
}

pub fn outer_norm(f: &Field, spec: &BesselNormSpec) -> Result<f64> {
    expect_kind(spec, BesselKind::Outer)?;
    let g = physical_weight(&bessel_multiplier_apply(f, spec.gamma1)?, spec.gamma2)?;
    Ok(g.lq_norm(spec.q))
}

/// Inner or outer norm according to `spec.kind`.
pub fn bessel_norm(f: &Field, spec: &BesselNormSpec) -> Result<f64> {
    match spec.kind {
        BesselKind::Inner => inner_norm(f, spec),
        BesselKind::Outer => outer_norm(f, spec),
    }
}

/// Norm of the Fourier transform `F[f]` of a physical field, measured as a
/// function on the dual grid.
pub fn transform_norm(f: &Field, spec: &BesselNormSpec) -> Result<f64> {
    bessel_norm(&forward_transform(f)?.as_dual_physical()?, spec)
}

/// `||w(t) ||u(t)||_H||_{L_p}` over a sampled trajectory, trapezoid in time
/// (maximum for `p = inf`). Requires `spec.p`.
pub fn trajectory_norm(times: &[f64], fields: &[Field], spec: &BesselNormSpec, w: impl Fn(f64) -> f64) -> Result<f64> {
    let p = spec
        .p
        .ok_or_else(|| Error::InvalidArgument("trajectory norm needs a time exponent p".into()))?;
    if times.len() != fields.len() || times.is_empty() {
        return Err(Error::InvalidArgument("times and fields must be non-empty and of equal length".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    let values = fields
        .iter()
        .zip(times)
        .map(|(f, &t)| Ok(w(t) * bessel_norm(f, spec)?))
        .collect::<Result<Vec<f64>>>()?;
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    let acc: f64 = (1..values.len())
        .map(|j| 0.5 * (times[j] - times[j - 1]) * (values[j].abs().powf(p) + values[j - 1].abs().powf(p)))
        .sum();
    Ok(acc.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, sample, SpectralGrid};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn gaussian(g: &SpectralGrid) -> Field {
        sample(g, Side::Physical, |x| c((-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp())).unwrap()
    }

    fn max_diff(a: &Field, b: &Field) -> f64 {
        a.combine(c(1.0), b, c(-1.0)).unwrap().max_abs()
    }

    #[test]
    fn identity_at_zero() {
        let g = make_grid(1, 64, 20.0).unwrap();
        let f = gaussian(&g);
        assert!(max_diff(&bessel_multiplier_apply(&f, 0.0).unwrap(), &f) < 1e-13);
    }

    #[test]
    fn single_mode_eigenvalue() {
        let g = make_grid(2, 16, 8.0).unwrap();
        let (k1, k2) = (3i64, -2i64);
        let xi = [k1 as f64 * g.dxi(), k2 as f64 * g.dxi()];
        let mode = sample(&g, Side::Physical, |x| Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1])).unwrap();
        let gamma = 1.7;
        let out = bessel_multiplier_apply(&mode, gamma).unwrap();
        let lambda = (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).powf(gamma / 2.0);
        assert!(max_diff(&out, &mode.scale(c(lambda)).unwrap()) < 1e-12 * lambda);
    }

    #[test]
    fn gamma_two_matches_finite_differences() {
        let g = make_grid(1, 256, 40.0).unwrap();
        let f = gaussian(&g);
        let out = bessel_multiplier_apply(&f, 2.0).unwrap();
        // f - f'' with an eighth-order central difference away from the boundary
        let h = g.dx();
        let v = f.values();
        let w = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        let mut err: f64 = 0.0;
        for j in 4..g.n() - 4 {
            let mut d2 = v[j] * w[0];
            for m in 1..5 {
                d2 += (v[j + m] + v[j - m]) * w[m];
            }
            let d2 = d2 / (h * h);
            err = err.max((out.values()[j] - (v[j] - d2)).norm());
        }
        assert!(err < 1e-6, "{err}");
        // the exact value (2 - x^2) e^{-x^2/2}
        let exact = sample(&g, Side::Physical, |x| c((2.0 - x[0] * x[0]) * (-x[0] * x[0] / 2.0).exp())).unwrap();
        assert!(max_diff(&out, &exact) < 1e-10);
    }

    #[test]
    fn gaussian_weighted_l2() {
        let g = make_grid(1, 256, 40.0).unwrap();
        let n = inner_norm(&gaussian(&g), &BesselNormSpec::inner(0.0, 2.0, 2.0)).unwrap();
        // \int (1 + x^2)^2 e^{-x^2} dx = sqrt(pi) (1 + 2/2 + 3/4)
        let oracle = (11.0 * PI.sqrt() / 4.0).sqrt();
        assert!((n - oracle).abs() < 1e-8, "{n} vs {oracle}");
    }

    #[test]
    fn trivial_cases() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let zero = Field::zeros(g, Side::Physical);
        assert_eq!(inner_norm(&zero, &BesselNormSpec::inner(1.0, 1.0, 2.0)).unwrap(), 0.0);
        assert_eq!(outer_norm(&zero, &BesselNormSpec::outer(1.0, 1.0, 2.0)).unwrap(), 0.0);
        let f = gaussian(&g);
        let plain = f.lq_norm(3.0);
        assert_eq!(inner_norm(&f, &BesselNormSpec::inner(0.0, 0.0, 3.0)).unwrap(), plain);
        let a = inner_norm(&f, &BesselNormSpec::inner(1.5, 0.0, 3.0)).unwrap();
        let b = outer_norm(&f, &BesselNormSpec::outer(1.5, 0.0, 3.0)).unwrap();
        assert_eq!(a, b);
        assert!(inner_norm(&f, &BesselNormSpec::outer(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn outer_single_mode() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let xi = 4.0 * g.dxi();
        let mode = sample(&g, Side::Physical, |x| Complex64::from_polar(1.0, xi * x[0])).unwrap();
        for q in [1.0, 2.0, f64::INFINITY] {
            let n = outer_norm(&mode, &BesselNormSpec::outer(-1.3, 0.0, q)).unwrap();
            let oracle = (1.0 + xi * xi).powf(-1.3 / 2.0) * mode.lq_norm(q);
            assert!((n - oracle).abs() < 1e-12 * oracle);
        }
    }

    #[test]
    fn trajectory_norm_constant_in_time() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let f = gaussian(&g);
        let spec = BesselNormSpec::inner(0.0, 0.0, 2.0).with_time_exponent(2.0);
        let times = [0.0, 0.5, 1.0, 2.0];
        let fields = vec![f.clone(); 4];
        let n = trajectory_norm(&times, &fields, &spec, |_| 1.0).unwrap();
        assert!((n - f.lq_norm(2.0) * 2f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn multipliers_compose(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in 0u64..1000) {
            let g = make_grid(1, 32, 10.0).unwrap();
            let f = random_field(&g, 3.0, seed);
            let two = bessel_multiplier_apply(&bessel_multiplier_apply(&f, a).unwrap(), b).unwrap();
            let one = bessel_multiplier_apply(&f, a + b).unwrap();
            prop_assert!(max_diff(&two, &one) <= 1e-10 * one.max_abs().max(1.0));
        }
    }
}
