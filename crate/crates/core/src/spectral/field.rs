use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Point, SpectralGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Physical,
    Frequency,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Physical => "physical",
            Side::Frequency => "frequency",
        }
    }

    pub(crate) fn flag(self) -> u32 {
        match self {
            Side::Physical => 0,
            Side::Frequency => 1,
        }
    }

    pub(crate) fn from_flag(flag: u32) -> Option<Side> {
        match flag {
            0 => Some(Side::Physical),
            1 => Some(Side::Frequency),
            _ => None,
        }
    }
}

/// Complex samples on every lattice point of a grid, tagged with the side
/// (physical `x` or frequency `xi`) they live on.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpectralGrid,
    side: Side,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: SpectralGrid, side: Side, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, side, values })
    }

    pub fn zeros(grid: SpectralGrid, side: Side) -> Self {
        Self {
            grid,
            side,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Field with value `value` at the single lattice point `flat`.
    pub fn unit(grid: SpectralGrid, side: Side, flat: usize, value: Complex64) -> Self {
        let mut field = Self::zeros(grid, side);
        field.values[flat] = value;
        field
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn expect_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::WrongSide {
                expected: side.name(),
                found: self.side.name(),
            });
        }
        Ok(())
    }

    pub fn expect_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Lattice coordinates of point `flat` on this field's side.
    pub fn coordinate(&self, flat: usize) -> Point {
        match self.side {
            Side::Physical => self.grid.position(flat),
            Side::Frequency => self.grid.frequency(flat),
        }
    }

    /// Quadrature weight of a single lattice cell on this field's side.
    pub fn cell_volume(&self) -> f64 {
        match self.side {
            Side::Physical => self.grid.cell_volume(),
            Side::Frequency => self.grid.frequency_cell_volume(),
        }
    }

    /// Pointwise map, preserving grid and side. Fails if the result is not finite.
    pub fn map(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Result<Field> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k, v))
            .collect();
        Field::new(self.grid, self.side, values)
    }

    pub fn scale(&self, factor: Complex64) -> Result<Field> {
        self.map(|_, v| v * factor)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: Complex64, other: &Field, beta: Complex64) -> Result<Field> {
        self.expect_same_grid(other)?;
        other.expect_side(self.side)?;
        self.map(|k, v| alpha * v + beta * other.values[k])
    }

    /// Reinterprets a frequency-side field as a physical field on the dual grid.
    pub fn as_dual_physical(&self) -> Result<Field> {
        self.expect_side(Side::Frequency)?;
        Ok(Field {
            grid: self.grid.dual(),
            side: Side::Physical,
            values: self.values.clone(),
        })
    }

    /// Discrete `L_q` norm with cell-volume weights; `q = inf` is the lattice max.
    pub fn lq_norm(&self, q: f64) -> f64 {
        lq_norm(&self.values, self.cell_volume(), q)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Weighted lattice `L_q` norm of complex samples.
pub fn lq_norm(values: &[Complex64], cell_volume: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|v| (v.norm() / scale).powf(q)).sum();
    scale * (sum * cell_volume).powf(1.0 / q)
}

/// Samples `g` at every lattice point of the requested side.
pub fn sample(
    grid: &SpectralGrid,
    side: Side,
    g: impl Fn(&[f64]) -> Complex64,
) -> Result<Field> {
    let dim = grid.dim();
    let values = (0..grid.len())
        .map(|k| {
            let p = match side {
                Side::Physical => grid.position(k),
                Side::Frequency => grid.frequency(k),
            };
            g(&p[..dim])
        })
        .collect();
    Field::new(*grid, side, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn sample_zero_function() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let f = sample(&g, Side::Physical, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert!(f.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn sample_squared_frequency_spot_value() {
        let g = make_grid(2, 8, 2.0 * PI).unwrap();
        let f = sample(&g, Side::Frequency, |xi| {
            Complex64::new(xi.iter().map(|v| v * v).sum(), 0.0)
        })
        .unwrap();
        let k = g.index_of_offsets(&[1, 1]).unwrap();
        assert!((f.values()[k].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sample_with_pole_is_rejected() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        let r = sample(&g, Side::Physical, |x| Complex64::new(1.0 / x[0], 0.0));
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn lq_norm_of_constant() {
        let vals = vec![Complex64::new(2.0, 0.0); 10];
        assert!((lq_norm(&vals, 0.1, 1.0) - 2.0).abs() < 1e-14);
        assert!((lq_norm(&vals, 0.1, 2.0) - 2.0).abs() < 1e-14);
        assert_eq!(lq_norm(&vals, 0.1, f64::INFINITY), 2.0);
    }
}
