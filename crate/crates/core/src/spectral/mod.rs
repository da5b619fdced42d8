//! Uniform box discretization and the discrete counterpart of the continuous
//! Fourier transform pair
//!
//! ```text
//! F[f](xi)    = (2 pi)^{-d/2} \int e^{-i xi.x} f(x) dx
//! F^-1[g](x)  = (2 pi)^{-d/2} \int e^{+i x.xi} g(xi) dxi
//! ```
//!
//! Physical points are `x_j = (j - n/2) dx` and frequencies `xi_k = (k - n/2) dxi`
//! per axis, both stored in natural (monotone) order. Values are row-major with
//! axis 0 slowest.

mod field;
mod io;
mod transform;

pub use field::{lq_norm, sample, Field, Side};
pub use io::{read_field, write_field, write_field_csv, FIELD_MAGIC};
pub use transform::{forward_transform, inverse_transform};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Coordinates of a lattice point; only the first `dim` entries are meaningful.
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    extent: f64,
}

/// Builds a grid after validating the dimension, size and extent.
pub fn make_grid(dim: usize, n: usize, extent: f64) -> Result<SpectralGrid> {
    SpectralGrid::new(dim, n, extent)
}

impl SpectralGrid {
    pub fn new(dim: usize, n: usize, extent: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDim(dim));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::OddSize(n));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::BadExtent(extent));
        }
        Ok(Self { dim, n, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.extent
    }

    /// Number of lattice points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest frequency radius representable on every axis, `(n/2) dxi`.
    pub fn r_grid(&self) -> f64 {
        (self.n / 2) as f64 * self.dxi()
    }

    /// Physical quadrature weight `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Frequency quadrature weight `dxi^d`.
    pub fn frequency_cell_volume(&self) -> f64 {
        self.dxi().powi(self.dim as i32)
    }

    /// The grid whose physical lattice is this grid's frequency lattice.
    ///
    /// Treating a frequency-side field as a physical field on the dual grid lets
    /// every physical-side operation (Bessel multipliers, weights, norms) act on
    /// Fourier transforms directly.
    pub fn dual(&self) -> SpectralGrid {
        SpectralGrid {
            dim: self.dim,
            n: self.n,
            extent: self.n as f64 * self.dxi(),
        }
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + i)
    }

    /// Signed lattice offsets `k - n/2` per axis.
    pub fn lattice_offsets(&self, flat: usize) -> [i64; 3] {
        let idx = self.multi_index(flat);
        let half = (self.n / 2) as i64;
        let mut out = [0i64; 3];
        for axis in 0..self.dim {
            out[axis] = idx[axis] as i64 - half;
        }
        out
    }

    /// Flat index of the lattice point with signed offsets `offsets`, if on the grid.
    pub fn index_of_offsets(&self, offsets: &[i64]) -> Option<usize> {
        if offsets.len() != self.dim {
            return None;
        }
        let half = (self.n / 2) as i64;
        let mut idx = [0usize; 3];
        for (axis, &k) in offsets.iter().enumerate() {
            let shifted = k + half;
            if shifted < 0 || shifted >= self.n as i64 {
                return None;
            }
            idx[axis] = shifted as usize;
        }
        Some(self.flat_index(&idx[..self.dim]))
    }

    pub fn position(&self, flat: usize) -> Point {
        self.scaled_offsets(flat, self.dx())
    }

    pub fn frequency(&self, flat: usize) -> Point {
        self.scaled_offsets(flat, self.dxi())
    }

    pub fn frequency_norm_sq(&self, flat: usize) -> f64 {
        let xi = self.frequency(flat);
        xi[..self.dim].iter().map(|v| v * v).sum()
    }

    pub fn position_norm_sq(&self, flat: usize) -> f64 {
        let x = self.position(flat);
        x[..self.dim].iter().map(|v| v * v).sum()
    }

    /// Index of the zero frequency (also the physical origin).
    pub fn origin_index(&self) -> usize {
        let half = self.n / 2;
        self.flat_index(&[half, half, half][..self.dim])
    }

    /// Flat indices of lattice frequencies strictly inside the open ball `B_R`.
    pub fn ball_modes(&self, radius: f64) -> Result<Vec<usize>> {
        self.check_radius(radius)?;
        let r2 = radius * radius;
        Ok((0..self.len())
            .filter(|&k| self.frequency_norm_sq(k) < r2)
            .collect())
    }

    pub fn check_radius(&self, radius: f64) -> Result<()> {
        if !(radius >= 0.0) || radius > self.r_grid() * (1.0 + 1e-12) {
            return Err(Error::RadiusExceedsGrid {
                radius,
                grid_radius: self.r_grid(),
            });
        }
        Ok(())
    }

    fn scaled_offsets(&self, flat: usize, step: f64) -> Point {
        let off = self.lattice_offsets(flat);
        let mut p = [0.0; 3];
        for axis in 0..self.dim {
            p[axis] = off[axis] as f64 * step;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_grid_arithmetic() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        assert!((g.dx() - PI / 4.0).abs() < 1e-15);
        assert!((g.dxi() - 1.0).abs() < 1e-15);
        let xis: Vec<f64> = (0..8).map(|k| g.frequency(k)[0]).collect();
        assert_eq!(xis, vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert!((g.dx() * g.dxi() * g.n() as f64 - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_grid_radius() {
        let g = make_grid(2, 4, 4.0 * PI).unwrap();
        assert!((g.dxi() - 0.5).abs() < 1e-15);
        assert!((g.r_grid() - 1.0).abs() < 1e-15);
        assert_eq!(g.len(), 16);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_grid(1, 7, 1.0), Err(Error::OddSize(7))));
        assert!(matches!(make_grid(1, 2, 1.0), Err(Error::OddSize(2))));
        assert!(matches!(make_grid(4, 8, 1.0), Err(Error::BadDim(4))));
        assert!(matches!(make_grid(0, 8, 1.0), Err(Error::BadDim(0))));
        assert!(matches!(make_grid(1, 8, -1.0), Err(Error::BadExtent(_))));
    }

    #[test]
    fn index_roundtrip_and_origin() {
        let g = make_grid(3, 6, 3.0).unwrap();
        for flat in [0, 17, 100, g.len() - 1] {
            let idx = g.multi_index(flat);
            assert_eq!(g.flat_index(&idx[..3]), flat);
            let off = g.lattice_offsets(flat);
            assert_eq!(g.index_of_offsets(&off[..3]), Some(flat));
        }
        assert_eq!(g.frequency_norm_sq(g.origin_index()), 0.0);
    }

    #[test]
    fn ball_is_open_and_checked() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        let ball = g.ball_modes(2.0).unwrap();
        let xis: Vec<f64> = ball.iter().map(|&k| g.frequency(k)[0]).collect();
        assert_eq!(xis, vec![-1.0, 0.0, 1.0]);
        assert!(matches!(
            g.ball_modes(4.5),
            Err(Error::RadiusExceedsGrid { .. })
        ));
    }

    #[test]
    fn dual_grid_swaps_lattices() {
        let g = make_grid(2, 16, 5.0).unwrap();
        let d = g.dual();
        assert!((d.dx() - g.dxi()).abs() < 1e-14);
        assert!((d.dxi() - g.dx()).abs() < 1e-14);
    }
}
