use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use std::f64::consts::PI;

use super::{Field, Side, SpectralGrid};
use crate::error::Result;

/// Riemann-sum approximation of the continuous Fourier transform,
/// `v(xi_k) = dx^d (2 pi)^{-d/2} sum_j e^{-i xi_k . x_j} f(x_j)`.
pub fn forward_transform(f: &Field) -> Result<Field> {
    f.expect_side(Side::Physical)?;
    let grid = *f.grid();
    let prefactor = grid.cell_volume() * (2.0 * PI).powf(-(grid.dim() as f64) / 2.0);
    let values = transform(&grid, f.values(), FftDirection::Forward, prefactor);
    Field::new(grid, Side::Frequency, values)
}

/// Inverse of [`forward_transform`] with prefactor `dxi^d (2 pi)^{-d/2}` and
/// kernel `e^{+i x_j . xi_k}`.
pub fn inverse_transform(v: &Field) -> Result<Field> {
    v.expect_side(Side::Frequency)?;
    let grid = *v.grid();
    let prefactor =
        grid.frequency_cell_volume() * (2.0 * PI).powf(-(grid.dim() as f64) / 2.0);
    let values = transform(&grid, v.values(), FftDirection::Inverse, prefactor);
    Field::new(grid, Side::Physical, values)
}

fn transform(
    grid: &SpectralGrid,
    input: &[Complex64],
    direction: FftDirection,
    prefactor: f64,
) -> Vec<Complex64> {
    // Natural order (offsets -n/2..n/2-1) maps to FFT order by a rotation of
    // n/2 along every axis; for even n the rotation is its own inverse.
    let mut data = half_rotate(grid, input);
    let n = grid.n();
    let fft = FftPlanner::<f64>::new().plan_fft(n, direction);
    let mut lane = vec![Complex64::new(0.0, 0.0); n];
    let len = grid.len();
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        for start in 0..len {
            // lane starts are the indices whose coordinate along `axis` is zero
            if (start / stride) % n != 0 {
                continue;
            }
            for (i, slot) in lane.iter_mut().enumerate() {
                *slot = data[start + i * stride];
            }
            fft.process(&mut lane);
            for (i, value) in lane.iter().enumerate() {
                data[start + i * stride] = *value;
            }
        }
    }
    let mut out = half_rotate(grid, &data);
    for v in out.iter_mut() {
        *v *= prefactor;
    }
    out
}

fn half_rotate(grid: &SpectralGrid, input: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n();
    let half = n / 2;
    let dim = grid.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for (flat, value) in input.iter().enumerate() {
        let idx = grid.multi_index(flat);
        let mut target = [0usize; 3];
        for axis in 0..dim {
            target[axis] = (idx[axis] + half) % n;
        }
        out[grid.flat_index(&target[..dim])] = *value;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, sample};

    /// Direct O(N^2) evaluation of the forward sum, independent of the FFT path.
    fn direct_forward(f: &Field) -> Vec<Complex64> {
        let g = f.grid();
        let d = g.dim();
        let pre = g.cell_volume() * (2.0 * PI).powf(-(d as f64) / 2.0);
        (0..g.len())
            .map(|k| {
                let xi = g.frequency(k);
                let sum: Complex64 = (0..g.len())
                    .map(|j| {
                        let x = g.position(j);
                        let phase: f64 = (0..d).map(|a| xi[a] * x[a]).sum();
                        Complex64::from_polar(1.0, -phase) * f.values()[j]
                    })
                    .sum();
                sum * pre
            })
            .collect()
    }

    #[test]
    fn constant_one_transforms_to_scaled_delta() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        let f = sample(&g, Side::Physical, |_| Complex64::new(1.0, 0.0)).unwrap();
        let v = forward_transform(&f).unwrap();
        let direct = direct_forward(&f);
        let zero = g.origin_index();
        for k in 0..g.len() {
            assert!((v.values()[k] - direct[k]).norm() < 1e-13);
            let expected = if k == zero { (2.0 * PI).sqrt() } else { 0.0 };
            assert!((v.values()[k].re - expected).abs() < 1e-13);
            assert!(v.values()[k].im.abs() < 1e-13);
        }
    }

    #[test]
    fn fft_path_matches_direct_sum_in_2d() {
        let g = make_grid(2, 8, 3.0).unwrap();
        let f = sample(&g, Side::Physical, |x| {
            Complex64::new((x[0] - 0.3 * x[1]).cos(), x[1].sin() * x[0])
        })
        .unwrap();
        let v = forward_transform(&f).unwrap();
        for (a, b) in v.values().iter().zip(direct_forward(&f)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = make_grid(1, 512, 40.0).unwrap();
        let f = sample(&g, Side::Physical, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0))
            .unwrap();
        let v = forward_transform(&f).unwrap();
        for k in 0..g.len() {
            let xi = g.frequency(k)[0];
            assert!((v.values()[k] - Complex64::new((-xi * xi / 2.0).exp(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_constant_has_unit_mass() {
        for dim in 1..=3 {
            let g = make_grid(dim, 8, 5.0).unwrap();
            let c = (2.0 * PI).powf(-(dim as f64) / 2.0);
            let v = sample(&g, Side::Frequency, |_| Complex64::new(c, 0.0)).unwrap();
            let u = inverse_transform(&v).unwrap();
            let mass: Complex64 = u.values().iter().sum::<Complex64>() * g.cell_volume();
            assert!((mass - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = make_grid(2, 8, 1.0).unwrap();
        let v = Field::zeros(g, Side::Frequency);
        let u = inverse_transform(&v).unwrap();
        assert!(u.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn side_is_enforced() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let v = Field::zeros(g, Side::Frequency);
        assert!(forward_transform(&v).is_err());
        assert!(inverse_transform(&Field::zeros(g, Side::Physical)).is_err());
    }
}
