//! Residual checks of computed solutions: the integrated frequency equation,
//! the weak formulation against band-limited bump test functions, and the gap
//! between two solutions of the same problem.

mod residuals;

pub use residuals::{gronwall_gap, representation_residual, weak_form_residual};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{Field, Side, SpectralGrid};

/// `phi` with `F[phi]` the mollifier bump
/// `exp(-1 / (1 - |(xi - c) / r0|^2))` inside `|xi - c| < r0`, zero outside.
#[derive(Debug, Clone)]
pub struct TestFunction {
    hat: Field,
    radius: f64,
    center: Vec<f64>,
}

impl TestFunction {
    /// Bump of radius `r0` centred at the origin.
    pub fn bump(grid: &SpectralGrid, r0: f64) -> Result<Self> {
        Self::bump_at(grid, &vec![0.0; grid.dim()], r0)
    }

    /// Bump of radius `r0` centred at `center`; the support must lie strictly
    /// inside the grid's frequency ball.
    pub fn bump_at(grid: &SpectralGrid, center: &[f64], r0: f64) -> Result<Self> {
        if center.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: center.len() });
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidArgument(format!("bump radius must be positive, got {r0}")));
        }
        let reach = r0 + center.iter().map(|c| c * c).sum::<f64>().sqrt();
        if reach >= grid.r_grid() {
            return Err(Error::SupportExceedsGrid { support: reach, grid_radius: grid.r_grid() });
        }
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|k| {
                let xi = grid.frequency(k);
                let s = (0..d).map(|i| (xi[i] - center[i]).powi(2)).sum::<f64>() / (r0 * r0);
                if s < 1.0 {
                    Complex64::new((-1.0 / (1.0 - s)).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(Self {
            hat: Field::new(*grid, Side::Frequency, values)?,
            radius: r0,
            center: center.to_vec(),
        })
    }

    /// Bumps of radius `r0, r0/2, ...` (`count` of them).
    pub fn shrinking(grid: &SpectralGrid, r0: f64, count: usize) -> Result<Vec<Self>> {
        (0..count).map(|i| Self::bump(grid, r0 / f64::powi(2.0, i as i32))).collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Ok(Self {
            hat: self.hat.scale(Complex64::new(factor, 0.0))?,
            radius: self.radius,
            center: self.center.clone(),
        })
    }

    pub fn hat(&self) -> &Field {
        &self.hat
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// `\int |F[phi]| dxi` on the lattice.
    pub fn l1_mass(&self) -> f64 {
        self.hat.lq_norm(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResidualKind {
    Representation,
    WeakForm,
    GronwallGap,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub kind: ResidualKind,
    pub times: Vec<f64>,
    /// Residual norm per time (nonnegative).
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Modes excluded because they overflowed at some stored time.
    pub masked_modes: usize,
    /// Description of the time meshes involved.
    pub meshes: Value,
    /// Extra per-time series, e.g. the Gronwall growth factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl ResidualReport {
    pub(crate) fn new(kind: ResidualKind, times: Vec<f64>, residuals: Vec<f64>, masked_modes: usize, meshes: Value) -> Self {
        let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
        Self {
            kind,
            times,
            residuals,
            max_residual,
            masked_modes,
            meshes,
            bound: None,
            threshold: None,
            passed: None,
        }
    }

    /// Sets a pass threshold on `max_residual`.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self.passed = Some(self.max_residual <= threshold);
        self
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// `t,residual` rows with a header.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = fs::File::create(path)?;
        writeln!(out, "t,residual")?;
        for (t, r) in self.times.iter().zip(&self.residuals) {
            writeln!(out, "{t:e},{r:e}")?;
        }
        Ok(())
    }
}

/// Error-versus-step table with successive ratios and observed orders
/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementTable {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub ratios: Vec<f64>,
    pub orders: Vec<f64>,
}

impl RefinementTable {
    pub fn new(steps: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        if steps.len() != errors.len() || steps.len() < 2 {
            return Err(Error::InvalidArgument("refinement table needs at least two matching rows".into()));
        }
        let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
        let orders = ratios
            .iter()
            .zip(steps.windows(2))
            .map(|(r, h)| r.ln() / (h[0] / h[1]).ln())
            .collect();
        Ok(Self { steps, errors, ratios, orders })
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("table serializes")
    }

    /// `dt,error,ratio,order` rows; the first row has empty ratio and order.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = fs::File::create(path)?;
        writeln!(out, "dt,error,ratio,order")?;
        for i in 0..self.steps.len() {
            if i == 0 {
                writeln!(out, "{:e},{:e},,", self.steps[0], self.errors[0])?;
            } else {
                writeln!(
                    out,
                    "{:e},{:e},{:e},{:e}",
                    self.steps[i],
                    self.errors[i],
                    self.ratios[i - 1],
                    self.orders[i - 1]
                )?;
            }
        }
        Ok(())
    }
}
