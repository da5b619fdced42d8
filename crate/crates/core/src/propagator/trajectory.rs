use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

use super::{DuhamelSpec, LogComplex, MATERIALIZE_LIMIT};
use crate::error::Result;
use crate::quadrature::QuadratureSpec;
use crate::spectral::{write_field, Field, Side, SpectralGrid};

/// One stored time level: `exp(log u_hat - shift)` on every mode plus the
/// modes whose unshifted magnitude cannot be materialized.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub shift: f64,
    pub values: Field,
    pub overflowed: Vec<bool>,
    /// `max_k Re \int_0^t psi(r, xi_k) dr`.
    pub max_re_exponent: f64,
    /// Largest time-quadrature error estimate over modes.
    pub quad_error: f64,
}

impl Snapshot {
    pub(crate) fn from_log_values(grid: SpectralGrid, t: f64, logs: &[LogComplex], max_re_exponent: f64, quad_error: f64) -> Result<Self> {
        let top = logs
            .iter()
            .map(LogComplex::log_mag)
            .filter(|l| l.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = if top > MATERIALIZE_LIMIT { top - MATERIALIZE_LIMIT } else { 0.0 };
        let values = logs.iter().map(|l| l.scaled(shift)).collect();
        let overflowed = logs.iter().map(|l| !l.is_materializable()).collect();
        Ok(Self {
            t,
            shift,
            values: Field::new(grid, Side::Frequency, values)?,
            overflowed,
            max_re_exponent,
            quad_error,
        })
    }

    pub fn overflow_count(&self) -> usize {
        self.overflowed.iter().filter(|&&m| m).count()
    }
}

/// Frequency-side solution at the requested times.
///
/// The per-mode [`LogComplex`] values are authoritative; snapshots hold the
/// shifted `f64` view used for norms and dumps.
#[derive(Debug, Clone)]
pub struct SolutionTrajectory {
    pub(crate) grid: SpectralGrid,
    pub(crate) log_values: Vec<Vec<LogComplex>>,
    pub(crate) snapshots: Vec<Snapshot>,
    pub(crate) symbol: Value,
    pub(crate) quad: QuadratureSpec,
    pub(crate) duhamel: DuhamelSpec,
    pub(crate) dropped_modes: usize,
}

impl SolutionTrajectory {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, j: usize) -> &Snapshot {
        &self.snapshots[j]
    }

    pub fn log_values(&self, j: usize) -> &[LogComplex] {
        &self.log_values[j]
    }

    /// True values at time index `j`; overflowed modes are set to 0.
    pub fn materialized(&self, j: usize) -> Result<Field> {
        let snap = &self.snapshots[j];
        let values = self.log_values[j]
            .iter()
            .zip(&snap.overflowed)
            .map(|(l, &masked)| if masked { Default::default() } else { l.scaled(0.0) })
            .collect();
        Field::new(self.grid, Side::Frequency, values)
    }

    pub fn overflow_counts(&self) -> Vec<usize> {
        self.snapshots.iter().map(Snapshot::overflow_count).collect()
    }

    pub fn any_overflow(&self) -> bool {
        self.snapshots.iter().any(|s| s.overflow_count() > 0)
    }

    /// Modes where a vanishing log argument was dropped by the zero-mode policy.
    pub fn dropped_modes(&self) -> usize {
        self.dropped_modes
    }

    pub fn symbol_descriptor(&self) -> &Value {
        &self.symbol
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn duhamel(&self) -> &DuhamelSpec {
        &self.duhamel
    }

    pub fn manifest(&self) -> Value {
        json!({
            "grid": self.grid,
            "times": self.times(),
            "symbol": self.symbol,
            "quadrature": self.quad,
            "duhamel": self.duhamel,
            "shifts": self.snapshots.iter().map(|s| s.shift).collect::<Vec<_>>(),
            "overflow_counts": self.overflow_counts(),
            "max_re_exponent": self.snapshots.iter().map(|s| s.max_re_exponent).collect::<Vec<_>>(),
            "quad_error": self.snapshots.iter().map(|s| s.quad_error).collect::<Vec<_>>(),
            "dropped_modes": self.dropped_modes,
        })
    }
}

/// Writes one shifted field file per time plus `trajectory.json`; returns all paths written.
pub fn write_trajectory(dir: impl AsRef<Path>, traj: &SolutionTrajectory) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (j, snap) in traj.snapshots.iter().enumerate() {
        let name = format!("u_hat_{j:04}.field");
        let path = dir.join(&name);
        write_field(&path, &snap.values)?;
        files.push(name);
        written.push(path);
    }
    let mut manifest = traj.manifest();
    manifest["files"] = json!(files);
    let path = dir.join("trajectory.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    written.push(path);
    Ok(written)
}
