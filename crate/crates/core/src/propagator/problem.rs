use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, MAX_GAUSS_ORDER};
use crate::spectral::{Field, Side, SpectralGrid};
use crate::symbols::Symbol;

/// What to do where a symbol cannot be evaluated because its logarithm
/// argument vanishes (the `xi = 0` mode of `log(-Laplacian)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModePolicy {
    /// Treat `psi` as `0` there.
    #[default]
    Drop,
    Error,
}

pub type ForcingFn = Arc<dyn Fn(f64, &[f64]) -> Complex64 + Send + Sync>;

/// Frequency-side forcing `F[f(s, .)]`.
#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    None,
    /// Closure in `(s, xi)`.
    Pointwise(ForcingFn),
    /// Fields at increasing times, linearly interpolated in between.
    Tabulated { times: Vec<f64>, fields: Vec<Field> },
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::None => write!(f, "None"),
            Forcing::Pointwise(_) => write!(f, "Pointwise(..)"),
            Forcing::Tabulated { times, .. } => f.debug_struct("Tabulated").field("times", times).finish(),
        }
    }
}

impl Forcing {
    pub fn pointwise(f: impl Fn(f64, &[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Forcing::Pointwise(Arc::new(f))
    }

    pub fn tabulated(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::InvalidArgument(format!(
                "tabulated forcing needs one field per time, got {} times and {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("forcing times must be strictly increasing".into()));
        }
        for f in &fields {
            f.expect_side(Side::Frequency)?;
            fields[0].expect_same_grid(f)?;
        }
        Ok(Forcing::Tabulated { times, fields })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Forcing::None)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Forcing::None => "none",
            Forcing::Pointwise(_) => "pointwise",
            Forcing::Tabulated { .. } => "tabulated",
        }
    }

    /// `F[f(s, .)]` at lattice mode `k` with frequency `xi`.
    pub fn eval(&self, s: f64, k: usize, xi: &[f64]) -> Result<Complex64> {
        match self {
            Forcing::None => Ok(Complex64::new(0.0, 0.0)),
            Forcing::Pointwise(f) => {
                let v = f(s, xi);
                if !v.is_finite() {
                    return Err(Error::NonFinite { index: k });
                }
                Ok(v)
            }
            Forcing::Tabulated { times, fields } => {
                let tol = 1e-12 * times.last().unwrap().abs().max(1.0);
                if s < times[0] - tol || s > times[times.len() - 1] + tol {
                    return Err(Error::InvalidArgument(format!(
                        "forcing requested at s = {s}, tabulated on [{}, {}]",
                        times[0],
                        times[times.len() - 1]
                    )));
                }
                let j = times.partition_point(|&t| t <= s);
                if j == 0 {
                    return Ok(fields[0].values()[k]);
                }
                if j == times.len() {
                    return Ok(fields[j - 1].values()[k]);
                }
                let (t0, t1) = (times[j - 1], times[j]);
                let w = (s - t0) / (t1 - t0);
                Ok(fields[j - 1].values()[k] * (1.0 - w) + fields[j].values()[k] * w)
            }
        }
    }

    /// Whole forcing field at time `s`.
    pub fn field(&self, grid: &SpectralGrid, s: f64) -> Result<Field> {
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|k| self.eval(s, k, &grid.frequency(k)[..d]))
            .collect::<Result<Vec<_>>>()?;
        Field::new(*grid, Side::Frequency, values)
    }
}

/// Problem data `(psi, F[u0], F[f], T)`.
#[derive(Clone)]
pub struct CauchyProblem {
    symbol: Arc<dyn Symbol>,
    u0_hat: Field,
    forcing: Forcing,
    horizon: f64,
    zero_mode: ZeroModePolicy,
}

impl fmt::Debug for CauchyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyProblem")
            .field("symbol", &self.symbol.descriptor())
            .field("grid", self.u0_hat.grid())
            .field("forcing", &self.forcing)
            .field("horizon", &self.horizon)
            .field("zero_mode", &self.zero_mode)
            .finish()
    }
}

impl CauchyProblem {
    pub fn new(symbol: impl Symbol + 'static, u0_hat: Field, horizon: f64) -> Result<Self> {
        Self::from_arc(Arc::new(symbol), u0_hat, horizon)
    }

    pub fn from_arc(symbol: Arc<dyn Symbol>, u0_hat: Field, horizon: f64) -> Result<Self> {
        u0_hat.expect_side(Side::Frequency)?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if let Some(d) = symbol.dim() {
            if d != u0_hat.grid().dim() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: u0_hat.grid().dim(),
                });
            }
        }
        Ok(Self {
            symbol,
            u0_hat,
            forcing: Forcing::None,
            horizon,
            zero_mode: ZeroModePolicy::default(),
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Result<Self> {
        if let Forcing::Tabulated { fields, .. } = &forcing {
            fields[0].expect_same_grid(&self.u0_hat)?;
        }
        self.forcing = forcing;
        Ok(self)
    }

    pub fn with_zero_mode(mut self, policy: ZeroModePolicy) -> Self {
        self.zero_mode = policy;
        self
    }

    pub fn symbol(&self) -> &dyn Symbol {
        self.symbol.as_ref()
    }

    pub fn symbol_arc(&self) -> Arc<dyn Symbol> {
        Arc::clone(&self.symbol)
    }

    pub fn u0_hat(&self) -> &Field {
        &self.u0_hat
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.u0_hat.grid()
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn zero_mode(&self) -> ZeroModePolicy {
        self.zero_mode
    }
}

/// Time mesh for the Duhamel integral, covering `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeMesh {
    Uniform { steps: usize },
    Nodes { nodes: Vec<f64> },
}

/// Composite rule applied on every mesh interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeRule {
    Trapezoid,
    Simpson,
    GaussLegendre { order: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelSpec {
    pub mesh: TimeMesh,
    pub rule: TimeRule,
}

impl Default for DuhamelSpec {
    /// Trapezoid on 64 uniform steps.
    fn default() -> Self {
        Self::uniform(64, TimeRule::Trapezoid)
    }
}

impl DuhamelSpec {
    pub fn uniform(steps: usize, rule: TimeRule) -> Self {
        Self {
            mesh: TimeMesh::Uniform { steps },
            rule,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.mesh {
            TimeMesh::Uniform { steps } if *steps == 0 => {
                return Err(Error::InvalidArgument("time mesh needs at least one step".into()))
            }
            TimeMesh::Nodes { nodes } if nodes.iter().any(|t| !t.is_finite() || *t < 0.0) => {
                return Err(Error::InvalidArgument("time mesh nodes must be finite and nonnegative".into()))
            }
            _ => {}
        }
        if let TimeRule::GaussLegendre { order } = self.rule {
            if !(1..=MAX_GAUSS_ORDER).contains(&order) {
                return Err(Error::InvalidArgument(format!("Gauss-Legendre order {order} unsupported")));
            }
        }
        Ok(())
    }

    /// Sorted mesh nodes on `[0, horizon]`, always starting at 0.
    pub fn mesh_nodes(&self, horizon: f64) -> Vec<f64> {
        let mut nodes = match &self.mesh {
            TimeMesh::Uniform { steps } => (0..=*steps).map(|i| horizon * i as f64 / *steps as f64).collect(),
            TimeMesh::Nodes { nodes } => {
                let mut v: Vec<f64> = nodes.iter().copied().filter(|&t| t <= horizon).collect();
                v.push(0.0);
                v
            }
        };
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        nodes
    }

    /// Interval endpoints used for the Duhamel integral up to `t`: the mesh
    /// nodes strictly below `t`, then `t`.
    pub fn breakpoints(&self, horizon: f64, t: f64) -> Vec<f64> {
        let tol = 1e-12 * horizon;
        let mut pts: Vec<f64> = self.mesh_nodes(horizon).into_iter().filter(|&m| m < t - tol).collect();
        if pts.is_empty() {
            pts.push(0.0);
        }
        pts.push(t);
        pts
    }

    /// Nodes and weights of the composite rule over `breakpoints(horizon, t)`.
    pub fn nodes(&self, horizon: f64, t: f64) -> Vec<(f64, f64)> {
        let bps = self.breakpoints(horizon, t);
        let mut out: Vec<(f64, f64)> = Vec::new();
        let push = |x: f64, w: f64, out: &mut Vec<(f64, f64)>| match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        };
        for pair in bps.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let h = b - a;
            match self.rule {
                TimeRule::Trapezoid => {
                    push(a, h / 2.0, &mut out);
                    push(b, h / 2.0, &mut out);
                }
                TimeRule::Simpson => {
                    push(a, h / 6.0, &mut out);
                    push(0.5 * (a + b), 2.0 * h / 3.0, &mut out);
                    push(b, h / 6.0, &mut out);
                }
                TimeRule::GaussLegendre { order } => {
                    for &(x, w) in gauss_legendre(order) {
                        push(0.5 * (a + b) + 0.5 * h * x, 0.5 * h * w, &mut out);
                    }
                }
            }
        }
        out
    }

    /// Total number of Duhamel nodes needed for `times`.
    pub fn node_count(&self, horizon: f64, times: &[f64]) -> usize {
        times.iter().map(|&t| self.nodes(horizon, t).len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use crate::symbols::SecondOrderSymbol;

    #[test]
    fn trapezoid_nodes_integrate_linear_exactly() {
        let spec = DuhamelSpec::uniform(4, TimeRule::Trapezoid);
        let nodes = spec.nodes(1.0, 0.6);
        // breakpoints 0, .25, .5, .6
        assert_eq!(nodes.len(), 4);
        let integral: f64 = nodes.iter().map(|(s, w)| w * (2.0 * s + 1.0)).sum();
        assert!((integral - (0.36 + 0.6)).abs() < 1e-15);
    }

    #[test]
    fn requested_time_on_mesh_is_not_duplicated() {
        let spec = DuhamelSpec::uniform(64, TimeRule::Trapezoid);
        assert_eq!(spec.breakpoints(1.0, 0.5).len(), 33);
        assert_eq!(spec.breakpoints(1.0, 1e-3), vec![0.0, 1e-3]);
    }

    #[test]
    fn simpson_and_gauss_exactness() {
        let cubic = |s: f64| s * s * s;
        for rule in [TimeRule::Simpson, TimeRule::GaussLegendre { order: 2 }] {
            let spec = DuhamelSpec::uniform(3, rule);
            let v: f64 = spec.nodes(1.0, 1.0).iter().map(|(s, w)| w * cubic(*s)).sum();
            assert!((v - 0.25).abs() < 1e-15, "{rule:?}");
        }
    }

    #[test]
    fn tabulated_forcing_interpolates() {
        let g = make_grid(1, 4, 1.0).unwrap();
        let a = Field::zeros(g, Side::Frequency);
        let b = Field::unit(g, Side::Frequency, 1, Complex64::new(2.0, 0.0));
        let f = Forcing::tabulated(vec![0.0, 1.0], vec![a, b]).unwrap();
        assert_eq!(f.eval(0.25, 1, &[0.0]).unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(f.eval(1.0, 1, &[0.0]).unwrap(), Complex64::new(2.0, 0.0));
        assert!(f.eval(1.5, 1, &[0.0]).is_err());
    }

    #[test]
    fn problem_validation() {
        let g = make_grid(2, 4, 1.0).unwrap();
        let heat1 = SecondOrderSymbol::heat(1).unwrap();
        assert!(matches!(
            CauchyProblem::new(heat1, Field::zeros(g, Side::Frequency), 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        let heat2 = SecondOrderSymbol::heat(2).unwrap();
        assert!(CauchyProblem::new(heat2.clone(), Field::zeros(g, Side::Physical), 1.0).is_err());
        assert!(CauchyProblem::new(heat2, Field::zeros(g, Side::Frequency), 0.0).is_err());
    }
}
