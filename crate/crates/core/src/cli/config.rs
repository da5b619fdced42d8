//! TOML run configuration and its translation into problem data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::propagator::{CauchyProblem, DuhamelSpec, Forcing, TimeMesh, TimeRule, ZeroModePolicy};
use crate::quadrature::{PanelLayout, QuadratureSpec, Rule};
use crate::spaces::{PropId, PropParams};
use crate::spectral::{read_field, Field, Side, SpectralGrid};
use crate::symbols::{log_symbol, second_order, Coefficient, LogSymbol, PsiExp, SecondOrderSymbol, Symbol, TabulatedSymbol};
use crate::wellposedness::WeightSpec;

/// Schema version accepted by this build.
pub const SPEC_VERSION: u32 = 1;

/// Invalid configuration: parse failures, schema violations and inconsistent
/// combinations. Maps to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec_version: u32,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub grid: GridConfig,
    pub symbol: SymbolConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    /// Output times, strictly increasing in `(0, horizon]`.
    pub times: Vec<f64>,
    /// Problem horizon `T`; defaults to the last output time.
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub duhamel: DuhamelConfig,
    #[serde(default)]
    pub tasks: Vec<TaskConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SecondOrder,
    Log,
    LogLaplacian,
    Tabulated,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SecondOrder => "second_order",
            Family::Log => "log",
            Family::LogLaplacian => "log_laplacian",
            Family::Tabulated => "tabulated",
        }
    }

    pub fn is_log(self) -> bool {
        matches!(self, Family::Log | Family::LogLaplacian)
    }
}

/// A real number or `{ re, im }`.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

/// A constant scalar or a piecewise-constant table `{ breaks, values }`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum CoefficientConfig {
    Constant(Scalar),
    Piecewise { breaks: Vec<f64>, values: Vec<Scalar> },
}

impl CoefficientConfig {
    pub fn build(&self) -> Result<Coefficient, ConfigError> {
        match self {
            CoefficientConfig::Constant(s) => Ok(Coefficient::constant(s.value())),
            CoefficientConfig::Piecewise { breaks, values } => {
                Coefficient::piecewise(breaks.clone(), values.iter().map(|v| v.value()).collect())
                    .map_err(|e| ConfigError(format!("coefficient: {e}")))
            }
        }
    }
}

/// `a = <coefficient>` (isotropic) or a row-major list of `d * d` coefficients.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum MatrixConfig {
    Isotropic(CoefficientConfig),
    Full(Vec<CoefficientConfig>),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiExpConfig {
    AbsSquared,
    QuadraticForm(Vec<CoefficientConfig>),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolConfig {
    pub family: Family,
    #[serde(default)]
    pub zero_mode: ZeroModePolicy,
    /// second_order: diffusion matrix.
    #[serde(default)]
    pub a: Option<MatrixConfig>,
    /// second_order: drift vector.
    #[serde(default)]
    pub b: Option<Vec<CoefficientConfig>>,
    /// second_order: potential.
    #[serde(default)]
    pub c: Option<CoefficientConfig>,
    /// log: prefactor.
    #[serde(default)]
    pub beta: Option<CoefficientConfig>,
    /// log: logarithm argument, `"abs_squared"` or `{ quadratic_form = [...] }`.
    #[serde(default)]
    pub psi_exp: Option<PsiExpConfig>,
    /// tabulated: switch times between tables.
    #[serde(default)]
    pub breaks: Option<Vec<f64>>,
    /// tabulated: frequency-side field files, one more than `breaks`.
    #[serde(default)]
    pub tables: Option<Vec<PathBuf>>,
}

/// Problem symbol built from a config, keeping the concrete family where a
/// task needs it.
#[derive(Debug, Clone)]
pub enum BuiltSymbol {
    SecondOrder(SecondOrderSymbol),
    Log(LogSymbol),
    Tabulated(TabulatedSymbol),
}

impl BuiltSymbol {
    pub fn as_symbol(&self) -> std::sync::Arc<dyn Symbol> {
        match self {
            BuiltSymbol::SecondOrder(s) => std::sync::Arc::new(s.clone()),
            BuiltSymbol::Log(s) => std::sync::Arc::new(s.clone()),
            BuiltSymbol::Tabulated(s) => std::sync::Arc::new(s.clone()),
        }
    }
}

impl SymbolConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let set = |present: bool, key: &str, allowed: &[Family]| {
            if present && !allowed.contains(&self.family) {
                bad(format!("symbol key `{key}` does not apply to family `{}`", self.family.name()))
            } else {
                Ok(())
            }
        };
        set(self.a.is_some(), "a", &[Family::SecondOrder])?;
        set(self.b.is_some(), "b", &[Family::SecondOrder])?;
        set(self.c.is_some(), "c", &[Family::SecondOrder])?;
        set(self.beta.is_some(), "beta", &[Family::Log])?;
        set(self.psi_exp.is_some(), "psi_exp", &[Family::Log])?;
        set(self.breaks.is_some(), "breaks", &[Family::Tabulated])?;
        set(self.tables.is_some(), "tables", &[Family::Tabulated])?;
        match self.family {
            Family::SecondOrder if self.a.is_none() => bad("second_order symbol needs `a`"),
            Family::Tabulated if self.tables.is_none() => bad("tabulated symbol needs `tables`"),
            _ => Ok(()),
        }
    }

    pub fn build(&self, grid: &SpectralGrid, base: &Path) -> Result<BuiltSymbol, ConfigError> {
        self.validate()?;
        let d = grid.dim();
        let err = |e: crate::Error| ConfigError(format!("symbol: {e}"));
        match self.family {
            Family::SecondOrder => {
                let a = match self.a.as_ref().expect("validated") {
                    MatrixConfig::Isotropic(c) => {
                        let c = c.build()?;
                        (0..d * d).map(|k| if k / d == k % d { c.clone() } else { Coefficient::zero() }).collect()
                    }
                    MatrixConfig::Full(list) => list.iter().map(|c| c.build()).collect::<Result<Vec<_>, _>>()?,
                };
                let b = match &self.b {
                    Some(list) => list.iter().map(|c| c.build()).collect::<Result<Vec<_>, _>>()?,
                    None => Vec::new(),
                };
                let c = match &self.c {
                    Some(c) => c.build()?,
                    None => Coefficient::zero(),
                };
                let sym = second_order(a, b, c).map_err(err)?;
                if sym.dim() != Some(d) {
                    return bad(format!("symbol dimension {:?} does not match grid dimension {d}", sym.dim()));
                }
                Ok(BuiltSymbol::SecondOrder(sym))
            }
            Family::LogLaplacian => Ok(BuiltSymbol::Log(crate::symbols::log_laplacian())),
            Family::Log => {
                let beta = match &self.beta {
                    Some(b) => b.build()?,
                    None => Coefficient::constant(Complex64::new(1.0, 0.0)),
                };
                let psi_exp = match &self.psi_exp {
                    None | Some(PsiExpConfig::AbsSquared) => PsiExp::AbsSquared,
                    Some(PsiExpConfig::QuadraticForm(list)) => {
                        if list.len() != d * d {
                            return bad(format!("quadratic_form needs {} entries, got {}", d * d, list.len()));
                        }
                        PsiExp::QuadraticForm {
                            alpha: list.iter().map(|c| c.build()).collect::<Result<Vec<_>, _>>()?,
                        }
                    }
                };
                Ok(BuiltSymbol::Log(log_symbol(beta, psi_exp)))
            }
            Family::Tabulated => {
                let tables = self
                    .tables
                    .as_ref()
                    .expect("validated")
                    .iter()
                    .map(|p| load_field(base, p, grid, Side::Frequency))
                    .collect::<Result<Vec<_>, _>>()?;
                let sym = TabulatedSymbol::new(self.breaks.clone().unwrap_or_default(), tables).map_err(err)?;
                Ok(BuiltSymbol::Tabulated(sym))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialBuiltin {
    /// `exp(-|x|^2 / (2 width^2))`.
    Gaussian,
    /// Unit point mass at the origin, `u0_hat = (2 pi)^{-d/2}`.
    Delta,
    /// `u0_hat = 1` at the lattice mode with integer offsets `mode`, zero elsewhere.
    ModeK,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub builtin: Option<InitialBuiltin>,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub mode: Option<Vec<i64>>,
    /// Field file, physical or frequency side; physical data are transformed.
    #[serde(default)]
    pub file: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            builtin: Some(InitialBuiltin::Gaussian),
            width: 1.0,
            mode: None,
            file: None,
        }
    }
}

fn gaussian_hat(width: f64, dim: usize, xi: &[f64]) -> f64 {
    width.powi(dim as i32) * (-width * width * xi.iter().map(|v| v * v).sum::<f64>() / 2.0).exp()
}

impl InitialConfig {
    pub fn describe(&self) -> String {
        match (&self.builtin, &self.file) {
            (_, Some(f)) => format!("file {}", f.display()),
            (Some(InitialBuiltin::Gaussian), _) => format!("gaussian (width {})", self.width),
            (Some(InitialBuiltin::Delta), _) => "delta".into(),
            (Some(InitialBuiltin::ModeK), _) => format!("mode {:?}", self.mode.clone().unwrap_or_default()),
            (None, None) => "none".into(),
        }
    }

    pub fn build(&self, grid: &SpectralGrid, base: &Path) -> Result<Field, ConfigError> {
        let d = grid.dim();
        match (&self.builtin, &self.file) {
            (Some(_), Some(_)) => bad("initial: give either `builtin` or `file`, not both"),
            (None, None) => bad("initial: one of `builtin` or `file` is required"),
            (None, Some(p)) => {
                let f = load_field_any(base, p, grid)?;
                match f.side() {
                    Side::Frequency => Ok(f),
                    Side::Physical => {
                        crate::spectral::forward_transform(&f).map_err(|e| ConfigError(format!("initial: {e}")))
                    }
                }
            }
            (Some(kind), None) => {
                if !(self.width > 0.0 && self.width.is_finite()) {
                    return bad("initial: width must be positive");
                }
                if *kind != InitialBuiltin::ModeK && self.mode.is_some() {
                    return bad("initial: `mode` only applies to builtin mode_k");
                }
                let err = |e: crate::Error| ConfigError(format!("initial: {e}"));
                match kind {
                    InitialBuiltin::Gaussian => {
                        let w = self.width;
                        crate::spectral::sample(grid, Side::Frequency, |xi| Complex64::new(gaussian_hat(w, d, xi), 0.0))
                            .map_err(err)
                    }
                    InitialBuiltin::Delta => {
                        let v = Complex64::new((2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0), 0.0);
                        Field::new(*grid, Side::Frequency, vec![v; grid.len()]).map_err(err)
                    }
                    InitialBuiltin::ModeK => {
                        let mode = self.mode.as_ref().ok_or_else(|| ConfigError("initial: mode_k needs `mode`".into()))?;
                        if mode.len() != d {
                            return bad(format!("initial: mode has {} offsets, grid dimension is {d}", mode.len()));
                        }
                        let k = grid
                            .index_of_offsets(mode)
                            .ok_or_else(|| ConfigError(format!("initial: mode {mode:?} is not on the lattice")))?;
                        Ok(Field::unit(*grid, Side::Frequency, k, Complex64::new(1.0, 0.0)))
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    None,
    /// `amplitude cos(omega s) exp(-|x|^2 / (2 width^2))`.
    Builtin,
    /// Frequency-side field files at `times`, linearly interpolated.
    Tabulated,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub kind: ForcingKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub files: Option<Vec<PathBuf>>,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            kind: ForcingKind::None,
            amplitude: 1.0,
            width: 1.0,
            omega: 1.0,
            times: None,
            files: None,
        }
    }
}

impl ForcingConfig {
    pub fn describe(&self) -> String {
        match self.kind {
            ForcingKind::None => "none".into(),
            ForcingKind::Builtin => format!(
                "{} cos({} s) gaussian (width {})",
                self.amplitude, self.omega, self.width
            ),
            ForcingKind::Tabulated => format!("tabulated ({} files)", self.files.as_ref().map_or(0, Vec::len)),
        }
    }

    pub fn build(&self, grid: &SpectralGrid, base: &Path) -> Result<Forcing, ConfigError> {
        let tabulated_keys = self.times.is_some() || self.files.is_some();
        match self.kind {
            ForcingKind::None if tabulated_keys => bad("forcing: `times`/`files` need kind = \"tabulated\""),
            ForcingKind::None => Ok(Forcing::None),
            ForcingKind::Builtin if tabulated_keys => bad("forcing: `times`/`files` need kind = \"tabulated\""),
            ForcingKind::Builtin => {
                if !(self.width > 0.0 && self.width.is_finite()) {
                    return bad("forcing: width must be positive");
                }
                let (amp, width, omega, d) = (self.amplitude, self.width, self.omega, grid.dim());
                Ok(Forcing::pointwise(move |s, xi| {
                    Complex64::new(amp * (omega * s).cos() * gaussian_hat(width, d, xi), 0.0)
                }))
            }
            ForcingKind::Tabulated => {
                let (Some(times), Some(files)) = (&self.times, &self.files) else {
                    return bad("forcing: tabulated forcing needs `times` and `files`");
                };
                let fields = files
                    .iter()
                    .map(|p| load_field(base, p, grid, Side::Frequency))
                    .collect::<Result<Vec<_>, _>>()?;
                Forcing::tabulated(times.clone(), fields).map_err(|e| ConfigError(format!("forcing: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default)]
    pub rule: Option<Rule>,
    #[serde(default)]
    pub panels: Option<usize>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub layout: Option<PanelLayout>,
    #[serde(default)]
    pub max_panels: Option<usize>,
}

impl QuadratureConfig {
    pub fn build(&self) -> Result<QuadratureSpec, ConfigError> {
        let d = QuadratureSpec::default();
        let q = QuadratureSpec {
            rule: self.rule.unwrap_or(d.rule),
            panels: self.panels.unwrap_or(d.panels),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            layout: self.layout.unwrap_or(d.layout),
            max_panels: self.max_panels.unwrap_or(d.max_panels),
        };
        q.validate().map_err(|e| ConfigError(format!("quadrature: {e}")))?;
        Ok(q)
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DuhamelConfig {
    /// Uniform steps on `[0, T]` (default 64).
    #[serde(default)]
    pub steps: Option<usize>,
    /// Explicit mesh nodes instead of `steps`.
    #[serde(default)]
    pub nodes: Option<Vec<f64>>,
    #[serde(default)]
    pub rule: Option<TimeRule>,
}

impl DuhamelConfig {
    pub fn build(&self) -> Result<DuhamelSpec, ConfigError> {
        let rule = self.rule.unwrap_or(TimeRule::Trapezoid);
        let mesh = match (&self.steps, &self.nodes) {
            (Some(_), Some(_)) => return bad("duhamel: give either `steps` or `nodes`"),
            (_, Some(nodes)) => TimeMesh::Nodes { nodes: nodes.clone() },
            (steps, None) => TimeMesh::Uniform { steps: steps.unwrap_or(64) },
        };
        let spec = DuhamelSpec { mesh, rule };
        spec.validate().map_err(|e| ConfigError(format!("duhamel: {e}")))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    #[default]
    Unit,
    /// `(1 + |xi|^2)^{gamma/2}` for all three frequency weights.
    Bessel,
}

/// One entry of `[[tasks]]`, selected by `kind`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    /// Solve at the configured times and dump the trajectory.
    Solve {
        /// Fail when any mode overflows.
        #[serde(default)]
        forbid_overflow: bool,
    },
    /// Physical kernel `K(s, t, .)`.
    Kernel {
        #[serde(default)]
        s: f64,
        t: Option<f64>,
    },
    CondA {
        t: Option<f64>,
        radius: f64,
        #[serde(default)]
        expect_finite: Option<bool>,
    },
    CondB {
        t: Option<f64>,
        radius: f64,
        #[serde(default)]
        expect_finite: Option<bool>,
    },
    /// Weighted conditions: the `L_{p,inf}` bound, the time-integrated bound
    /// and the weight lower bounds.
    Weighted {
        t: Option<f64>,
        radius: f64,
        #[serde(default = "two")]
        p: f64,
        #[serde(default = "two")]
        q: f64,
        #[serde(default)]
        weights: WeightFamily,
        #[serde(default)]
        gamma: f64,
        #[serde(default)]
        expect_finite: Option<bool>,
    },
    LogConditions {
        t: Option<f64>,
        radius: f64,
        #[serde(default = "sixteen")]
        s_samples: usize,
        #[serde(default)]
        expect_finite: Option<bool>,
    },
    SecondOrder {
        t: Option<f64>,
        #[serde(default = "two")]
        p: f64,
        #[serde(default)]
        expect_finite: Option<bool>,
    },
    /// Randomized checks of the weighted-space propositions.
    SpacesProps {
        /// Propositions to check; all when absent.
        #[serde(default)]
        props: Option<Vec<PropId>>,
        #[serde(default)]
        params: PropParams,
    },
    /// Representation and weak-form residuals of the solution, and the gap to
    /// a solve on a twice finer Duhamel mesh.
    Residuals {
        radius: f64,
        /// Radii of the bump test functions (default: `radius` halved twice).
        #[serde(default)]
        bumps: Option<Vec<f64>>,
        /// Pass threshold on the maximum representation residual.
        #[serde(default)]
        threshold: Option<f64>,
    },
}

fn two() -> f64 {
    2.0
}

fn sixteen() -> usize {
    16
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Solve { .. } => "solve",
            TaskConfig::Kernel { .. } => "kernel",
            TaskConfig::CondA { .. } => "cond_a",
            TaskConfig::CondB { .. } => "cond_b",
            TaskConfig::Weighted { .. } => "weighted",
            TaskConfig::LogConditions { .. } => "log_conditions",
            TaskConfig::SecondOrder { .. } => "second_order",
            TaskConfig::SpacesProps { .. } => "spaces_props",
            TaskConfig::Residuals { .. } => "residuals",
        }
    }

    /// Whether the task integrates the equation (and so uses the Duhamel mesh).
    pub fn solves(&self) -> bool {
        matches!(self, TaskConfig::Solve { .. } | TaskConfig::Residuals { .. })
    }
}

impl WeightFamily {
    pub fn build(self, gamma: f64) -> WeightSpec {
        match self {
            WeightFamily::Unit => WeightSpec::unit(),
            WeightFamily::Bessel => WeightSpec::bessel(gamma),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_field_any(base: &Path, p: &Path, grid: &SpectralGrid) -> Result<Field, ConfigError> {
    let path = resolve(base, p);
    if !path.exists() {
        return bad(format!("referenced file {} does not exist", path.display()));
    }
    let f = read_field(&path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if f.grid() != grid {
        return bad(format!("{}: field grid does not match the configured grid", path.display()));
    }
    Ok(f)
}

fn load_field(base: &Path, p: &Path, grid: &SpectralGrid, side: Side) -> Result<Field, ConfigError> {
    let f = load_field_any(base, p, grid)?;
    if f.side() != side {
        return bad(format!("{}: expected a {} field", p.display(), side.name()));
    }
    Ok(f)
}

/// Everything a run needs, validated.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: RunConfig,
    pub grid: SpectralGrid,
    pub symbol: BuiltSymbol,
    pub problem: CauchyProblem,
    pub quad: QuadratureSpec,
    pub duhamel: DuhamelSpec,
    pub horizon: f64,
}

impl RunConfig {
    /// Parses TOML; errors carry the line and column and name unknown keys.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))?;
        if cfg.spec_version != SPEC_VERSION {
            return bad(format!(
                "unsupported spec_version {} (this build reads {SPEC_VERSION})",
                cfg.spec_version
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Validates the whole configuration and builds the problem. `base` is the
    /// directory that relative file references are resolved against.
    pub fn plan(self, base: &Path) -> Result<Plan, ConfigError> {
        let g = self.grid;
        let grid = SpectralGrid::new(g.dim, g.n, g.extent).map_err(|e| ConfigError(format!("grid: {e}")))?;
        if self.times.is_empty() {
            return bad("`times` must not be empty");
        }
        if self.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) || self.times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("`times` must be positive, finite and strictly increasing");
        }
        let last = *self.times.last().expect("nonempty");
        let horizon = self.horizon.unwrap_or(last);
        if !(horizon >= last && horizon.is_finite()) {
            return bad(format!("horizon {horizon} is below the last output time {last}"));
        }
        let symbol = self.symbol.build(&grid, base)?;
        for task in &self.tasks {
            match task {
                TaskConfig::LogConditions { .. } if !self.symbol.family.is_log() => {
                    return bad("task log_conditions: task requires log-family symbol")
                }
                TaskConfig::SecondOrder { .. } if self.symbol.family != Family::SecondOrder => {
                    return bad("task second_order: task requires second_order symbol")
                }
                TaskConfig::Residuals { bumps, radius, .. } => {
                    if self.times.len() < 3 {
                        return bad("task residuals: needs at least 3 output times");
                    }
                    if !(*radius > 0.0) {
                        return bad("task residuals: radius must be positive");
                    }
                    if bumps.as_ref().is_some_and(|b| b.is_empty()) {
                        return bad("task residuals: `bumps` must not be empty");
                    }
                }
                _ => {}
            }
        }
        let quad = self.quadrature.build()?;
        let duhamel = self.duhamel.build()?;
        let u0 = self.initial.build(&grid, base)?;
        let forcing = self.forcing.build(&grid, base)?;
        let problem = CauchyProblem::from_arc(symbol.as_symbol(), u0, horizon)
            .and_then(|p| p.with_forcing(forcing))
            .map(|p| p.with_zero_mode(self.symbol.zero_mode))
            .map_err(|e| ConfigError(format!("problem: {e}")))?;
        Ok(Plan {
            config: self,
            grid,
            symbol,
            problem,
            quad,
            duhamel,
            horizon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"
spec_version = 1
times = [0.5, 1.0]

[grid]
dim = 1
n = 32
extent = 20.0

[symbol]
family = "second_order"
a = 1.0

[[tasks]]
kind = "solve"
"#;

    #[test]
    fn parses_minimal_heat() {
        let cfg = RunConfig::parse(HEAT).unwrap();
        assert_eq!(cfg.tasks.len(), 1);
        let plan = cfg.plan(Path::new(".")).unwrap();
        assert_eq!(plan.horizon, 1.0);
        assert_eq!(plan.grid.len(), 32);
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = HEAT.replace("[symbol]", "[symbl]");
        let e = RunConfig::parse(&text).unwrap_err();
        assert!(e.0.contains("symbl"), "{e}");
        let text = HEAT.replace("kind = \"solve\"", "kind = \"solve\"\nbogus = 1");
        let e = RunConfig::parse(&text).unwrap_err();
        assert!(e.0.contains("bogus"), "{e}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = RunConfig::parse("spec_version = 1\ntimes = [0.5,\n").unwrap_err();
        assert!(e.0.contains("line"), "{e}");
    }

    #[test]
    fn log_task_needs_log_symbol() {
        let text = HEAT.replace("kind = \"solve\"", "kind = \"log_conditions\"\nradius = 1.0");
        let e = RunConfig::parse(&text).unwrap().plan(Path::new(".")).unwrap_err();
        assert!(e.0.contains("task requires log-family symbol"), "{e}");
    }

    #[test]
    fn coefficients_and_keys() {
        let text = HEAT.replace(
            "a = 1.0",
            "a = { breaks = [0.5], values = [1.0, { re = -1.0, im = 0.5 }] }\nc = { re = 0.0, im = 1.0 }",
        );
        let plan = RunConfig::parse(&text).unwrap().plan(Path::new(".")).unwrap();
        let v = plan.problem.symbol().eval(0.75, &[1.0]).unwrap();
        assert!((v - Complex64::new(1.0, 0.5)).norm() < 1e-15);
        let text = HEAT.replace("a = 1.0", "a = 1.0\nbeta = 2.0");
        assert!(RunConfig::parse(&text).unwrap().plan(Path::new(".")).is_err());
        let text = HEAT.replace("spec_version = 1", "spec_version = 7");
        assert!(RunConfig::parse(&text).unwrap_err().0.contains("spec_version"));
    }

    #[test]
    fn builtin_initial_data() {
        let g = SpectralGrid::new(1, 16, 10.0).unwrap();
        let delta = InitialConfig { builtin: Some(InitialBuiltin::Delta), ..Default::default() };
        let f = delta.build(&g, Path::new(".")).unwrap();
        let v = (2.0 * std::f64::consts::PI).powf(-0.5);
        assert!(f.values().iter().all(|z| (z.re - v).abs() < 1e-15));
        let mode = InitialConfig { builtin: Some(InitialBuiltin::ModeK), mode: Some(vec![3]), ..Default::default() };
        let f = mode.build(&g, Path::new(".")).unwrap();
        assert_eq!(f.values().iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert_eq!(f.values()[g.index_of_offsets(&[3]).unwrap()].re, 1.0);
    }
}
