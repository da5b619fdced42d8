//! Composite one-dimensional quadrature with refinement-based acceptance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Highest Gauss–Legendre order with precomputed nodes.
pub const MAX_GAUSS_ORDER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    Trapezoid,
    Simpson,
    GaussLegendre { order: usize },
}

/// Placement of panel boundaries on `[a, b]`.
///
/// Graded layouts use boundaries `a + (b - a) (i / P)^exponent` (mirrored for
/// `GradedBoth`), which clusters panels at an endpoint singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PanelLayout {
    Uniform,
    GradedLeft { exponent: f64 },
    GradedBoth { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub panels: usize,
    pub abs_tol: f64,
    #[serde(default = "default_layout")]
    pub layout: PanelLayout,
    #[serde(default = "default_max_panels")]
    pub max_panels: usize,
}

fn default_layout() -> PanelLayout {
    PanelLayout::Uniform
}

fn default_max_panels() -> usize {
    1 << 16
}

impl Default for QuadratureSpec {
    /// Composite Gauss–Legendre of order 4 on 64 panels, `abs_tol = 1e-10`.
    fn default() -> Self {
        Self {
            rule: Rule::GaussLegendre { order: 4 },
            panels: 64,
            abs_tol: 1e-10,
            layout: PanelLayout::Uniform,
            max_panels: default_max_panels(),
        }
    }
}

/// Value of an integral together with the refinement change used to accept it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub abs_err: f64,
}

impl Integral {
    pub fn exact(value: Complex64) -> Self {
        Self { value, abs_err: 0.0 }
    }
}

impl QuadratureSpec {
    pub fn with_rule(rule: Rule, panels: usize) -> Self {
        Self {
            rule,
            panels,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 {
            return Err(Error::InvalidArgument("quadrature needs at least one panel".into()));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("quadrature abs_tol must be positive".into()));
        }
        if let Rule::GaussLegendre { order } = self.rule {
            if !(1..=MAX_GAUSS_ORDER).contains(&order) {
                return Err(Error::InvalidArgument(format!(
                    "Gauss-Legendre order {order} outside 1..={MAX_GAUSS_ORDER}"
                )));
            }
        }
        match self.layout {
            PanelLayout::GradedLeft { exponent } | PanelLayout::GradedBoth { exponent }
                if !(exponent >= 1.0) =>
            {
                Err(Error::InvalidArgument("grading exponent must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Integrates `f` over `[a, b]`, doubling the panel count until two successive
    /// estimates differ by at most `max(abs_tol, 1e-14 |value|)`.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<Integral>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        self.validate()?;
        if a == b {
            return Ok(Integral::exact(Complex64::new(0.0, 0.0)));
        }
        let mut panels = self.panels;
        let mut coarse = self.apply(a, b, panels, &mut f)?;
        let mut last_change = f64::INFINITY;
        while panels * 2 <= self.max_panels {
            panels *= 2;
            let fine = self.apply(a, b, panels, &mut f)?;
            let change = (fine - coarse).norm();
            if !fine.is_finite() {
                break;
            }
            if change <= self.abs_tol.max(1e-14 * fine.norm()) {
                return Ok(Integral {
                    value: fine,
                    abs_err: change,
                });
            }
            last_change = change;
            coarse = fine;
        }
        Err(Error::QuadratureDivergence {
            a,
            b,
            abs_tol: self.abs_tol,
            last_change,
        })
    }

    /// Single composite evaluation with a fixed number of panels.
    pub fn apply<F>(&self, a: f64, b: f64, panels: usize, f: &mut F) -> Result<Complex64>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        let mut total = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes(a, b, panels) {
            total += f(x)? * w;
        }
        Ok(total)
    }

    /// Nodes and weights of the composite rule with `panels` panels on `[a, b]`.
    pub fn nodes(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let bounds = panel_bounds(self.layout, a, b, panels);
        let mut out = Vec::new();
        for w in bounds.windows(2) {
            rule_nodes(self.rule, w[0], w[1], &mut out);
        }
        merge_shared_endpoints(out)
    }
}

/// Panel boundaries for a layout; always starts at `a` and ends at `b`.
pub fn panel_bounds(layout: PanelLayout, a: f64, b: f64, panels: usize) -> Vec<f64> {
    let p = panels as f64;
    let mut bounds: Vec<f64> = (0..=panels)
        .map(|i| {
            let s = i as f64 / p;
            let g = match layout {
                PanelLayout::Uniform => s,
                PanelLayout::GradedLeft { exponent } => s.powf(exponent),
                PanelLayout::GradedBoth { exponent } => {
                    if s <= 0.5 {
                        0.5 * (2.0 * s).powf(exponent)
                    } else {
                        1.0 - 0.5 * (2.0 * (1.0 - s)).powf(exponent)
                    }
                }
            };
            a + (b - a) * g
        })
        .collect();
    bounds[0] = a;
    bounds[panels] = b;
    bounds
}

/// Appends nodes/weights of one panel of `rule` on `[a, b]`.
pub fn rule_nodes(rule: Rule, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let h = b - a;
    match rule {
        Rule::Trapezoid => {
            out.push((a, h / 2.0));
            out.push((b, h / 2.0));
        }
        Rule::Simpson => {
            out.push((a, h / 6.0));
            out.push((0.5 * (a + b), 4.0 * h / 6.0));
            out.push((b, h / 6.0));
        }
        Rule::GaussLegendre { order } => {
            let mid = 0.5 * (a + b);
            let half = 0.5 * h;
            for &(x, w) in gauss_legendre(order) {
                out.push((mid + half * x, half * w));
            }
        }
    }
}

fn merge_shared_endpoints(nodes: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(nodes.len());
    for (x, w) in nodes {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// # Panics
/// If `order` is zero or exceeds [`MAX_GAUSS_ORDER`].
pub fn gauss_legendre(order: usize) -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    assert!((1..=MAX_GAUSS_ORDER).contains(&order), "unsupported order {order}");
    let table = TABLE.get_or_init(|| (0..=MAX_GAUSS_ORDER).map(compute_gauss_legendre).collect());
    &table[order]
}

fn compute_gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    if order == 0 {
        return Vec::new();
    }
    let n = order as f64;
    let mut nodes = Vec::with_capacity(order);
    for i in 0..order {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d.is_finite() { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push((x, w));
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `L_p(a, b)` norm of a real function using the configured rule with refinement;
/// `p = inf` takes the maximum over panel boundaries and rule nodes.
pub fn lp_norm<F>(spec: &QuadratureSpec, a: f64, b: f64, p: f64, mut f: F) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if p.is_infinite() {
        let mut panels = spec.panels;
        let mut coarse = max_on_nodes(spec, a, b, panels, &mut f)?;
        let mut last_change = f64::INFINITY;
        while panels * 2 <= spec.max_panels {
            panels *= 2;
            let fine = max_on_nodes(spec, a, b, panels, &mut f)?;
            let change = (fine - coarse).abs();
            if change <= spec.abs_tol.max(1e-9 * fine.abs()) {
                return Ok(Integral {
                    value: Complex64::new(fine, 0.0),
                    abs_err: change,
                });
            }
            if !fine.is_finite() {
                break;
            }
            last_change = change;
            coarse = fine;
        }
        return Err(Error::QuadratureDivergence {
            a,
            b,
            abs_tol: spec.abs_tol,
            last_change,
        });
    }
    let integral = spec.integrate(a, b, |t| Ok(Complex64::new(f(t)?.abs().powf(p), 0.0)))?;
    let value = integral.value.re.max(0.0).powf(1.0 / p);
    Ok(Integral {
        value: Complex64::new(value, 0.0),
        abs_err: integral.abs_err,
    })
}

/// `L_p(a, b)` norm with a fixed number of panels (no refinement); `p = inf`
/// takes the maximum over panel boundaries and rule nodes.
pub fn lp_norm_fixed<F>(spec: &QuadratureSpec, a: f64, b: f64, p: f64, panels: usize, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return max_on_nodes(spec, a, b, panels, &mut f);
    }
    let mut total = 0.0;
    for (x, w) in spec.nodes(a, b, panels) {
        total += w * f(x)?.abs().powf(p);
    }
    Ok(total.powf(1.0 / p))
}

fn max_on_nodes<F>(spec: &QuadratureSpec, a: f64, b: f64, panels: usize, f: &mut F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut m: f64 = 0.0;
    let bounds = panel_bounds(spec.layout, a, b, panels);
    let nodes = spec.nodes(a, b, panels);
    for x in bounds.into_iter().chain(nodes.into_iter().map(|n| n.0)) {
        let v = f(x)?.abs();
        if v.is_nan() {
            return Ok(f64::INFINITY);
        }
        m = m.max(v);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two_and_integrate_polynomials() {
        for order in 1..=MAX_GAUSS_ORDER {
            let nodes = gauss_legendre(order);
            let total: f64 = nodes.iter().map(|n| n.1).sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
            // exact for x^(2 order - 2)
            let deg = 2 * order - 2;
            let approx: f64 = nodes.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
            assert!((approx - 2.0 / (deg as f64 + 1.0)).abs() < 1e-12, "order {order}");
        }
    }

    #[test]
    fn default_rule_is_exact_for_degree_seven_per_panel() {
        let spec = QuadratureSpec {
            panels: 1,
            ..QuadratureSpec::default()
        };
        let v = spec.apply(0.0, 2.0, 1, &mut |t: f64| Ok(c(t.powi(7)))).unwrap();
        assert!((v.re - 2f64.powi(8) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_and_simpson_orders() {
        let f = |t: f64| Ok(c(t.exp()));
        let exact = 1f64.exp() - 1.0;
        let err = |rule, p| {
            let s = QuadratureSpec::with_rule(rule, p);
            (s.apply(0.0, 1.0, p, &mut f.clone()).unwrap().re - exact).abs()
        };
        let r_trap = err(Rule::Trapezoid, 16) / err(Rule::Trapezoid, 32);
        let r_simp = err(Rule::Simpson, 8) / err(Rule::Simpson, 16);
        assert!((r_trap - 4.0).abs() < 0.05, "{r_trap}");
        assert!((r_simp - 16.0).abs() < 0.5, "{r_simp}");
    }

    #[test]
    fn adaptive_integration_reaches_tolerance() {
        let spec = QuadratureSpec::default();
        let i = spec
            .integrate(0.0, 3.0, |t| Ok(Complex64::new(t.sin(), t.cos())))
            .unwrap();
        assert!((i.value.re - (1.0 - 3f64.cos())).abs() < 1e-12);
        assert!((i.value.im - 3f64.sin()).abs() < 1e-12);
        assert!(i.abs_err <= 1e-10);
    }

    #[test]
    fn empty_interval_is_zero() {
        let spec = QuadratureSpec::default();
        let i = spec.integrate(1.0, 1.0, |_| Ok(c(f64::NAN))).unwrap();
        assert_eq!(i.value, c(0.0));
    }

    #[test]
    fn non_integrable_singularity_diverges() {
        let spec = QuadratureSpec {
            max_panels: 1 << 12,
            ..QuadratureSpec::default()
        };
        let r = spec.integrate(0.0, 1.0, |t| Ok(c(1.0 / t)));
        assert!(matches!(r, Err(Error::QuadratureDivergence { .. })));
    }

    #[test]
    fn graded_layout_handles_integrable_singularity() {
        let spec = QuadratureSpec {
            layout: PanelLayout::GradedLeft { exponent: 8.0 },
            ..QuadratureSpec::default()
        };
        let i = spec.integrate(0.0, 1.0, |t| Ok(c(t.powf(-0.5)))).unwrap();
        assert!((i.value.re - 2.0).abs() < 1e-9, "{}", i.value.re);
    }

    #[test]
    fn lp_norms() {
        let spec = QuadratureSpec::default();
        let two = lp_norm(&spec, 0.0, 1.0, 2.0, |t| Ok(t)).unwrap();
        assert!((two.value.re - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let inf = lp_norm(&spec, 0.0, 1.0, f64::INFINITY, |t| Ok((t - 0.5).abs())).unwrap();
        assert!((inf.value.re - 0.5).abs() < 1e-12);
        let blow = lp_norm(&spec, 0.0, 1.0, f64::INFINITY, |t| Ok(1.0 / t));
        assert!(blow.is_err());
    }

    #[test]
    fn validation() {
        let mut s = QuadratureSpec::default();
        s.panels = 0;
        assert!(s.validate().is_err());
        let mut s = QuadratureSpec::default();
        s.abs_tol = 0.0;
        assert!(s.validate().is_err());
        let s = QuadratureSpec::with_rule(Rule::GaussLegendre { order: 40 }, 4);
        assert!(s.validate().is_err());
    }
}
