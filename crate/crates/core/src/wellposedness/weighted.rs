use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use std::fmt;
use std::sync::Arc;

use super::{ball, ConditionId, ConditionReport};
use crate::error::{Error, Result};
use crate::propagator::{eval_symbol, exponent, CauchyProblem, SolutionTrajectory};
use crate::quadrature::{panel_bounds, rule_nodes, QuadratureSpec};
use crate::spectral::{lq_norm, SpectralGrid};

pub type FrequencyWeight = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type SpaceTimeWeight = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
pub type TimeWeight = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Weights `W0(xi)`, `W1(xi)`, `W2(t, xi)` (positive) and the time weight
/// `w(t)` (nonnegative) of the weighted conditions.
#[derive(Clone)]
pub struct WeightSpec {
    pub name: String,
    pub w0: FrequencyWeight,
    pub w1: FrequencyWeight,
    pub w2: SpaceTimeWeight,
    pub w: TimeWeight,
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec").field("name", &self.name).finish_non_exhaustive()
    }
}

impl WeightSpec {
    pub fn new(
        name: impl Into<String>,
        w0: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        w1: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        w2: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            w0: Arc::new(w0),
            w1: Arc::new(w1),
            w2: Arc::new(w2),
            w: Arc::new(w),
        }
    }

    /// All weights identically one.
    pub fn unit() -> Self {
        Self::new("unit", |_| 1.0, |_| 1.0, |_, _| 1.0, |_| 1.0)
    }

    /// `W0 = W1 = W2 = (1 + |xi|^2)^{gamma/2}`, `w = 1`.
    pub fn bessel(gamma: f64) -> Self {
        let b = move |xi: &[f64]| (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).powf(gamma / 2.0);
        Self::new(format!("bessel({gamma})"), b, b, move |_, xi| b(xi), |_| 1.0)
    }

    pub fn with_time_weight(mut self, w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.w = Arc::new(w);
        self
    }

    fn validate(&self, modes: &[(usize, Vec<f64>)], times: &[f64]) -> Result<()> {
        let positive = |name: &'static str, value: f64, index: usize| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::WeightNotPositive { name, value, index })
            }
        };
        for (k, xi) in modes {
            positive("W0", (self.w0)(xi), *k)?;
            positive("W1", (self.w1)(xi), *k)?;
            for &s in times {
                positive("W2", (self.w2)(s, xi), *k)?;
            }
        }
        for (j, &s) in times.iter().enumerate() {
            let v = (self.w)(s);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::WeightNotPositive { name: "w", value: v, index: j });
            }
        }
        Ok(())
    }
}

/// Sorted evaluation points on `[0, t]` (panel boundaries with weight zero,
/// plus rule nodes) so that one list serves both `L_p` sums and maxima.
fn time_points(quad: &QuadratureSpec, t: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = panel_bounds(quad.layout, 0.0, t, panels).into_iter().map(|b| (b, 0.0)).collect();
    pts.extend(quad.nodes(0.0, t, panels));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, w) in pts {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

fn time_norm(values: &[f64], points: &[(f64, f64)], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) });
    }
    values.iter().zip(points).map(|(v, (_, w))| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Per mode, the two integrands on `points`:
/// `(1 + |psi|) / W0 exp(\int_0^rho Re psi)` and `(1 + |psi|) / W1 exp(\int_0^rho |Re psi|)`.
fn integrands(
    problem: &CauchyProblem,
    weights: &WeightSpec,
    modes: &[(usize, Vec<f64>)],
    points: &[(f64, f64)],
    quad: &QuadratureSpec,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let sym = problem.symbol();
    let policy = problem.zero_mode();
    modes
        .par_iter()
        .map(|(_, xi)| {
            let w0 = (weights.w0)(xi);
            let w1 = (weights.w1)(xi);
            let mut a0 = Vec::with_capacity(points.len());
            let mut a1 = Vec::with_capacity(points.len());
            let mut abs_re = 0.0;
            let mut prev = 0.0;
            let mut sub = Vec::new();
            for &(rho, _) in points {
                if rho > prev {
                    sub.clear();
                    rule_nodes(quad.rule, prev, rho, &mut sub);
                    for &(r, w) in &sub {
                        abs_re += w * eval_symbol(sym, r, xi, policy)?.re.abs();
                    }
                    prev = rho;
                }
                let amp = 1.0 + eval_symbol(sym, rho, xi, policy)?.norm();
                let re = exponent(sym, 0.0, rho, xi, quad, policy)?.0.value.re;
                a0.push(amp / w0 * re.exp());
                a1.push(amp / w1 * abs_re.exp());
            }
            Ok((a0, a1))
        })
        .collect()
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in [1, inf], got {p}")))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("t must be positive and finite, got {t}")))
    }
}

/// `||u0_hat||_{L_q(B_R, W0^q dxi)}`.
fn data_norm(problem: &CauchyProblem, weights: &WeightSpec, modes: &[(usize, Vec<f64>)], q: f64) -> f64 {
    let u0 = problem.u0_hat().values();
    let vals: Vec<_> = modes.iter().map(|(k, xi)| u0[*k] * (weights.w0)(xi)).collect();
    lq_norm(&vals, problem.grid().frequency_cell_volume(), q)
}

/// `||f_hat||_{L_{p,q}((0,t) x B_R, dt W2^q dxi)}` on the given time points.
fn forcing_norm(
    problem: &CauchyProblem,
    weights: &WeightSpec,
    modes: &[(usize, Vec<f64>)],
    points: &[(f64, f64)],
    p: f64,
    q: f64,
) -> Result<f64> {
    if problem.forcing().is_none() {
        return Ok(0.0);
    }
    let cell = problem.grid().frequency_cell_volume();
    let per_time = points
        .par_iter()
        .map(|&(s, _)| {
            let vals = modes
                .iter()
                .map(|(k, xi)| Ok(problem.forcing().eval(s, *k, xi)? * (weights.w2)(s, xi)))
                .collect::<Result<Vec<_>>>()?;
            Ok(lq_norm(&vals, cell, q))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(time_norm(&per_time, points, p))
}

/// Mixed-norm condition
/// `N0 = ||w (1 + |psi|) / W0 exp(\int_0^rho Re psi)||_{L_{p,inf}((0,t) x B_R)}` and
/// `N1 = ||w (1 + |psi|) / W1 exp(\int_0^rho |Re psi|)||_{L_{p,inf}((0,t) x B_R)}`
/// (`L_p` in time of the lattice maximum). The bound is `max(N0, N1)`; when
/// finite, the component `a_priori` holds
/// `N0 ||u0_hat||_{L_q(W0^q)} + t^{1/p'} N1 ||f_hat||_{L_{p,q}(W2^q)}`.
pub fn check_weighted(
    problem: &CauchyProblem,
    weights: &WeightSpec,
    p: f64,
    q: f64,
    t: f64,
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<ConditionReport> {
    quad.validate()?;
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    check_time(t)?;
    let modes = ball(problem.grid(), radius)?;
    let finest = time_points(quad, t, 4 * quad.panels);
    let finest_times: Vec<f64> = finest.iter().map(|x| x.0).collect();
    weights.validate(&modes, &finest_times)?;

    let mut report = ConditionReport::new(
        ConditionId::WeightedLpInf,
        json!({ "t": t, "R": radius, "p": p, "q": q, "weights": weights.name, "modes": modes.len() }),
        quad,
    );
    report.symbol = Some(problem.symbol().descriptor().to_json(quad));
    let mut report = report.refine(quad.panels, |panels| {
        let points = time_points(quad, t, panels);
        let per_mode = integrands(problem, weights, &modes, &points, quad)?;
        let mut sup0 = vec![0.0f64; points.len()];
        let mut sup1 = vec![0.0f64; points.len()];
        for (a0, a1) in &per_mode {
            for j in 0..points.len() {
                sup0[j] = sup0[j].max(a0[j]);
                sup1[j] = sup1[j].max(a1[j]);
            }
        }
        for (j, &(rho, _)) in points.iter().enumerate() {
            let w = (weights.w)(rho);
            sup0[j] *= w;
            sup1[j] *= w;
        }
        let n0 = time_norm(&sup0, &points, p);
        let n1 = time_norm(&sup1, &points, p);
        Ok((n0.max(n1), vec![("n0", n0), ("n1", n1)]))
    })?;

    let kappa0 = modes.iter().map(|(_, xi)| (weights.w0)(xi)).fold(f64::INFINITY, f64::min);
    let kappa1 = modes.iter().map(|(_, xi)| (weights.w1)(xi)).fold(f64::INFINITY, f64::min);
    report.component("kappa0", kappa0);
    report.component("kappa1", kappa1);
    if report.finite {
        let n0 = report.components["n0"].as_f64().unwrap_or(f64::INFINITY);
        let n1 = report.components["n1"].as_f64().unwrap_or(f64::INFINITY);
        let data = data_norm(problem, weights, &modes, q);
        let forcing = forcing_norm(problem, weights, &modes, &finest, p, q)?;
        let a_priori = n0 * data + t.powf(1.0 / conjugate(p)) * n1 * forcing;
        report.component("data_norm", data);
        report.component("forcing_norm", forcing);
        report.component("a_priori", a_priori);
    }
    Ok(report)
}

/// Time-integrated condition
/// `\int_0^t ||w (1 + |psi|) / W0 exp(\int_0^rho Re psi)||_{L_{q'}(B_R)} drho
///  + \int_0^t ||w (1 + |psi|) / W1 exp(\int_0^rho |Re psi|)||_{L_{q'}(B_R)} drho`.
pub fn check_weighted_integral(
    problem: &CauchyProblem,
    weights: &WeightSpec,
    q: f64,
    t: f64,
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<ConditionReport> {
    quad.validate()?;
    check_exponent("q", q)?;
    check_time(t)?;
    let modes = ball(problem.grid(), radius)?;
    let finest = time_points(quad, t, 4 * quad.panels);
    let finest_times: Vec<f64> = finest.iter().map(|x| x.0).collect();
    weights.validate(&modes, &finest_times)?;
    let qc = conjugate(q);
    let cell = problem.grid().frequency_cell_volume();

    let mut report = ConditionReport::new(
        ConditionId::WeightedIntegral,
        json!({ "t": t, "R": radius, "q": q, "weights": weights.name, "modes": modes.len() }),
        quad,
    );
    report.symbol = Some(problem.symbol().descriptor().to_json(quad));
    report.refine(quad.panels, |panels| {
        let points = time_points(quad, t, panels);
        let per_mode = integrands(problem, weights, &modes, &points, quad)?;
        let mut i0 = 0.0;
        let mut i1 = 0.0;
        for (j, &(rho, w)) in points.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let tw = (weights.w)(rho);
            let col0: Vec<_> = per_mode.iter().map(|m| Complex64::new(m.0[j], 0.0)).collect();
            let col1: Vec<_> = per_mode.iter().map(|m| Complex64::new(m.1[j], 0.0)).collect();
            i0 += w * tw * lq_norm(&col0, cell, qc);
            i1 += w * tw * lq_norm(&col1, cell, qc);
        }
        Ok((i0 + i1, vec![("i0", i0), ("i1", i1)]))
    })
}

/// Lattice minima `kappa0 = min W0`, `kappa1 = min W1` over `B_R` and the
/// number of sampled `(s, xi)` with `W2(s, xi) < W1(xi)` for `s` on the
/// quadrature nodes of `(0, t)`. Finite iff both minima are positive and no
/// violation was found; the bound is `min(kappa0, kappa1)`.
pub fn check_weight_lower_bounds(
    weights: &WeightSpec,
    grid: &SpectralGrid,
    t: f64,
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<ConditionReport> {
    quad.validate()?;
    check_time(t)?;
    let modes = ball(grid, radius)?;
    let times: Vec<f64> = quad.nodes(0.0, t, quad.panels).into_iter().map(|x| x.0).collect();
    let kappa0 = modes.iter().map(|(_, xi)| (weights.w0)(xi)).fold(f64::INFINITY, f64::min);
    let kappa1 = modes.iter().map(|(_, xi)| (weights.w1)(xi)).fold(f64::INFINITY, f64::min);
    let violations = modes
        .iter()
        .map(|(_, xi)| {
            let w1 = (weights.w1)(xi);
            times.iter().filter(|&&s| !((weights.w2)(s, xi) >= w1)).count()
        })
        .sum::<usize>();
    let mut report = ConditionReport::new(
        ConditionId::WeightLowerBounds,
        json!({ "t": t, "R": radius, "weights": weights.name, "modes": modes.len(), "time_samples": times.len() }),
        quad,
    );
    report.bound = kappa0.min(kappa1);
    report.component("kappa0", kappa0);
    report.component("kappa1", kappa1);
    report.component("w2_below_w1", violations as f64);
    report.finite = kappa0 > 0.0 && kappa1 > 0.0 && violations == 0 && !modes.is_empty();
    if !report.finite {
        report.note = Some(if modes.is_empty() {
            "B_R contains no lattice modes".into()
        } else if violations > 0 {
            format!("W2 < W1 at {violations} sampled points")
        } else {
            "a weight is not bounded below by a positive constant on B_R".into()
        });
    }
    Ok(report)
}

/// `||(1 + |psi(s, xi)|) u_hat(s, xi)||_{L_{p,q}((0,t) x B_R)}` from a
/// trajectory, with `u_hat(0) = u0_hat` prepended and the time norm taken by
/// the trapezoid rule on the stored times up to `t` (maximum for `p = inf`).
/// Returns infinity if any snapshot overflowed on `B_R`.
pub fn solution_lpq_norm(traj: &SolutionTrajectory, problem: &CauchyProblem, p: f64, q: f64, t: f64, radius: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if problem.grid() != traj.grid() {
        return Err(Error::GridMismatch);
    }
    let modes = ball(traj.grid(), radius)?;
    let sym = problem.symbol();
    let policy = problem.zero_mode();
    let cell = traj.grid().frequency_cell_volume();
    let mut samples: Vec<(f64, Vec<Complex64>)> = vec![(0.0, problem.u0_hat().values().to_vec())];
    for (j, snap) in traj.snapshots().iter().enumerate() {
        if snap.t > t * (1.0 + 1e-12) {
            break;
        }
        if modes.iter().any(|(k, _)| snap.overflowed[*k]) {
            return Ok(f64::INFINITY);
        }
        samples.push((snap.t, traj.materialized(j)?.into_values()));
    }
    let mut per_time = Vec::with_capacity(samples.len());
    for (s, u) in &samples {
        let vals = modes
            .iter()
            .map(|(k, xi)| Ok(u[*k] * (1.0 + eval_symbol(sym, *s, xi, policy)?.norm())))
            .collect::<Result<Vec<_>>>()?;
        per_time.push(lq_norm(&vals, cell, q));
    }
    if p.is_infinite() {
        return Ok(per_time.iter().fold(0.0, |m: f64, v| m.max(*v)));
    }
    let mut acc = 0.0;
    for j in 1..samples.len() {
        let h = samples[j].0 - samples[j - 1].0;
        acc += 0.5 * h * (per_time[j].powf(p) + per_time[j - 1].powf(p));
    }
    Ok(acc.powf(1.0 / p))
}
