use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{ResidualKind, ResidualReport, TestFunction};
use crate::error::{Error, Result};
use crate::propagator::{eval_symbol, CauchyProblem, SolutionTrajectory, ZeroModePolicy};
use crate::quadrature::QuadratureSpec;
use crate::symbols::Symbol;

/// Residual fields `R(t_j, .)` of the integrated equation at every stored time,
/// with `u_hat(0) = u0_hat` prepended and trapezoid time integrals on the
/// stored times. Returns the times, the residuals and the mask of modes that
/// overflowed at some time.
fn residual_fields(traj: &SolutionTrajectory, problem: &CauchyProblem) -> Result<(Vec<f64>, Vec<Vec<Complex64>>, Vec<bool>)> {
    if traj.len() < 3 {
        return Err(Error::InsufficientTimes { found: traj.len(), needed: 3 });
    }
    if traj.grid() != problem.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *traj.grid();
    let dim = grid.dim();
    let mut times = vec![0.0];
    times.extend(traj.times());
    let mut values = vec![problem.u0_hat().values().to_vec()];
    for j in 0..traj.len() {
        values.push(traj.materialized(j)?.into_values());
    }
    let mask: Vec<bool> = (0..grid.len())
        .map(|k| traj.snapshots().iter().any(|s| s.overflowed[k]))
        .collect();
    let sym = problem.symbol();
    let policy = problem.zero_mode();
    let forced = !problem.forcing().is_none();

    let per_mode: Vec<Vec<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let zero = Complex64::new(0.0, 0.0);
            if mask[k] {
                return Ok(vec![zero; times.len() - 1]);
            }
            let xi_full = grid.frequency(k);
            let xi = &xi_full[..dim];
            let integrand = |i: usize| -> Result<Complex64> {
                let mut v = eval_symbol(sym, times[i], xi, policy)? * values[i][k];
                if forced {
                    v += problem.forcing().eval(times[i], k, xi)?;
                }
                Ok(v)
            };
            let mut out = Vec::with_capacity(times.len() - 1);
            let mut acc = zero;
            let mut prev = integrand(0)?;
            for i in 1..times.len() {
                let cur = integrand(i)?;
                acc += 0.5 * (times[i] - times[i - 1]) * (prev + cur);
                prev = cur;
                out.push(values[i][k] - values[0][k] - acc);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let residuals = (0..times.len() - 1)
        .map(|j| per_mode.iter().map(|m| m[j]).collect())
        .collect();
    Ok((times[1..].to_vec(), residuals, mask))
}

fn meshes(traj: &SolutionTrajectory) -> serde_json::Value {
    json!({
        "stored_times": traj.len(),
        "time_integral": "trapezoid on stored times",
        "duhamel": traj.duhamel(),
    })
}

/// Per stored time `t`, `max_{xi in B_R} |R(t, xi)|` with
/// `R = u_hat(t) - u0_hat - \int_0^t psi u_hat ds - \int_0^t f_hat ds`; the
/// time integrals use the trapezoid rule on the stored times (plus `t = 0`).
/// Modes that overflow at any stored time are excluded and counted.
pub fn representation_residual(traj: &SolutionTrajectory, problem: &CauchyProblem, radius: f64) -> Result<ResidualReport> {
    let modes = traj.grid().ball_modes(radius)?;
    let (times, fields, mask) = residual_fields(traj, problem)?;
    let residuals = fields
        .iter()
        .map(|r| modes.iter().filter(|&&k| !mask[k]).map(|&k| r[k].norm()).fold(0.0, f64::max))
        .collect();
    let masked = modes.iter().filter(|&&k| mask[k]).count();
    let mut meshes = meshes(traj);
    meshes["radius"] = json!(radius);
    Ok(ResidualReport::new(ResidualKind::Representation, times, residuals, masked, meshes))
}

/// Per stored time, `|(R(t, .), F[phi])_{L_2}|` on the frequency lattice, i.e.
/// `<u(t), phi> - <u0, phi> - \int_0^t <psi(s, -i grad) u(s), phi> ds -
/// \int_0^t <f(s), phi> ds` with every pairing taken on the Fourier side.
pub fn weak_form_residual(traj: &SolutionTrajectory, problem: &CauchyProblem, phi: &TestFunction) -> Result<ResidualReport> {
    if phi.hat().grid() != traj.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *traj.grid();
    if phi.radius() + phi.center().iter().map(|c| c * c).sum::<f64>().sqrt() >= grid.r_grid() {
        return Err(Error::SupportExceedsGrid { support: phi.radius(), grid_radius: grid.r_grid() });
    }
    let (times, fields, mask) = residual_fields(traj, problem)?;
    let cell = grid.frequency_cell_volume();
    let hat = phi.hat().values();
    let residuals = fields
        .iter()
        .map(|r| {
            let pairing: Complex64 = (0..grid.len())
                .filter(|&k| !mask[k] && hat[k].norm() > 0.0)
                .map(|k| r[k] * hat[k].conj())
                .sum();
            pairing.norm() * cell
        })
        .collect();
    let masked = (0..grid.len()).filter(|&k| mask[k] && hat[k].norm() > 0.0).count();
    let mut meshes = meshes(traj);
    meshes["test_function"] = json!({ "radius": phi.radius(), "center": phi.center(), "l1_mass": phi.l1_mass() });
    Ok(ResidualReport::new(ResidualKind::WeakForm, times, residuals, masked, meshes))
}

/// Per common stored time, `max_{xi in B_R} |u_hat_a - u_hat_b|` over modes
/// materializable in both runs. `bound` holds the Gronwall growth factor
/// `max_{xi in B_R} exp(\int_0^t |psi(s, xi)| ds)`, which multiplies the (zero)
/// initial gap.
pub fn gronwall_gap(
    a: &SolutionTrajectory,
    b: &SolutionTrajectory,
    symbol: &dyn Symbol,
    quad: &QuadratureSpec,
    radius: f64,
) -> Result<ResidualReport> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let ta = a.times();
    let tb = b.times();
    if ta.len() != tb.len() || ta.iter().zip(&tb).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0)) {
        return Err(Error::InvalidArgument("trajectories must share their stored times".into()));
    }
    quad.validate()?;
    let grid = *a.grid();
    let dim = grid.dim();
    let modes = grid.ball_modes(radius)?;
    let mask: Vec<bool> = (0..grid.len())
        .map(|k| a.snapshots().iter().chain(b.snapshots()).any(|s| s.overflowed[k]))
        .collect();
    let mut gaps = Vec::with_capacity(ta.len());
    for j in 0..ta.len() {
        let ua = a.materialized(j)?;
        let ub = b.materialized(j)?;
        let gap = modes
            .iter()
            .filter(|&&k| !mask[k])
            .map(|&k| (ua.values()[k] - ub.values()[k]).norm())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    let bound = ta
        .iter()
        .map(|&t| {
            modes
                .par_iter()
                .map(|&k| {
                    let xi_full = grid.frequency(k);
                    let xi = &xi_full[..dim];
                    let mut acc = 0.0;
                    for (s, w) in quad.nodes(0.0, t, quad.panels) {
                        acc += w * eval_symbol(symbol, s, xi, ZeroModePolicy::Drop)?.norm();
                    }
                    Ok(acc.exp())
                })
                .collect::<Result<Vec<f64>>>()
                .map(|v| v.into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let masked = modes.iter().filter(|&&k| mask[k]).count();
    let meshes = json!({ "a": a.duhamel(), "b": b.duhamel(), "radius": radius });
    let mut report = ResidualReport::new(ResidualKind::GronwallGap, ta, gaps, masked, meshes);
    report.bound = Some(bound);
    Ok(report)
}
