use num_complex::Complex64;
use rayon::prelude::*;

use super::{CauchyProblem, DuhamelSpec, LogComplex, Snapshot, SolutionTrajectory, ZeroModePolicy};
use crate::error::{Error, Result};
use crate::quadrature::{Integral, QuadratureSpec};
use crate::symbols::Symbol;

/// `\int_s^t psi` with the zero-mode policy applied: under `Drop` a vanishing
/// log argument makes the exponent 0. The flag reports whether that happened.
pub(crate) fn exponent(
    sym: &dyn Symbol,
    s: f64,
    t: f64,
    xi: &[f64],
    quad: &QuadratureSpec,
    policy: ZeroModePolicy,
) -> Result<(Integral, bool)> {
    match sym.integral(s, t, xi, quad) {
        Err(Error::ZeroArgument { .. }) if policy == ZeroModePolicy::Drop => {
            Ok((Integral::exact(Complex64::new(0.0, 0.0)), true))
        }
        other => other.map(|i| (i, false)),
    }
}

/// `psi(t, xi)` with the zero-mode policy applied.
pub(crate) fn eval_symbol(sym: &dyn Symbol, t: f64, xi: &[f64], policy: ZeroModePolicy) -> Result<Complex64> {
    match sym.eval(t, xi) {
        Err(Error::ZeroArgument { .. }) if policy == ZeroModePolicy::Drop => Ok(Complex64::new(0.0, 0.0)),
        other => other,
    }
}

struct ModeSolution {
    values: Vec<LogComplex>,
    re_exponent: Vec<f64>,
    error: Vec<f64>,
    dropped: bool,
}

/// Frequency-side solution of the Cauchy problem at `times`:
/// `u_hat(t) = M(0,t) u0_hat + sum_q w_q M(s_q,t) f_hat(s_q)` with
/// `M(s,t) = exp(\int_s^t psi)`, evaluated in log form per mode and in parallel
/// over modes. Modes beyond the materialization limit are masked, not clipped.
pub fn solve(
    problem: &CauchyProblem,
    times: &[f64],
    quad: &QuadratureSpec,
    duhamel: &DuhamelSpec,
) -> Result<SolutionTrajectory> {
    quad.validate()?;
    duhamel.validate()?;
    let horizon = problem.horizon();
    if times.is_empty() {
        return Err(Error::InvalidArgument("no output times requested".into()));
    }
    let tol = 1e-12 * horizon;
    if times.iter().any(|&t| !(t > 0.0 && t <= horizon + tol)) || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "output times must increase strictly inside (0, {horizon}]"
        )));
    }

    let grid = *problem.grid();
    let dim = grid.dim();
    let forced = !problem.forcing().is_none();

    // Duhamel nodes per output time, and the sorted union on which the
    // cumulative exponent J(s) = \int_0^s psi is tabulated.
    let node_sets: Vec<Vec<(f64, f64)>> = if forced {
        times.iter().map(|&t| duhamel.nodes(horizon, t)).collect()
    } else {
        Vec::new()
    };
    let mut all_nodes: Vec<f64> = node_sets.iter().flatten().map(|n| n.0).chain(times.iter().copied()).collect();
    all_nodes.sort_by(f64::total_cmp);
    all_nodes.dedup();
    let position = |x: f64| all_nodes.binary_search_by(|p| p.total_cmp(&x)).expect("node tabulated");

    let sym = problem.symbol();
    let policy = problem.zero_mode();
    let u0 = problem.u0_hat().values();

    let modes: Vec<ModeSolution> = (0..grid.len())
        .into_par_iter()
        .map(|k| -> Result<ModeSolution> {
            let xi_full = grid.frequency(k);
            let xi = &xi_full[..dim];
            let mut dropped = false;

            let (cumulative, forcing) = if forced {
                let mut j = Vec::with_capacity(all_nodes.len());
                let mut f = Vec::with_capacity(all_nodes.len());
                let mut acc = Complex64::new(0.0, 0.0);
                let mut prev = 0.0;
                for &x in &all_nodes {
                    let (i, d) = exponent(sym, prev, x, xi, quad, policy)?;
                    dropped |= d;
                    acc += i.value;
                    prev = x;
                    j.push(acc);
                    f.push(problem.forcing().eval(x, k, xi)?);
                }
                (j, f)
            } else {
                (Vec::new(), Vec::new())
            };

            let mut values = Vec::with_capacity(times.len());
            let mut re_exponent = Vec::with_capacity(times.len());
            let mut error = Vec::with_capacity(times.len());
            for (ti, &t) in times.iter().enumerate() {
                let (direct, d) = exponent(sym, 0.0, t, xi, quad, policy)?;
                dropped |= d;
                re_exponent.push(direct.value.re);
                error.push(direct.abs_err);
                let homogeneous = LogComplex::exp(direct.value) * LogComplex::from_complex(u0[k]);
                if !forced {
                    values.push(homogeneous);
                    continue;
                }
                let jt = cumulative[position(t)];
                let terms = node_sets[ti].iter().map(|&(s, w)| {
                    let p = position(s);
                    LogComplex::exp(jt - cumulative[p]) * LogComplex::from_complex(forcing[p] * w)
                });
                values.push(LogComplex::sum(std::iter::once(homogeneous).chain(terms)));
            }
            Ok(ModeSolution {
                values,
                re_exponent,
                error,
                dropped,
            })
        })
        .collect::<Result<_>>()?;

    let mut log_values = Vec::with_capacity(times.len());
    let mut snapshots = Vec::with_capacity(times.len());
    for (ti, &t) in times.iter().enumerate() {
        let logs: Vec<LogComplex> = modes.iter().map(|m| m.values[ti]).collect();
        let max_re = modes.iter().map(|m| m.re_exponent[ti]).fold(f64::NEG_INFINITY, f64::max);
        let err = modes.iter().map(|m| m.error[ti]).fold(0.0, f64::max);
        snapshots.push(Snapshot::from_log_values(grid, t, &logs, max_re, err)?);
        log_values.push(logs);
    }

    Ok(SolutionTrajectory {
        grid,
        log_values,
        snapshots,
        symbol: sym.descriptor().to_json(quad),
        quad: *quad,
        duhamel: duhamel.clone(),
        dropped_modes: modes.iter().filter(|m| m.dropped).count(),
    })
}
