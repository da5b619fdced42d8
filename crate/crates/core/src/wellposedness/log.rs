use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{ball, ConditionId, ConditionReport};
use crate::error::{Error, Result};
use crate::propagator::ZeroModePolicy;
use crate::quadrature::{lp_norm_fixed, QuadratureSpec};
use crate::spectral::SpectralGrid;
use crate::symbols::{Coefficient, LogSymbol, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogCheckOptions {
    /// Number of equispaced start times `s_j = t j / S`, `j < S`, for the suprema.
    pub s_samples: usize,
    /// What to do with modes where `psi_exp` vanishes.
    pub policy: ZeroModePolicy,
}

impl Default for LogCheckOptions {
    fn default() -> Self {
        Self {
            s_samples: 16,
            policy: ZeroModePolicy::Drop,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LogConditionsReport {
    pub log0: ConditionReport,
    pub log1: ConditionReport,
    pub log2: ConditionReport,
}

impl LogConditionsReport {
    pub fn reports(&self) -> [&ConditionReport; 3] {
        [&self.log0, &self.log1, &self.log2]
    }

    pub fn all_finite(&self) -> bool {
        self.reports().iter().all(|r| r.finite)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "log0": self.log0.to_json(),
            "log1": self.log1.to_json(),
            "log2": self.log2.to_json(),
        })
    }
}

/// Log-family conditions for `psi = beta(t) log psi_exp(t, xi)`:
///
/// - `Log0`: `\int_0^t |beta|`;
/// - `Log1`: `sup_{s, xi} (t-s)^{-1} \int_s^t |psi_exp(r, xi)|^{(t-s) Re beta(r)} dr`;
/// - `Log2`: `sup_{s, xi} \int_s^t |beta(rho)| (1 + |log|psi_exp(rho, xi)||) A(s, rho, xi) drho`,
///   where `A` is the `Log1` average over `(s, rho)`.
///
/// Suprema run over `B_R` and the `s` samples of `opts`. The inner average of
/// `Log2` uses a quarter of the outer panels (at least one).
pub fn check_log_conditions(
    sym: &LogSymbol,
    grid: &SpectralGrid,
    t: f64,
    radius: f64,
    quad: &QuadratureSpec,
    opts: LogCheckOptions,
) -> Result<LogConditionsReport> {
    quad.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be positive and finite, got {t}")));
    }
    if opts.s_samples == 0 {
        return Err(Error::InvalidArgument("s_samples must be positive".into()));
    }
    let modes = ball(grid, radius)?;
    let psi_exp = sym.psi_exp();
    let beta = sym.beta();

    // Modes where psi_exp vanishes somewhere on the sampled times are dropped
    // or reported, depending on the policy.
    let probe = quad.nodes(0.0, t, 4 * quad.panels);
    let mut kept = Vec::with_capacity(modes.len());
    let mut dropped = 0usize;
    for (k, xi) in &modes {
        let mut zero = None;
        for &r in std::iter::once(&0.0).chain(probe.iter().map(|(r, _)| r)) {
            if psi_exp.eval(r, xi)?.norm() == 0.0 {
                zero = Some(r);
                break;
            }
        }
        match (zero, opts.policy) {
            (None, _) => kept.push((*k, xi.clone())),
            (Some(_), ZeroModePolicy::Drop) => dropped += 1,
            (Some(r), ZeroModePolicy::Error) => return Err(Error::ZeroArgument { t: r, xi: xi.clone() }),
        }
    }

    let samples: Vec<f64> = (0..opts.s_samples).map(|j| t * j as f64 / opts.s_samples as f64).collect();
    let params = json!({
        "t": t,
        "R": radius,
        "s_samples": opts.s_samples,
        "modes": kept.len(),
        "dropped_modes": dropped,
    });
    let descriptor = sym.descriptor().to_json(quad);

    let mut log0 = ConditionReport::new(ConditionId::Log0, params.clone(), quad);
    log0.symbol = Some(descriptor.clone());
    let log0 = log0.refine(quad.panels, |panels| {
        let v = match beta {
            Coefficient::Piecewise(pc) => pc.lp_norm(0.0, t, 1.0),
            Coefficient::Closure { f, .. } => lp_norm_fixed(quad, 0.0, t, 1.0, panels, |r| Ok(f(r).norm()))?,
        };
        Ok((v, vec![]))
    })?;

    // |psi_exp(r)|^{h Re beta(r)} averaged over [s, s + h].
    let average = |xi: &[f64], s: f64, h: f64, panels: usize| -> Result<f64> {
        if h <= 0.0 {
            return Ok(1.0);
        }
        let mut acc = 0.0;
        for (r, w) in quad.nodes(s, s + h, panels) {
            let m = psi_exp.eval(r, xi)?.norm();
            acc += w * (h * beta.eval(r).re * m.ln()).exp();
        }
        Ok(acc / h)
    };

    let mut log1 = ConditionReport::new(ConditionId::Log1, params.clone(), quad);
    log1.symbol = Some(descriptor.clone());
    let log1 = log1.refine(quad.panels, |panels| {
        let sup = kept
            .par_iter()
            .map(|(_, xi)| {
                samples
                    .iter()
                    .map(|&s| average(xi, s, t - s, panels))
                    .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((sup, vec![]))
    })?;

    let mut log2 = ConditionReport::new(ConditionId::Log2, params, quad);
    log2.symbol = Some(descriptor);
    let log2 = log2.refine(quad.panels, |panels| {
        let inner = (panels / 4).max(1);
        let sup = kept
            .par_iter()
            .map(|(_, xi)| {
                let mut m = 0.0f64;
                for &s in &samples {
                    let mut acc = 0.0;
                    for (rho, w) in quad.nodes(s, t, panels) {
                        let b = beta.eval(rho).norm();
                        if b == 0.0 {
                            continue;
                        }
                        let log = psi_exp.eval(rho, xi)?.norm().ln().abs();
                        acc += w * b * (1.0 + log) * average(xi, s, rho - s, inner)?;
                    }
                    m = m.max(acc);
                }
                Ok(m)
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((sup, vec![]))
    })?;

    Ok(LogConditionsReport { log0, log1, log2 })
}
