use serde_json::json;

use super::{ConditionId, ConditionReport};
use crate::error::{Error, Result};
use crate::quadrature::{lp_norm_fixed, QuadratureSpec};
use crate::symbols::{Coefficient, SecondOrderSymbol, Symbol};

/// `sum_ij ||a_ij||_{L_p(0,t)} + sum_j ||b_j||_{L_p(0,t)} + ||c||_{L_p(0,t)}`.
/// Breakpoint tables are integrated exactly; closures use fixed panels.
pub fn check_second_order(sym: &SecondOrderSymbol, p: f64, t: f64, quad: &QuadratureSpec) -> Result<ConditionReport> {
    quad.validate()?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in [1, inf], got {p}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be positive and finite, got {t}")));
    }
    let mut report = ConditionReport::new(ConditionId::SecondOrderLp, json!({ "p": p, "t": t }), quad);
    report.symbol = Some(sym.descriptor().to_json(quad));
    report.refine(quad.panels, |panels| {
        let norm = |c: &Coefficient| -> Result<f64> {
            match c {
                Coefficient::Piecewise(pc) => Ok(pc.lp_norm(0.0, t, p)),
                Coefficient::Closure { f, .. } => lp_norm_fixed(quad, 0.0, t, p, panels, |r| Ok(f(r).norm())),
            }
        };
        let a = sym.a().iter().map(norm).sum::<Result<f64>>()?;
        let b = sym.b().iter().map(norm).sum::<Result<f64>>()?;
        let c = norm(sym.c())?;
        Ok((a + b + c, vec![("a", a), ("b", b), ("c", c)]))
    })
}
