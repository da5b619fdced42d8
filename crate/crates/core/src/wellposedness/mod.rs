//! Quantitative checks of the integrability hypotheses behind existence and
//! uniqueness.
//!
//! Every check evaluates its bound with a fixed composite time rule at `N`,
//! `2N` and `4N` panels (`N = quad.panels`, rule and layout from `quad`) and
//! lattice sums over `B_R = {|xi| < R}`. A bound is reported `finite` when the
//! finest value is below [`BLOWUP_THRESHOLD`] and both refinement steps change
//! it by less than [`REFINEMENT_TOLERANCE`] (relative). These are certificates
//! about samples, not proofs about the continuum integrals.

mod conditions;
mod log;
mod second_order;
mod weighted;

pub use conditions::{check_condition_a, check_condition_b};
pub use log::{check_log_conditions, LogConditionsReport, LogCheckOptions};
pub use second_order::check_second_order;
pub use weighted::{
    check_weight_lower_bounds, check_weighted, check_weighted_integral, solution_lpq_norm, WeightSpec,
};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;
use crate::quadrature::QuadratureSpec;
use crate::spectral::SpectralGrid;

/// Bounds at or above this value are treated as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;
/// Largest accepted relative change between successive refinements.
pub const REFINEMENT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConditionId {
    /// Propagated initial data and forcing are locally integrable.
    CondA,
    /// As `CondA`, weighted by `|psi|` and integrated once more in time.
    CondB,
    /// Time-integrated `L_{q'}` weighted condition.
    WeightedIntegral,
    /// Mixed `L_{p,inf}` weighted condition with its a-priori bound.
    WeightedLpInf,
    Log0,
    Log1,
    Log2,
    SecondOrderLp,
    WeightLowerBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub panels: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub params: Value,
    pub bound: f64,
    pub finite: bool,
    pub refinement: Vec<RefinementLevel>,
    /// Named partial values (e.g. initial-data and forcing terms).
    pub components: Map<String, Value>,
    pub threshold: f64,
    pub quadrature: QuadratureSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionReport {
    pub(crate) fn new(condition: ConditionId, params: Value, quad: &QuadratureSpec) -> Self {
        Self {
            condition,
            params,
            bound: 0.0,
            finite: true,
            refinement: Vec::new(),
            components: Map::new(),
            threshold: BLOWUP_THRESHOLD,
            quadrature: *quad,
            symbol: None,
            note: None,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub(crate) fn component(&mut self, name: &str, value: f64) {
        self.components.insert(name.to_string(), finite_or_null(value));
    }

    /// Runs `eval` at `N`, `2N`, `4N` panels and fills `bound`, `finite` and
    /// the refinement history. `eval` returns the bound and named components.
    pub(crate) fn refine<F>(mut self, base: usize, mut eval: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<(f64, Vec<(&'static str, f64)>)>,
    {
        let mut last = Vec::new();
        for panels in [base, 2 * base, 4 * base] {
            let (bound, parts) = eval(panels)?;
            self.refinement.push(RefinementLevel { panels, bound });
            last = parts;
        }
        for (name, v) in last {
            self.component(name, v);
        }
        let (finite, bound, note) = assess(&self.refinement);
        self.bound = bound;
        self.finite = finite;
        self.note = note;
        Ok(self)
    }
}

pub(crate) fn assess(levels: &[RefinementLevel]) -> (bool, f64, Option<String>) {
    let bound = levels.last().map_or(0.0, |l| l.bound);
    if levels.iter().any(|l| !l.bound.is_finite()) {
        return (false, bound, Some("non-finite value at some refinement level".into()));
    }
    if bound >= BLOWUP_THRESHOLD {
        return (false, bound, Some(format!("bound exceeds blow-up threshold {BLOWUP_THRESHOLD:e}")));
    }
    for w in levels.windows(2) {
        let change = (w[1].bound - w[0].bound).abs();
        if change > REFINEMENT_TOLERANCE * w[1].bound.abs() && change > f64::MIN_POSITIVE {
            return (
                false,
                bound,
                Some(format!(
                    "refinement {} -> {} panels changed the bound by {:.3e} (relative {:.3e})",
                    w[0].panels,
                    w[1].panels,
                    change,
                    change / w[1].bound.abs().max(f64::MIN_POSITIVE)
                )),
            );
        }
    }
    (true, bound, None)
}

pub(crate) fn finite_or_null(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Modes of `B_R` with their frequency vectors.
pub(crate) fn ball(grid: &SpectralGrid, radius: f64) -> Result<Vec<(usize, Vec<f64>)>> {
    let d = grid.dim();
    Ok(grid
        .ball_modes(radius)?
        .into_iter()
        .map(|k| (k, grid.frequency(k)[..d].to_vec()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn levels(b: &[f64]) -> Vec<RefinementLevel> {
        b.iter().enumerate().map(|(i, &bound)| RefinementLevel { panels: 8 << i, bound }).collect()
    }

    #[test]
    fn finiteness_semantics() {
        assert!(assess(&levels(&[1.0, 1.001, 1.0011])).0);
        assert!(assess(&levels(&[0.0, 0.0, 0.0])).0);
        assert!(!assess(&levels(&[1.0, 1.1, 1.2])).0);
        assert!(!assess(&levels(&[2e12, 2e12, 2e12])).0);
        assert!(!assess(&levels(&[1.0, f64::INFINITY, 1.0])).0);
    }

    #[test]
    fn non_finite_components_serialize_as_null() {
        let mut r = ConditionReport::new(ConditionId::CondA, Value::Null, &QuadratureSpec::default());
        r.component("x", f64::INFINITY);
        r.bound = f64::NAN;
        let s = serde_json::to_string(&r.to_json()).unwrap();
        assert!(s.contains("\"x\":null"));
        assert!(s.contains("\"bound\":null"));
        assert!(s.contains("\"condition\":\"CondA\""));
    }
}
