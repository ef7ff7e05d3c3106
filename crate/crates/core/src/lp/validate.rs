use std::collections::BTreeMap;

use serde::Serialize;

use super::problem::StandardFormLp;
use crate::error::{Error, Result};

/// Feasibility of an assignment against a [`StandardFormLp`].
///
/// Row violations are divided by `max(1, max |coefficient|)` of their row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub max_bound_violation: f64,
    pub max_row_violation: f64,
    /// Worst scaled row violation per constraint class (row label before `[`).
    pub by_class: BTreeMap<String, f64>,
    pub objective_value: f64,
}

impl FeasibilityReport {
    pub fn max_violation(&self) -> f64 {
        self.max_bound_violation.max(self.max_row_violation)
    }
}

pub fn validate_solution(lp: &StandardFormLp, values: &[f64]) -> Result<FeasibilityReport> {
    if values.len() != lp.num_vars() {
        return Err(Error::Dimension(format!(
            "assignment covers {} variables, problem has {}",
            values.len(),
            lp.num_vars()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!(
            "assignment for {} is not finite",
            lp.variables()[i].label
        )));
    }

    let max_bound_violation = lp
        .variables()
        .iter()
        .zip(values)
        .map(|(v, &z)| (v.lower - z).max(z - v.upper).max(0.0))
        .fold(0.0, f64::max);

    let mut by_class: BTreeMap<String, f64> = BTreeMap::new();
    let mut max_row_violation = 0.0_f64;
    for row in lp.rows() {
        let violation = ((row.activity(values) - row.rhs) / row.scale()).max(0.0);
        max_row_violation = max_row_violation.max(violation);
        let slot = by_class.entry(row.class().to_string()).or_insert(0.0);
        *slot = slot.max(violation);
    }

    Ok(FeasibilityReport {
        max_bound_violation,
        max_row_violation,
        by_class,
        objective_value: lp.objective_value(values),
    })
}
