//! Linear programs in one canonical form and an exact solver for them.
//!
//! Both the unit-commitment model and the explicit charging model compile to
//! [`StandardFormLp`]. [`solve_lp`] is a bundled simplex implementation and
//! [`validate_solution`] independently checks any assignment.

mod problem;
mod simplex;
mod validate;

use serde::Serialize;

pub use problem::{LpBuilder, Row, StandardFormLp, VarId, Variable};
pub use simplex::solve_lp;
pub use validate::{validate_solution, FeasibilityReport};

/// Absolute tolerance on scaled row residuals and bounds.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless `status` is optimal.
    pub values: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    fn infeasible() -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective_value: f64::INFINITY,
        }
    }

    fn unbounded() -> Self {
        LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value: f64::NEG_INFINITY,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
