use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a variable inside a [`StandardFormLp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub label: String,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded above.
    pub upper: f64,
    pub cost: f64,
}

/// One `terms · z <= rhs` row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub terms: Vec<(VarId, f64)>,
    pub rhs: f64,
}

impl Row {
    /// Constraint class used for diagnostics: the label up to the first `[`.
    pub fn class(&self) -> &str {
        self.label.split('[').next().unwrap_or(&self.label)
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Divisor applied to this row's residual when checking feasibility.
    pub fn scale(&self) -> f64 {
        self.terms.iter().fold(1.0_f64, |acc, &(_, a)| acc.max(a.abs()))
    }
}

/// `min c·z  s.t.  A·z <= b,  lo <= z <= hi`.
///
/// `>=` rows are stored negated and equalities as a pair of opposite
/// inequalities, so every row has the same orientation. Construct through
/// [`LpBuilder`], which rejects malformed input.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLp {
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl StandardFormLp {
    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.cost).collect()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, z)| v.cost * z).sum()
    }

    /// Same feasible set, objective multiplied by `factor`.
    pub fn with_scaled_objective(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() {
            return Err(Error::MalformedLp("objective factor must be finite".into()));
        }
        let mut out = self.clone();
        for v in &mut out.vars {
            v.cost *= factor;
        }
        Ok(out)
    }

    /// Append a row to an already validated problem.
    pub fn with_row(&self, label: impl Into<String>, terms: &[(VarId, f64)], rhs: f64) -> Result<Self> {
        let mut builder = LpBuilder {
            vars: self.vars.clone(),
            rows: self.rows.clone(),
        };
        builder.add_le(label, terms, rhs);
        builder.build()
    }

    pub fn class_names(&self) -> Vec<String> {
        let mut seen = BTreeMap::new();
        for r in &self.rows {
            seen.insert(r.class().to_string(), ());
        }
        seen.into_keys().collect()
    }
}

impl fmt::Display for StandardFormLp {
    /// Human-readable dump, one constraint per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "minimize")?;
        for v in self.vars.iter().filter(|v| v.cost != 0.0) {
            writeln!(f, "  {:+e} {}", v.cost, v.label)?;
        }
        writeln!(f, "subject to")?;
        for r in &self.rows {
            write!(f, "  {}:", r.label)?;
            for &(id, a) in &r.terms {
                write!(f, " {:+e} {}", a, self.vars[id.0].label)?;
            }
            writeln!(f, " <= {:e}", r.rhs)?;
        }
        writeln!(f, "bounds")?;
        for v in &self.vars {
            if v.upper.is_finite() {
                writeln!(f, "  {:e} <= {} <= {:e}", v.lower, v.label, v.upper)?;
            } else {
                writeln!(f, "  {:e} <= {}", v.lower, v.label)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default, Clone)]
pub struct LpBuilder {
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, label: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.vars.push(Variable {
            label: label.into(),
            lower,
            upper,
            cost,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn set_cost(&mut self, var: VarId, cost: f64) {
        self.vars[var.0].cost = cost;
    }

    pub fn add_le(&mut self, label: impl Into<String>, terms: &[(VarId, f64)], rhs: f64) {
        self.rows.push(Row {
            label: label.into(),
            terms: terms.to_vec(),
            rhs,
        });
    }

    pub fn add_ge(&mut self, label: impl Into<String>, terms: &[(VarId, f64)], rhs: f64) {
        let negated: Vec<_> = terms.iter().map(|&(v, a)| (v, -a)).collect();
        self.add_le(label, &negated, -rhs);
    }

    pub fn add_eq(&mut self, label: impl Into<String>, terms: &[(VarId, f64)], rhs: f64) {
        let label = label.into();
        self.add_le(label.clone(), terms, rhs);
        self.add_ge(label, terms, rhs);
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn build(self) -> Result<StandardFormLp> {
        let n = self.vars.len();
        for v in &self.vars {
            if !v.cost.is_finite() {
                return Err(Error::MalformedLp(format!("non-finite cost on {}", v.label)));
            }
            if !v.lower.is_finite() {
                return Err(Error::MalformedLp(format!("lower bound of {} must be finite", v.label)));
            }
            if v.upper.is_nan() || v.upper == f64::NEG_INFINITY || v.lower > v.upper {
                return Err(Error::MalformedLp(format!(
                    "bounds of {} are inconsistent: [{}, {}]",
                    v.label, v.lower, v.upper
                )));
            }
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in self.rows {
            if !row.rhs.is_finite() {
                return Err(Error::MalformedLp(format!("non-finite rhs on {}", row.label)));
            }
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for &(id, a) in &row.terms {
                if id.0 >= n {
                    return Err(Error::MalformedLp(format!(
                        "row {} references undeclared variable {}",
                        row.label, id.0
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::MalformedLp(format!("non-finite coefficient in {}", row.label)));
                }
                *merged.entry(id.0).or_insert(0.0) += a;
            }
            rows.push(Row {
                label: row.label,
                terms: merged
                    .into_iter()
                    .filter(|&(_, a)| a != 0.0)
                    .map(|(i, a)| (VarId(i), a))
                    .collect(),
                rhs: row.rhs,
            });
        }
        Ok(StandardFormLp { vars: self.vars, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ge_and_eq_are_stored_as_le_rows() {
        let mut b = LpBuilder::new();
        let x = b.add_var("x", 0.0, 1.0, 1.0);
        b.add_ge("g", &[(x, 2.0)], 1.0);
        b.add_eq("e", &[(x, 1.0)], 0.5);
        let lp = b.build().unwrap();
        assert_eq!(lp.num_rows(), 3);
        assert_eq!(lp.rows()[0].terms, vec![(x, -2.0)]);
        assert_eq!(lp.rows()[0].rhs, -1.0);
        assert_eq!(lp.rows()[1].rhs, 0.5);
        assert_eq!(lp.rows()[2].rhs, -0.5);
    }

    #[test]
    fn rejects_malformed_input() {
        let mut b = LpBuilder::new();
        b.add_var("x", 1.0, 0.0, 0.0);
        assert!(matches!(b.build(), Err(Error::MalformedLp(_))));

        let mut b = LpBuilder::new();
        b.add_var("x", 0.0, 1.0, f64::NAN);
        assert!(b.build().is_err());

        let mut b = LpBuilder::new();
        b.add_var("x", 0.0, 1.0, 0.0);
        b.add_le("r", &[(VarId(3), 1.0)], 1.0);
        assert!(b.build().is_err());

        let mut b = LpBuilder::new();
        let x = b.add_var("x", 0.0, 1.0, 0.0);
        b.add_le("r", &[(x, f64::INFINITY)], 1.0);
        assert!(b.build().is_err());

        let mut b = LpBuilder::new();
        b.add_var("x", f64::NEG_INFINITY, 1.0, 0.0);
        assert!(b.build().is_err());
    }

    #[test]
    fn duplicate_terms_are_merged() {
        let mut b = LpBuilder::new();
        let x = b.add_var("x", 0.0, 1.0, 0.0);
        b.add_le("r", &[(x, 1.0), (x, 2.0)], 1.0);
        let lp = b.build().unwrap();
        assert_eq!(lp.rows()[0].terms, vec![(x, 3.0)]);
    }

    #[test]
    fn dump_has_one_line_per_constraint() {
        let mut b = LpBuilder::new();
        let x = b.add_var("x", 0.0, f64::INFINITY, -1.0);
        b.add_le("cap", &[(x, 1.0)], 1.0);
        b.add_ge("floor", &[(x, 1.0)], 0.0);
        let text = b.build().unwrap().to_string();
        assert_eq!(text.lines().filter(|l| l.contains("<=") && l.contains(':')).count(), 2);
        assert!(text.contains("cap:"));
    }
}
