use serde::{Deserialize, Serialize};

use super::run::{RunReport, FIFS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Moments {
            mean,
            sd,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub lambda: f64,
    pub cost: Moments,
    pub emissions_kg: Moments,
    /// `(FIFS − policy) / FIFS` of the mean cost, percent.
    pub delta_cost_vs_fifs: f64,
    /// Same for mean emissions.
    pub delta_emissions_vs_fifs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub runs: usize,
    pub policies: Vec<PolicySummary>,
}

impl SummaryStats {
    pub fn policy(&self, name: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.policy == name)
    }
}

/// Aggregate reports that all carry the same policies, FIFS among them.
pub fn summarize(reports: &[RunReport]) -> Result<SummaryStats> {
    let first = reports
        .first()
        .ok_or_else(|| Error::validation("no runs to summarize"))?;
    let names: Vec<(String, f64)> = first
        .policies
        .iter()
        .map(|p| (p.policy.clone(), p.lambda))
        .collect();
    let column = |name: &str| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut cost = Vec::with_capacity(reports.len());
        let mut mass = Vec::with_capacity(reports.len());
        for r in reports {
            let p = r
                .policy(name)
                .ok_or_else(|| Error::validation(format!("run {} lacks policy {name}", r.seeds.run)))?;
            cost.push(p.energy_cost);
            mass.push(p.emission_mass_kg);
        }
        Ok((cost, mass))
    };
    let (fifs_cost, fifs_mass) = column(FIFS)?;
    let fifs_cost = Moments::of(&fifs_cost).mean;
    let fifs_mass = Moments::of(&fifs_mass).mean;
    let delta = |fifs: f64, x: f64| if fifs == 0.0 { 0.0 } else { 100.0 * (fifs - x) / fifs };
    let mut policies = Vec::with_capacity(names.len());
    for (name, lambda) in names {
        let (cost, mass) = column(&name)?;
        let cost = Moments::of(&cost);
        let emissions_kg = Moments::of(&mass);
        policies.push(PolicySummary {
            delta_cost_vs_fifs: delta(fifs_cost, cost.mean),
            delta_emissions_vs_fifs: delta(fifs_mass, emissions_kg.mean),
            policy: name,
            lambda,
            cost,
            emissions_kg,
        });
    }
    Ok(SummaryStats {
        runs: reports.len(),
        policies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_samples() {
        let m = Moments::of(&[3.0]);
        assert_eq!((m.mean, m.sd, m.min, m.max), (3.0, 0.0, 3.0, 3.0));
        let m = Moments::of(&[1.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.sd - 2f64.sqrt()).abs() < 1e-15);
    }
}
