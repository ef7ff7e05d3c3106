use super::{AllocationMatrix, ChargingInstance};
use crate::error::Result;
use crate::lp::{LpBuilder, StandardFormLp, VarId};

/// The charging problem as an explicit LP. Only in-window powers become
/// variables, so window exclusivity holds by construction.
#[derive(Debug, Clone)]
pub struct ChargingLp {
    pub lp: StandardFormLp,
    /// `(session index, step, variable)`.
    pub vars: Vec<(usize, usize, VarId)>,
}

impl ChargingLp {
    pub fn allocation(&self, values: &[f64], instance: &ChargingInstance) -> AllocationMatrix {
        let mut alloc = AllocationMatrix::zeros(instance.steps(), instance.sessions.len());
        for &(i, t, v) in &self.vars {
            alloc.set(t, i, values[v.0].clamp(0.0, instance.socket_kw));
        }
        alloc
    }
}

/// Variables `y[t,i]` in kW with cost `(π_t + λ π^CO₂_t) δ`; rows
/// `demand[i]: Σ_t δ y ≥ L_i` and `station[t]: Σ_i y ≤ C_t`.
pub fn build_charging_lp(instance: &ChargingInstance) -> Result<ChargingLp> {
    instance.validate()?;
    let dt = instance.step_hours;
    let mut b = LpBuilder::new();
    let mut vars = Vec::new();
    let mut by_step: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); instance.steps()];
    for (i, s) in instance.sessions.iter().enumerate() {
        let mut row = Vec::with_capacity(s.dwell_steps());
        for t in s.window() {
            let v = b.add_var(format!("y[{t},{}]", s.id), 0.0, instance.socket_kw, instance.effective_price(t) * dt);
            vars.push((i, t, v));
            row.push((v, dt));
            by_step[t].push((v, 1.0));
        }
        b.add_ge(format!("demand[{}]", s.id), &row, s.demand_kwh);
    }
    for (t, terms) in by_step.iter().enumerate() {
        if !terms.is_empty() {
            b.add_le(format!("station[{t}]"), terms, instance.station_capacity[t]);
        }
    }
    Ok(ChargingLp { lp: b.build()?, vars })
}
