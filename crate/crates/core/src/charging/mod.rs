//! Emissions-aware smart charging and its baselines.
//!
//! The optimisation minimises `Σ_t (π_t + λ·π^CO₂_t) · δ · Σ_i Y[t,i]` with
//! every session served inside its half-open window `[arrival, departure)`,
//! per-socket power at most `p⁻` and aggregate station power at most `C_t`.
//! Three exact solution paths share that contract:
//!
//! * per-session greedy fill, used when the station can never bind;
//! * min-cost flow, used when it can and all effective prices are
//!   non-negative;
//! * the explicit LP through [`crate::lp`], for everything else.
//!
//! The cost-only model is the same problem with `λ = 0`.

mod fifs;
mod flow;
mod greedy;
mod model;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpStatus};

pub use fifs::fifs_schedule;
pub use model::{build_charging_lp, ChargingLp};

/// One vehicle's visit, on the fine time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvSession {
    pub id: usize,
    /// First step the vehicle can charge.
    pub arrival: usize,
    /// First step the vehicle is gone.
    pub departure: usize,
    /// kWh requested.
    pub demand_kwh: f64,
}

impl EvSession {
    pub fn window(&self) -> std::ops::Range<usize> {
        self.arrival..self.departure
    }

    pub fn dwell_steps(&self) -> usize {
        self.departure.saturating_sub(self.arrival)
    }

    pub fn is_present(&self, step: usize) -> bool {
        self.arrival <= step && step < self.departure
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingInstance {
    pub sessions: Vec<EvSession>,
    /// Per-socket limit, kW.
    pub socket_kw: f64,
    /// Station limit per step, kW.
    pub station_capacity: Vec<f64>,
    /// Currency per kWh.
    pub energy_price: Vec<f64>,
    /// Currency per kWh.
    pub emission_price: Vec<f64>,
    pub lambda: f64,
    pub step_hours: f64,
}

impl ChargingInstance {
    pub fn steps(&self) -> usize {
        self.energy_price.len()
    }

    pub fn effective_price(&self, step: usize) -> f64 {
        self.energy_price[step] + self.lambda * self.emission_price[step]
    }

    pub fn effective_prices(&self) -> Vec<f64> {
        (0..self.steps()).map(|t| self.effective_price(t)).collect()
    }

    /// Same instance with a different trade-off weight.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        ChargingInstance {
            lambda,
            ..self.clone()
        }
    }

    pub fn total_demand(&self) -> f64 {
        self.sessions.iter().map(|s| s.demand_kwh).sum()
    }

    /// Most energy a session can take within its window.
    pub fn max_session_energy(&self, session: &EvSession) -> f64 {
        self.socket_kw * self.step_hours * session.dwell_steps() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let steps = self.steps();
        if self.emission_price.len() != steps || self.station_capacity.len() != steps {
            return Err(Error::Dimension(format!(
                "price, emission price and capacity series have lengths {}, {}, {}",
                steps,
                self.emission_price.len(),
                self.station_capacity.len()
            )));
        }
        if !(self.socket_kw > 0.0) || !self.socket_kw.is_finite() {
            return Err(Error::validation("socket power must be positive"));
        }
        if !(self.step_hours > 0.0) {
            return Err(Error::validation("step must be positive"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::validation(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if self.station_capacity.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::validation("station capacity must be non-negative"));
        }
        if self
            .energy_price
            .iter()
            .chain(&self.emission_price)
            .any(|p| !p.is_finite())
        {
            return Err(Error::validation("prices must be finite"));
        }
        for s in &self.sessions {
            if s.arrival > s.departure || s.departure > steps {
                return Err(Error::validation(format!(
                    "session {} window [{}, {}) outside [0, {steps}]",
                    s.id, s.arrival, s.departure
                )));
            }
            if !(s.demand_kwh >= 0.0) || !s.demand_kwh.is_finite() {
                return Err(Error::validation(format!("session {} has invalid demand", s.id)));
            }
        }
        Ok(())
    }

    fn check_sessions_servable(&self) -> Result<()> {
        for s in &self.sessions {
            let max_kwh = self.max_session_energy(s);
            if s.demand_kwh > max_kwh * (1.0 + 1e-12) + 1e-12 {
                return Err(Error::SessionInfeasible {
                    id: s.id,
                    demand_kwh: s.demand_kwh,
                    max_kwh,
                });
            }
        }
        Ok(())
    }

    /// True when every session could draw full socket power at once at every step.
    pub fn capacity_is_slack(&self) -> bool {
        let mut present = vec![0usize; self.steps()];
        for s in &self.sessions {
            for c in &mut present[s.window()] {
                *c += 1;
            }
        }
        present
            .iter()
            .zip(&self.station_capacity)
            .all(|(&n, &cap)| n as f64 * self.socket_kw <= cap)
    }
}

/// Charging power per step and session, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationMatrix {
    steps: usize,
    sessions: usize,
    power: Vec<f64>,
}

impl AllocationMatrix {
    pub fn zeros(steps: usize, sessions: usize) -> Self {
        AllocationMatrix {
            steps,
            sessions,
            power: vec![0.0; steps * sessions],
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sessions(&self) -> usize {
        self.sessions
    }

    pub fn get(&self, step: usize, session: usize) -> f64 {
        self.power[step * self.sessions + session]
    }

    pub fn set(&mut self, step: usize, session: usize, kw: f64) {
        self.power[step * self.sessions + session] = kw;
    }

    /// Aggregate station load per step, kW.
    pub fn step_load(&self) -> Vec<f64> {
        if self.sessions == 0 {
            return vec![0.0; self.steps];
        }
        self.power
            .chunks(self.sessions)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// kWh delivered to each session.
    pub fn session_energy(&self, step_hours: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.sessions];
        for t in 0..self.steps {
            for (i, e) in out.iter_mut().enumerate() {
                *e += self.get(t, i) * step_hours;
            }
        }
        out
    }

    /// Σ effective price × energy.
    pub fn objective(&self, instance: &ChargingInstance) -> f64 {
        self.step_load()
            .iter()
            .enumerate()
            .map(|(t, load)| instance.effective_price(t) * instance.step_hours * load)
            .sum()
    }

    /// Largest violation of the allocation invariants. Window exclusivity
    /// must hold exactly; `require_demand` adds the demand rows.
    pub fn verify(&self, instance: &ChargingInstance, require_demand: bool) -> Result<f64> {
        if self.steps != instance.steps() || self.sessions != instance.sessions.len() {
            return Err(Error::Dimension(format!(
                "allocation is {}x{}, instance is {}x{}",
                self.steps,
                self.sessions,
                instance.steps(),
                instance.sessions.len()
            )));
        }
        let mut worst = 0.0_f64;
        for (i, s) in instance.sessions.iter().enumerate() {
            for t in 0..self.steps {
                let y = self.get(t, i);
                if !s.is_present(t) && y != 0.0 {
                    return Err(Error::validation(format!("session {} charged outside its window at step {t}", s.id)));
                }
                worst = worst.max(-y).max(y - instance.socket_kw);
            }
        }
        for (load, cap) in self.step_load().iter().zip(&instance.station_capacity) {
            worst = worst.max(load - cap);
        }
        if require_demand {
            for (e, s) in self.session_energy(instance.step_hours).iter().zip(&instance.sessions) {
                worst = worst.max(s.demand_kwh - e);
            }
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Greedy when capacity is slack, flow when prices allow, LP otherwise.
    Auto,
    Greedy,
    MinCostFlow,
    Lp,
}

/// Minimum-cost allocation for the instance's `λ`.
pub fn solve_smart_charging(instance: &ChargingInstance) -> Result<AllocationMatrix> {
    solve_smart_charging_with(instance, SolveMethod::Auto)
}

/// Cost-only optimum: emission prices are ignored.
pub fn solve_power_allocation(instance: &ChargingInstance) -> Result<AllocationMatrix> {
    let cost_only = ChargingInstance {
        emission_price: vec![0.0; instance.steps()],
        lambda: 0.0,
        ..instance.clone()
    };
    solve_smart_charging(&cost_only)
}

pub fn solve_smart_charging_with(instance: &ChargingInstance, method: SolveMethod) -> Result<AllocationMatrix> {
    instance.validate()?;
    instance.check_sessions_servable()?;
    let prices = instance.effective_prices();
    let method = match method {
        SolveMethod::Auto if instance.capacity_is_slack() => SolveMethod::Greedy,
        SolveMethod::Auto if prices.iter().all(|&p| p >= 0.0) => SolveMethod::MinCostFlow,
        SolveMethod::Auto => SolveMethod::Lp,
        m => m,
    };
    match method {
        SolveMethod::Greedy => {
            if !instance.capacity_is_slack() {
                return Err(Error::validation("greedy fill requires slack station capacity"));
            }
            let columns: Vec<Vec<(usize, f64)>> = instance
                .sessions
                .par_iter()
                .map(|s| greedy::fill_session(s, &prices, instance.socket_kw, instance.step_hours))
                .collect();
            let mut alloc = AllocationMatrix::zeros(instance.steps(), instance.sessions.len());
            for (i, col) in columns.into_iter().enumerate() {
                for (t, kw) in col {
                    alloc.set(t, i, kw);
                }
            }
            Ok(alloc)
        }
        SolveMethod::MinCostFlow => {
            if prices.iter().any(|&p| p < 0.0) {
                return Err(Error::validation("min-cost flow path requires non-negative effective prices"));
            }
            flow::solve(instance, &prices)
        }
        SolveMethod::Lp => {
            // the flow network certifies aggregate feasibility and names the overloaded step
            flow::check_feasible(instance)?;
            let model = build_charging_lp(instance)?;
            let sol = solve_lp(&model.lp)?;
            match sol.status {
                LpStatus::Optimal => Ok(model.allocation(&sol.values, instance)),
                LpStatus::Infeasible => Err(Error::CapacityInfeasible { step: 0 }),
                LpStatus::Unbounded => Err(Error::SolverFailure("charging LP unbounded".into())),
            }
        }
        SolveMethod::Auto => unreachable!("resolved above"),
    }
}

/// Cost, emission and load figures of any allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    pub energy_cost: f64,
    pub emission_mass_kg: f64,
    pub emission_cost: f64,
    /// `energy_cost + λ · emission_cost`.
    pub total_objective: f64,
    /// kW per step.
    pub per_step_load: Vec<f64>,
    pub delivered_kwh: f64,
    /// Demand left unserved, kWh.
    pub shortfall_kwh: f64,
}

/// Evaluate an allocation; `intensity` is g CO₂/kWh on the fine grid.
pub fn evaluate_schedule(alloc: &AllocationMatrix, instance: &ChargingInstance, intensity: &[f64]) -> Result<ScheduleMetrics> {
    let steps = instance.steps();
    if alloc.steps() != steps || alloc.sessions() != instance.sessions.len() || intensity.len() != steps {
        return Err(Error::Dimension(format!(
            "allocation {}x{}, instance {}x{}, intensity {}",
            alloc.steps(),
            alloc.sessions(),
            steps,
            instance.sessions.len(),
            intensity.len()
        )));
    }
    let load = alloc.step_load();
    let dt = instance.step_hours;
    let mut energy_cost = 0.0;
    let mut emission_g = 0.0;
    let mut emission_cost = 0.0;
    for t in 0..steps {
        let kwh = dt * load[t];
        energy_cost += instance.energy_price[t] * kwh;
        emission_g += intensity[t] * kwh;
        emission_cost += instance.emission_price[t] * kwh;
    }
    let delivered = alloc.session_energy(dt);
    let shortfall_kwh = delivered
        .iter()
        .zip(&instance.sessions)
        .map(|(e, s)| (s.demand_kwh - e).max(0.0))
        .sum();
    Ok(ScheduleMetrics {
        energy_cost,
        emission_mass_kg: emission_g / 1000.0,
        emission_cost,
        total_objective: energy_cost + instance.lambda * emission_cost,
        per_step_load: load,
        delivered_kwh: delivered.iter().sum(),
        shortfall_kwh,
    })
}
