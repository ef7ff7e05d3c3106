//! Linear unit commitment over a fixed horizon with one aggregated hydro
//! reservoir.
//!
//! Decision variables per step `t`: power `x[t,j]` of every non-hydro
//! source (MW), turbined water `vh[t]` and end-of-step reservoir volume
//! `v[t]`. Volumes enter the LP in hm³ (10⁶ m³) so that reservoir rows
//! keep magnitudes comparable to the power rows; the returned schedule is
//! in m³.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, validate_solution, FeasibilityReport, LpBuilder, LpStatus, StandardFormLp, VarId};
use crate::power_system_data::{AvailabilityKind, AvailabilityProfile, DemandProfile, SourceSpec, SystemCapacity};

/// Cubic metres per LP volume unit.
pub const M3_PER_LP_VOLUME: f64 = 1e6;

/// Joules per MWh.
const J_PER_MWH: f64 = 3.6e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroParams {
    pub eta: f64,
    /// kg/m³
    pub water_density: f64,
    /// m/s²
    pub gravity: f64,
    /// m
    pub head: f64,
    /// Hydro generation cost, currency per kWh.
    pub cost_per_kwh: f64,
    /// m³
    pub v0: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// g CO₂ per kWh.
    pub emission_rate: f64,
}

/// Aggregated reservoir and turbine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroSystem {
    pub eta: f64,
    pub water_density: f64,
    pub gravity: f64,
    pub head: f64,
    /// MWh produced per m³ turbined.
    pub rho: f64,
    /// Currency per m³ turbined.
    pub omega: f64,
    pub v0: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub emission_rate: f64,
}

/// `η · d · g · H / 3.6e9`, MWh per m³.
pub fn hydro_efficiency(eta: f64, water_density: f64, gravity: f64, head: f64) -> f64 {
    eta * water_density * gravity * head / J_PER_MWH
}

impl HydroSystem {
    pub fn new(p: HydroParams) -> Result<Self> {
        for (name, value) in [
            ("eta", p.eta),
            ("water_density", p.water_density),
            ("gravity", p.gravity),
            ("head", p.head),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::validation(format!("hydro {name} must be positive, got {value}")));
            }
        }
        if !(p.cost_per_kwh >= 0.0) || !(p.emission_rate >= 0.0) {
            return Err(Error::validation("hydro cost and emission rate must be non-negative"));
        }
        if !(p.v_min >= 0.0 && p.v_min <= p.v0 && p.v0 <= p.v_max) || !p.v_max.is_finite() {
            return Err(Error::validation(format!(
                "reservoir volumes must satisfy 0 <= v_min <= v0 <= v_max, got {} / {} / {}",
                p.v_min, p.v0, p.v_max
            )));
        }
        let rho = hydro_efficiency(p.eta, p.water_density, p.gravity, p.head);
        Ok(HydroSystem {
            eta: p.eta,
            water_density: p.water_density,
            gravity: p.gravity,
            head: p.head,
            rho,
            omega: p.cost_per_kwh * 1000.0 * rho,
            v0: p.v0,
            v_min: p.v_min,
            v_max: p.v_max,
            emission_rate: p.emission_rate,
        })
    }

    /// m³ of water needed to produce `mwh`.
    pub fn volume_for_energy(&self, mwh: f64) -> f64 {
        mwh / self.rho
    }
}

/// Reservoir sized to the hydro share of the horizon's energy.
///
/// η = 0.85, d = 1000 kg/m³, g = 9.81 m/s², H = 80 m;
/// `v0 = share × p_max × horizon / ρ`, `v_min = 0.7 v0`, `v_max = 2 v0`,
/// 24 g/kWh.
pub fn default_hydro(capacity: SystemCapacity, horizon_hours: f64, hydro_share: f64, hydro_cost_per_kwh: f64) -> Result<HydroSystem> {
    if !(hydro_share > 0.0 && hydro_share <= 1.0) {
        return Err(Error::validation(format!("hydro share must be in (0, 1], got {hydro_share}")));
    }
    if !(horizon_hours > 0.0) {
        return Err(Error::validation("horizon must be positive"));
    }
    let rho = hydro_efficiency(0.85, 1000.0, 9.81, 80.0);
    let v0 = hydro_share * capacity.p_max * horizon_hours / rho;
    HydroSystem::new(HydroParams {
        eta: 0.85,
        water_density: 1000.0,
        gravity: 9.81,
        head: 80.0,
        cost_per_kwh: hydro_cost_per_kwh,
        v0,
        v_min: 0.7 * v0,
        v_max: 2.0 * v0,
        emission_rate: 24.0,
    })
}

/// `steps` i.i.d. draws on `[0, v0 / 100]`, m³.
pub fn sample_inflows<R: Rng + ?Sized>(hydro: &HydroSystem, steps: usize, rng: &mut R) -> Vec<f64> {
    let dist = Uniform::new_inclusive(0.0, hydro.v0 / 100.0).expect("v0 is finite and non-negative");
    (0..steps).map(|_| dist.sample(rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpInstance {
    pub demand: DemandProfile,
    /// Non-hydro sources with their caps.
    pub sources: Vec<(SourceSpec, AvailabilityProfile)>,
    pub hydro: HydroSystem,
    /// m³ per step.
    pub inflows: Vec<f64>,
    /// Instantaneous hydro power limit, MW. `None` leaves hydro bounded by water only.
    pub hydro_power_cap: Option<f64>,
}

impl UcpInstance {
    pub fn steps(&self) -> usize {
        self.demand.len()
    }

    pub fn step_hours(&self) -> f64 {
        self.demand.step_hours
    }

    fn check(&self) -> Result<()> {
        let steps = self.steps();
        if steps == 0 {
            return Err(Error::validation("empty horizon"));
        }
        if self.inflows.len() != steps {
            return Err(Error::Dimension(format!("{} inflows for {steps} steps", self.inflows.len())));
        }
        if self.inflows.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(Error::validation("inflows must be non-negative"));
        }
        for (spec, profile) in &self.sources {
            if spec.availability == AvailabilityKind::Hydro {
                return Err(Error::validation(format!("{} is hydro; model it through HydroSystem", spec.name)));
            }
            if profile.caps.len() != steps {
                return Err(Error::Dimension(format!(
                    "{} has {} caps for {steps} steps",
                    spec.name,
                    profile.caps.len()
                )));
            }
            if profile.caps.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
                return Err(Error::validation(format!("{} has negative caps", spec.name)));
            }
        }
        if let Some(cap) = self.hydro_power_cap {
            if !(cap >= 0.0) {
                return Err(Error::validation("hydro power cap must be non-negative"));
            }
        }
        Ok(())
    }

    /// First step where demand exceeds the most every source could deliver.
    pub fn first_shortfall(&self) -> Option<(usize, f64, f64)> {
        let dt = self.step_hours();
        let mut water = self.hydro.v0 - self.hydro.v_min;
        for t in 0..self.steps() {
            water += self.inflows[t];
            let mut hydro_mw = water.max(0.0) * self.hydro.rho / dt;
            if let Some(cap) = self.hydro_power_cap {
                hydro_mw = hydro_mw.min(cap);
            }
            let available: f64 = self.sources.iter().map(|(_, p)| p.caps[t]).sum::<f64>() + hydro_mw;
            let demand = self.demand.values[t];
            if demand > available * (1.0 + 1e-12) + 1e-9 {
                return Some((t, demand, available));
            }
        }
        None
    }
}

/// The LP together with where each model quantity lives in it.
#[derive(Debug, Clone)]
pub struct UcpLp {
    pub lp: StandardFormLp,
    /// `power[t][j]`
    pub power: Vec<Vec<VarId>>,
    pub hydro_water: Vec<VarId>,
    pub reservoir: Vec<VarId>,
}

/// Compile an instance into the five constraint groups plus the optional
/// hydro power cap.
pub fn build_ucp(instance: &UcpInstance) -> Result<UcpLp> {
    instance.check()?;
    let steps = instance.steps();
    let dt = instance.step_hours();
    let h = &instance.hydro;
    let scale = M3_PER_LP_VOLUME;
    let rho = h.rho * scale;
    let v0 = h.v0 / scale;
    let v_min = h.v_min / scale;
    let v_max = h.v_max / scale;

    let mut b = LpBuilder::new();
    let mut power = Vec::with_capacity(steps);
    let mut hydro_water = Vec::with_capacity(steps);
    let mut reservoir = Vec::with_capacity(steps);
    for t in 0..steps {
        let row: Vec<VarId> = instance
            .sources
            .iter()
            .map(|(spec, profile)| b.add_var(format!("x[{t},{}]", spec.name), 0.0, profile.caps[t], spec.cost_per_mwh() * dt))
            .collect();
        power.push(row);
        hydro_water.push(b.add_var(format!("vh[{t}]"), 0.0, f64::INFINITY, h.omega * scale));
        reservoir.push(b.add_var(format!("v[{t}]"), 0.0, f64::INFINITY, 0.0));
    }

    for t in 0..steps {
        let f = instance.inflows[t] / scale;
        let vh = hydro_water[t];
        let v = reservoir[t];
        // previous volume is the constant v0 at the first step
        let prev = if t == 0 { None } else { Some(reservoir[t - 1]) };
        let prev_const = if t == 0 { v0 } else { 0.0 };

        let mut cap_terms = vec![(vh, 1.0)];
        let mut floor_terms = vec![(vh, -1.0)];
        let mut flow_terms = vec![(v, 1.0), (vh, 1.0)];
        if let Some(p) = prev {
            cap_terms.push((p, -1.0));
            floor_terms.push((p, 1.0));
            flow_terms.push((p, -1.0));
        }
        b.add_le(format!("release_cap[{t}]"), &cap_terms, prev_const + f - v_min);
        b.add_le(format!("release_floor[{t}]"), &floor_terms, v_max - prev_const - f);
        b.add_eq(format!("flow[{t}]"), &flow_terms, prev_const + f);

        let mut demand_terms: Vec<_> = power[t].iter().map(|&x| (x, 1.0)).collect();
        demand_terms.push((vh, rho / dt));
        b.add_ge(format!("demand[{t}]"), &demand_terms, instance.demand.values[t]);

        if let Some(cap) = instance.hydro_power_cap {
            b.add_le(format!("hydro_power[{t}]"), &[(vh, rho / dt)], cap);
        }
    }

    Ok(UcpLp {
        lp: b.build()?,
        power,
        hydro_water,
        reservoir,
    })
}

/// Optimal dispatch over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSchedule {
    /// Non-hydro source names, column order of `power`.
    pub sources: Vec<String>,
    /// `power[t][j]`, MW.
    pub power: Vec<Vec<f64>>,
    /// m³ turbined per step.
    pub hydro_water: Vec<f64>,
    /// m³ at the end of each step.
    pub reservoir: Vec<f64>,
    /// Generation cost in the source table's currency.
    pub total_cost: f64,
    pub step_hours: f64,
    /// MWh per m³, copied from the hydro system.
    pub rho: f64,
}

impl DispatchSchedule {
    pub fn steps(&self) -> usize {
        self.power.len()
    }

    /// Hydro output per step, MW.
    pub fn hydro_power(&self) -> Vec<f64> {
        self.hydro_water
            .iter()
            .map(|vh| vh * self.rho / self.step_hours)
            .collect()
    }

    /// MWh over the horizon per source, hydro last under the name `hydro_name`.
    pub fn energy_by_source(&self, hydro_name: &str) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .sources
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let e = self.power.iter().map(|row| row[j] * self.step_hours).sum();
                (name.clone(), e)
            })
            .collect();
        out.push((hydro_name.to_string(), self.hydro_water.iter().map(|vh| vh * self.rho).sum()));
        out
    }

    /// Worst violation of each schedule invariant against `instance`.
    ///
    /// Flow and reservoir residuals are relative to `v0`; demand and cap
    /// residuals are in MW.
    pub fn violations(&self, instance: &UcpInstance) -> DispatchViolations {
        let h = &instance.hydro;
        let dt = self.step_hours;
        let mut out = DispatchViolations::default();
        let mut prev = h.v0;
        for t in 0..self.steps() {
            let v = self.reservoir[t];
            let expected = prev - self.hydro_water[t] + instance.inflows[t];
            out.flow = out.flow.max((v - expected).abs() / h.v0.max(1.0));
            let outside = (h.v_min - v).max(v - h.v_max).max(0.0);
            out.reservoir = out.reservoir.max(outside / h.v0.max(1.0));
            let supplied: f64 = self.power[t].iter().sum::<f64>() + h.rho / dt * self.hydro_water[t];
            out.demand = out.demand.max(instance.demand.values[t] - supplied);
            for (j, (_, profile)) in instance.sources.iter().enumerate() {
                let x = self.power[t][j];
                out.caps = out.caps.max((-x).max(x - profile.caps[t]));
            }
            out.caps = out.caps.max(-self.hydro_water[t]);
            prev = v;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DispatchViolations {
    pub flow: f64,
    pub reservoir: f64,
    pub demand: f64,
    pub caps: f64,
}

impl DispatchViolations {
    pub fn max(&self) -> f64 {
        self.flow.max(self.reservoir).max(self.demand).max(self.caps)
    }
}

/// Solved schedule plus the LP-level feasibility check of the solution.
#[derive(Debug, Clone)]
pub struct UcpSolution {
    pub schedule: DispatchSchedule,
    pub feasibility: FeasibilityReport,
}

pub fn solve_ucp(instance: &UcpInstance) -> Result<DispatchSchedule> {
    solve_ucp_checked(instance).map(|s| s.schedule)
}

pub fn solve_ucp_checked(instance: &UcpInstance) -> Result<UcpSolution> {
    let model = build_ucp(instance)?;
    if let Some((hour, demand_mw, available_mw)) = instance.first_shortfall() {
        return Err(Error::UcpInfeasible {
            hour,
            demand_mw,
            available_mw,
        });
    }
    let solution = solve_lp(&model.lp)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::UcpLpInfeasible),
        LpStatus::Unbounded => return Err(Error::SolverFailure("unit commitment LP reported unbounded".into())),
    }
    let feasibility = validate_solution(&model.lp, &solution.values)?;
    let z = &solution.values;
    let schedule = DispatchSchedule {
        sources: instance.sources.iter().map(|(s, _)| s.name.clone()).collect(),
        power: model
            .power
            .iter()
            .map(|row| row.iter().map(|v| z[v.0]).collect())
            .collect(),
        hydro_water: model.hydro_water.iter().map(|v| z[v.0] * M3_PER_LP_VOLUME).collect(),
        reservoir: model.reservoir.iter().map(|v| z[v.0] * M3_PER_LP_VOLUME).collect(),
        total_cost: solution.objective_value,
        step_hours: instance.step_hours(),
        rho: instance.hydro.rho,
    };
    Ok(UcpSolution { schedule, feasibility })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_system_data::SourceTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn thermal(name: &str, cost: f64, cap: f64, steps: usize) -> (SourceSpec, AvailabilityProfile) {
        (
            SourceSpec {
                name: name.into(),
                mix_share: 0.1,
                emission_rate: 100.0,
                unit_cost: cost,
                availability: AvailabilityKind::Constant,
            },
            AvailabilityProfile {
                source: name.into(),
                caps: vec![cap; steps],
            },
        )
    }

    fn no_headroom_hydro() -> HydroSystem {
        HydroSystem::new(HydroParams {
            eta: 0.85,
            water_density: 1000.0,
            gravity: 9.81,
            head: 80.0,
            cost_per_kwh: 1.0,
            v0: 1e6,
            v_min: 1e6,
            v_max: 2e6,
            emission_rate: 24.0,
        })
        .unwrap()
    }

    #[test]
    fn derived_hydro_constants() {
        let h = default_hydro(SystemCapacity::default(), 24.0, 0.284, 1128.0).unwrap();
        let rho = 0.85 * 1000.0 * 9.81 * 80.0 / 3.6e9;
        assert_eq!(h.rho, rho);
        // 667 080 / 3.6e9
        assert!((h.rho - 1.853e-4).abs() < 1e-9 * 1.853e-4);
        assert!((h.omega - 209.0184).abs() < 1e-9 * 209.0184);
        assert!((h.v0 - 1.704_84e9).abs() / 1.704_84e9 < 1e-5);
        assert_eq!(h.v_min, 0.7 * h.v0);
        assert_eq!(h.v_max, 2.0 * h.v0);
        assert_eq!(h.emission_rate, 24.0);
    }

    #[test]
    fn default_hydro_rejects_bad_share() {
        assert!(default_hydro(SystemCapacity::default(), 24.0, 0.0, 1.0).is_err());
        assert!(default_hydro(SystemCapacity::default(), 0.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn inflows_are_seeded_and_bounded() {
        let h = default_hydro(SystemCapacity::default(), 24.0, 0.284, 1128.0).unwrap();
        let a = sample_inflows(&h, 24, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_inflows(&h, 24, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert!(a.iter().all(|&f| (0.0..=h.v0 / 100.0).contains(&f)));
    }

    #[test]
    fn inflow_sample_mean_within_three_sigma() {
        // uniform on [0, c]: mean c/2, sd c/sqrt(12)
        let h = default_hydro(SystemCapacity::default(), 24.0, 0.284, 1128.0).unwrap();
        let c = h.v0 / 100.0;
        let n = 10_000;
        let draws = sample_inflows(&h, n, &mut ChaCha8Rng::seed_from_u64(11));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let bound = 3.0 * c / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - c / 2.0).abs() < bound, "{mean} vs {}", c / 2.0);
    }

    #[test]
    fn structure_of_single_step_lp() {
        let inst = UcpInstance {
            demand: DemandProfile::new(vec![10.0], 1.0).unwrap(),
            sources: vec![thermal("coal", 2e6, 20.0, 1)],
            hydro: no_headroom_hydro(),
            inflows: vec![0.0],
            hydro_power_cap: None,
        };
        let m = build_ucp(&inst).unwrap();
        assert_eq!(m.lp.num_vars(), 3);
        let classes = m.lp.class_names();
        assert_eq!(classes, ["demand", "flow", "release_cap", "release_floor"]);
    }

    #[test]
    fn hydro_objective_coefficient_is_omega() {
        let table = SourceTable::vietnam_2023();
        let h = default_hydro(SystemCapacity::default(), 3.0, 0.284, 1128.0).unwrap();
        let inst = UcpInstance {
            demand: DemandProfile::new(vec![1.0; 3], 1.0).unwrap(),
            sources: vec![thermal("coal", table.get("coal").unwrap().unit_cost, 10.0, 3)],
            hydro: h,
            inflows: vec![0.0; 3],
            hydro_power_cap: Some(100.0),
        };
        let m = build_ucp(&inst).unwrap();
        for v in &m.hydro_water {
            assert_eq!(m.lp.variables()[v.0].cost, h.omega * M3_PER_LP_VOLUME);
        }
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let h = default_hydro(SystemCapacity::default(), 4.0, 0.284, 1128.0).unwrap();
        let inst = UcpInstance {
            demand: DemandProfile::new(vec![0.0; 4], 1.0).unwrap(),
            sources: vec![thermal("coal", 2e6, 10.0, 4), thermal("gas", 1e6, 5.0, 4)],
            hydro: h,
            inflows: vec![0.0; 4],
            hydro_power_cap: None,
        };
        let s = solve_ucp(&inst).unwrap();
        assert!(s.power.iter().flatten().all(|&x| x.abs() < 1e-9));
        assert!(s.hydro_water.iter().all(|&x| x.abs() < 1e-3));
        assert!(s.total_cost.abs() < 1e-6);
    }

    #[test]
    fn single_source_meets_demand_exactly() {
        let demand = vec![3.0, 7.5, 1.0];
        let inst = UcpInstance {
            demand: DemandProfile::new(demand.clone(), 1.0).unwrap(),
            sources: vec![thermal("coal", 2e6, 10.0, 3)],
            hydro: no_headroom_hydro(),
            inflows: vec![0.0; 3],
            hydro_power_cap: None,
        };
        let s = solve_ucp(&inst).unwrap();
        for (row, d) in s.power.iter().zip(&demand) {
            assert!((row[0] - d).abs() < 1e-9);
        }
    }

    #[test]
    fn shortfall_names_first_hour() {
        let inst = UcpInstance {
            demand: DemandProfile::new(vec![5.0, 50.0, 60.0], 1.0).unwrap(),
            sources: vec![thermal("coal", 2e6, 10.0, 3)],
            hydro: no_headroom_hydro(),
            inflows: vec![0.0; 3],
            hydro_power_cap: None,
        };
        match solve_ucp(&inst) {
            Err(Error::UcpInfeasible { hour, .. }) => assert_eq!(hour, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let inst = UcpInstance {
            demand: DemandProfile::new(vec![5.0, 5.0], 1.0).unwrap(),
            sources: vec![thermal("coal", 2e6, 10.0, 3)],
            hydro: no_headroom_hydro(),
            inflows: vec![0.0; 2],
            hydro_power_cap: None,
        };
        assert!(matches!(build_ucp(&inst), Err(Error::Dimension(_))));
    }
}
