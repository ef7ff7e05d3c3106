use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, PriceMode};
use super::stats::{summarize, SummaryStats};
use crate::charging::{
    evaluate_schedule, fifs_schedule, solve_power_allocation, solve_smart_charging, AllocationMatrix, ChargingInstance,
    EvSession, ScheduleMetrics,
};
use crate::emissions::{carbon_intensity, emission_price, resample_hold, EmissionPriceSeries, IntensitySeries};
use crate::error::{Error, Result};
use crate::power_system_data::{
    constant_availability, hourly_demand_from_records, pv_availability_profile, read_demand_csv, read_wind_clusters,
    wind_availability_profile, AvailabilityKind, AvailabilityProfile, DemandProfile, PvParams, SourceSpec, SourceTable,
    SystemCapacity,
};
use crate::scenarios::{fit_price_model, read_price_csv, sample_fleet, sample_price_profile, PriceModel};
use crate::ucp::{default_hydro, sample_inflows, solve_ucp_checked, DispatchSchedule, HydroSystem, UcpInstance};

/// Allocations may exceed a bound by this much before a run is rejected.
const ALLOCATION_TOL: f64 = 1e-6;

pub const FIFS: &str = "fifs";
pub const POWER_ALLOCATION: &str = "power-allocation";

/// One independent random stream per run and purpose.
pub fn derive_seed(master_seed: u64, run_index: usize, stream: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((run_index as u64).to_le_bytes());
    h.update(stream.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub run: usize,
    pub inflows: u64,
    pub fleet: u64,
    pub prices: u64,
}

impl RunSeeds {
    pub fn derive(master_seed: u64, run: usize) -> Self {
        RunSeeds {
            run,
            inflows: derive_seed(master_seed, run, "inflows"),
            fleet: derive_seed(master_seed, run, "fleet"),
            prices: derive_seed(master_seed, run, "prices"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: String,
    /// Weight the allocation was optimised for; 0 for the baselines.
    pub lambda: f64,
    pub energy_cost: f64,
    pub emission_mass_kg: f64,
    pub emission_cost: f64,
    pub total_objective: f64,
    pub delivered_kwh: f64,
    pub shortfall_kwh: f64,
}

impl PolicyReport {
    fn new(policy: String, lambda: f64, m: &ScheduleMetrics) -> Self {
        PolicyReport {
            policy,
            lambda,
            energy_cost: m.energy_cost,
            emission_mass_kg: m.emission_mass_kg,
            emission_cost: m.emission_cost,
            total_objective: m.total_objective,
            delivered_kwh: m.delivered_kwh,
            shortfall_kwh: m.shortfall_kwh,
        }
    }

    /// `energy_cost + λ · emission_cost` for any `λ`.
    pub fn objective_at(&self, lambda: f64) -> f64 {
        self.energy_cost + lambda * self.emission_cost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seeds: RunSeeds,
    /// Dispatch cost in the source table's currency.
    pub dispatch_cost: f64,
    /// MWh per source over the day, hydro last.
    pub energy_by_source: Vec<(String, f64)>,
    /// Hourly grid intensity, g/kWh.
    pub intensity: Vec<f64>,
    pub total_demand_kwh: f64,
    pub policies: Vec<PolicyReport>,
}

impl RunReport {
    pub fn policy(&self, name: &str) -> Option<&PolicyReport> {
        self.policies.iter().find(|p| p.policy == name)
    }
}

/// Everything a single run produced, for file output.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub dispatch: DispatchSchedule,
    pub intensity: IntensitySeries,
    /// Hourly, base currency per kWh.
    pub emission_price: EmissionPriceSeries,
    pub instance: ChargingInstance,
    pub allocations: Vec<(String, AllocationMatrix)>,
}

impl RunArtifacts {
    pub fn fleet(&self) -> &[EvSession] {
        &self.instance.sessions
    }

    pub fn allocation(&self, policy: &str) -> Option<&AllocationMatrix> {
        self.allocations.iter().find(|(p, _)| p == policy).map(|(_, a)| a)
    }
}

/// Policy name for an emission weight.
pub fn policy_name(lambda: f64) -> String {
    if lambda == 0.0 {
        POWER_ALLOCATION.to_string()
    } else {
        format!("lambda={lambda}")
    }
}

/// Loaded data and fitted models shared by every run of one configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub table: SourceTable,
    pub demand: DemandProfile,
    pub sources: Vec<(SourceSpec, AvailabilityProfile)>,
    pub hydro: HydroSystem,
    hydro_share: f64,
    pub price_model: PriceModel,
    fixed_dispatch: Option<DispatchSchedule>,
}

impl Experiment {
    pub fn load(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let table = match &config.system.source_table {
            Some(path) => {
                let path = config.resolve(path);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                SourceTable::from_toml_str(&text)?
            }
            None => SourceTable::vietnam_2023(),
        };
        let capacity = SystemCapacity::new(config.system.p_max_mw)?;
        let demand = hourly_demand_from_records(&read_demand_csv(config.resolve(&config.system.demand_csv))?)?;
        let steps = demand.len();

        let mut sources = Vec::new();
        for spec in table.non_hydro() {
            let profile = match (spec.availability, spec.name.as_str()) {
                (AvailabilityKind::Constant, _) => constant_availability(spec, capacity, steps)?,
                (AvailabilityKind::Profile, "pv") => {
                    let params = PvParams::with_budget_from_share(spec.mix_share, capacity);
                    pv_availability_profile(&spec.name, &params, steps, demand.step_hours)?
                }
                (AvailabilityKind::Profile, "wind") => {
                    let clusters = read_wind_clusters(config.resolve(&config.system.wind_manifest))?;
                    let years = clusters.first().map_or(0.0, |c| c.factors.len() as f64 / 8760.0);
                    let budget = spec.mix_share * capacity.p_max * 8760.0 * years;
                    wind_availability_profile(&spec.name, &clusters, budget, demand.step_hours)?
                }
                (kind, name) => {
                    return Err(Error::Config(format!("no availability model for {name} ({kind:?})")));
                }
            };
            sources.push((spec.clone(), profile));
        }
        let hydro_spec = table
            .hydro()
            .ok_or_else(|| Error::Config("source table has no hydro source".into()))?;
        let horizon = steps as f64 * demand.step_hours;
        let hydro = default_hydro(capacity, horizon, hydro_spec.mix_share, hydro_spec.cost_per_kwh())?;
        let hydro_share = hydro_spec.mix_share;

        let price_model = fit_price_model(&read_price_csv(config.resolve(&config.prices.csv))?, config.fleet.steps())?
            .with_floor(config.prices.floor.unwrap_or(f64::NEG_INFINITY));

        let mut experiment = Experiment {
            config,
            table,
            demand,
            sources,
            hydro,
            hydro_share,
            price_model,
            fixed_dispatch: None,
        };
        if !experiment.config.system.resample_inflows {
            let seeds = RunSeeds::derive(experiment.config.master_seed, 0);
            let dispatch = solve_ucp_checked(&experiment.ucp_instance(seeds.inflows))
                .map_err(|e| e.in_run(0, "ucp"))?
                .schedule;
            experiment.fixed_dispatch = Some(dispatch);
        }
        Ok(experiment)
    }

    /// Dispatch day with inflows drawn from `inflow_seed`.
    pub fn ucp_instance(&self, inflow_seed: u64) -> UcpInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(inflow_seed);
        UcpInstance {
            demand: self.demand.clone(),
            sources: self.sources.clone(),
            hydro: self.hydro,
            inflows: sample_inflows(&self.hydro, self.demand.len(), &mut rng),
            hydro_power_cap: self
                .config
                .system
                .hydro_power_cap
                .then_some(self.hydro_share * self.config.system.p_max_mw),
        }
    }

    /// Carbon price per tonne in the base currency.
    pub fn carbon_price(&self) -> f64 {
        let c = self.config.carbon_price;
        self.config
            .exchange_rates
            .convert(c.per_tonne, c.currency, self.config.base_currency)
    }

    fn source_specs(&self) -> Vec<SourceSpec> {
        self.sources.iter().map(|(s, _)| s.clone()).collect()
    }

    /// Dispatch, intensity and emission price for one run.
    pub fn dispatch(&self, seeds: &RunSeeds) -> Result<(DispatchSchedule, IntensitySeries, EmissionPriceSeries)> {
        let run = seeds.run;
        let dispatch = match &self.fixed_dispatch {
            Some(d) => d.clone(),
            None => {
                solve_ucp_checked(&self.ucp_instance(seeds.inflows))
                    .map_err(|e| e.in_run(run, "ucp"))?
                    .schedule
            }
        };
        let intensity = carbon_intensity(&dispatch, &self.source_specs(), &self.hydro).map_err(|e| e.in_run(run, "emissions"))?;
        let price = emission_price(&intensity, self.carbon_price()).map_err(|e| e.in_run(run, "emissions"))?;
        Ok((dispatch, intensity, price))
    }

    /// Charging instance for one run at `λ = 0`.
    pub fn charging_instance(&self, seeds: &RunSeeds, emission_price_hourly: &[f64]) -> Result<ChargingInstance> {
        let run = seeds.run;
        let cfg = &self.config;
        let delta = cfg.fleet.step_hours;
        let emission_fine =
            resample_hold(emission_price_hourly, self.demand.step_hours, delta).map_err(|e| e.in_run(run, "emissions"))?;
        let sessions = sample_fleet(&cfg.fleet, &mut ChaCha8Rng::seed_from_u64(seeds.fleet)).map_err(|e| e.in_run(run, "fleet"))?;
        let raw = match cfg.price_mode {
            PriceMode::Mean => self.price_model.mean().to_vec(),
            PriceMode::Sampled => sample_price_profile(&self.price_model, &mut ChaCha8Rng::seed_from_u64(seeds.prices)),
        };
        let rates = cfg.exchange_rates;
        let energy_price = raw
            .iter()
            .map(|p| rates.convert(*p, cfg.prices.currency, cfg.base_currency))
            .collect();
        let steps = cfg.fleet.steps();
        Ok(ChargingInstance {
            sessions,
            socket_kw: cfg.fleet.socket_kw,
            station_capacity: vec![cfg.station_capacity_kw(); steps],
            energy_price,
            emission_price: emission_fine,
            lambda: 0.0,
            step_hours: delta,
        })
    }

    /// Dispatch → intensity → emission price → scenario → every policy.
    pub fn run(&self, run: usize) -> Result<RunArtifacts> {
        let seeds = RunSeeds::derive(self.config.master_seed, run);
        let (dispatch, intensity, price) = self.dispatch(&seeds)?;
        let instance = self.charging_instance(&seeds, &price.values)?;
        let intensity_fine = resample_hold(&intensity.values, self.demand.step_hours, instance.step_hours)
            .map_err(|e| e.in_run(run, "emissions"))?;

        let mut lambdas: Vec<f64> = Vec::new();
        for &l in &self.config.lambdas {
            if l > 0.0 && !lambdas.contains(&l) {
                lambdas.push(l);
            }
        }
        let mut jobs: Vec<(String, f64)> = lambdas.iter().map(|&l| (policy_name(l), l)).collect();
        jobs.push((POWER_ALLOCATION.to_string(), 0.0));

        let mut allocations = Vec::with_capacity(jobs.len() + 1);
        let mut policies = Vec::with_capacity(jobs.len() + 1);
        for (name, lambda) in jobs {
            let at = instance.with_lambda(lambda);
            let alloc = if lambda == 0.0 {
                solve_power_allocation(&at)
            } else {
                solve_smart_charging(&at)
            }
            .map_err(|e| e.in_run(run, "charging"))?;
            check_allocation(&alloc, &at, true).map_err(|e| e.in_run(run, "charging"))?;
            let m = evaluate_schedule(&alloc, &at, &intensity_fine).map_err(|e| e.in_run(run, "evaluation"))?;
            policies.push(PolicyReport::new(name.clone(), lambda, &m));
            allocations.push((name, alloc));
        }
        let fifs = fifs_schedule(&instance).map_err(|e| e.in_run(run, "fifs"))?;
        check_allocation(&fifs, &instance, false).map_err(|e| e.in_run(run, "fifs"))?;
        let m = evaluate_schedule(&fifs, &instance, &intensity_fine).map_err(|e| e.in_run(run, "evaluation"))?;
        policies.push(PolicyReport::new(FIFS.to_string(), 0.0, &m));
        allocations.push((FIFS.to_string(), fifs));

        let report = RunReport {
            seeds,
            dispatch_cost: dispatch.total_cost,
            energy_by_source: dispatch.energy_by_source(&self.hydro_name()),
            intensity: intensity.values.clone(),
            total_demand_kwh: instance.total_demand(),
            policies,
        };
        Ok(RunArtifacts {
            report,
            dispatch,
            intensity,
            emission_price: price,
            instance,
            allocations,
        })
    }

    pub fn hydro_name(&self) -> String {
        self.table.hydro().map_or_else(|| "hydro".to_string(), |h| h.name.clone())
    }
}

fn check_allocation(alloc: &AllocationMatrix, instance: &ChargingInstance, require_demand: bool) -> Result<()> {
    let worst = alloc.verify(instance, require_demand)?;
    if worst > ALLOCATION_TOL {
        return Err(Error::SolverFailure(format!("allocation violates its limits by {worst:e}")));
    }
    Ok(())
}

/// Run `run_index` of the configured experiment.
pub fn run_single(config: &ExperimentConfig, run_index: usize) -> Result<RunReport> {
    Ok(Experiment::load(config.clone())?.run(run_index)?.report)
}

/// All runs of the experiment, in index order, plus their summary.
pub fn run_monte_carlo(experiment: &Experiment) -> Result<(Vec<RunReport>, SummaryStats)> {
    let results: Vec<Result<RunReport>> = (0..experiment.config.runs)
        .into_par_iter()
        .map(|k| experiment.run(k).map(|a| a.report))
        .collect();
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;
    let stats = summarize(&reports)?;
    Ok((reports, stats))
}
