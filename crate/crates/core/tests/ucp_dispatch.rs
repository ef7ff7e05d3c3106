#![allow(clippy::needless_range_loop)]

use gridcharge::emissions::carbon_intensity;
use gridcharge::harness::{Experiment, ExperimentConfig, RunSeeds};
use gridcharge::power_system_data::{AvailabilityKind, AvailabilityProfile, DemandProfile, SourceSpec};
use gridcharge::ucp::{solve_ucp_checked, DispatchSchedule, HydroParams, HydroSystem, UcpInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn default_experiment() -> Experiment {
    let config = ExperimentConfig::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/default.toml")).unwrap();
    Experiment::load(config).unwrap()
}

/// Given the hydro output of `schedule`, fill each hour's residual demand
/// cheapest source first and return the largest deviation from the schedule, MW.
fn merit_order_gap(instance: &UcpInstance, schedule: &DispatchSchedule) -> f64 {
    let hydro = schedule.hydro_power();
    let mut order: Vec<usize> = (0..instance.sources.len()).collect();
    order.sort_by(|&a, &b| instance.sources[a].0.unit_cost.total_cmp(&instance.sources[b].0.unit_cost));
    let mut worst = 0.0_f64;
    for t in 0..instance.steps() {
        let mut residual = (instance.demand.values[t] - hydro[t]).max(0.0);
        for &j in &order {
            let take = residual.min(instance.sources[j].1.caps[t]);
            residual -= take;
            worst = worst.max((schedule.power[t][j] - take).abs());
        }
    }
    worst
}

#[test]
fn default_day_excludes_fuel_and_follows_merit_order() {
    let exp = default_experiment();
    let instance = exp.ucp_instance(RunSeeds::derive(2023, 0).inflows);
    let start = std::time::Instant::now();
    let sol = solve_ucp_checked(&instance).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    let fuel = sol.schedule.sources.iter().position(|s| s == "fuel").unwrap();
    for row in &sol.schedule.power {
        assert!(row[fuel].abs() <= 1e-6, "fuel at {} MW", row[fuel]);
    }
    let gap = merit_order_gap(&instance, &sol.schedule);
    assert!(gap <= 1e-6, "merit order gap {gap} MW");
    assert!(sol.schedule.violations(&instance).max() <= 1e-6);
}

#[test]
fn intensity_stays_within_source_rates() {
    let exp = default_experiment();
    let specs: Vec<SourceSpec> = exp.sources.iter().map(|(s, _)| s.clone()).collect();
    for run in 0..10 {
        let instance = exp.ucp_instance(RunSeeds::derive(2023, run).inflows);
        let schedule = solve_ucp_checked(&instance).unwrap().schedule;
        let series = carbon_intensity(&schedule, &specs, &exp.hydro).unwrap();
        let mut rebuilt = 0.0;
        let mut total = 0.0;
        for t in 0..series.values.len() {
            assert!(series.values[t] >= 12.0 - 1e-9 && series.values[t] <= 820.0 + 1e-9);
            rebuilt += series.values[t] * series.generation_kwh[t];
            total += series.emissions_kg[t] * 1000.0;
        }
        assert!((rebuilt - total).abs() <= 1e-9 * total);
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> UcpInstance {
    let steps = rng.random_range(1..=24);
    let n_sources = rng.random_range(1..=5);
    let mut sources = Vec::new();
    let mut total_cap = vec![0.0; steps];
    for j in 0..n_sources {
        let base = rng.random_range(50.0..2000.0);
        let caps: Vec<f64> = (0..steps).map(|_| base * rng.random_range(0.3..1.0)).collect();
        for (t, c) in caps.iter().enumerate() {
            total_cap[t] += c;
        }
        let name = format!("s{j}");
        sources.push((
            SourceSpec {
                name: name.clone(),
                mix_share: 0.1,
                emission_rate: rng.random_range(10.0..900.0),
                unit_cost: rng.random_range(500.0..3000.0) * 1000.0,
                availability: AvailabilityKind::Constant,
            },
            AvailabilityProfile { source: name, caps },
        ));
    }
    let demand: Vec<f64> = total_cap.iter().map(|c| c * rng.random_range(0.0..0.95)).collect();
    let v0 = rng.random_range(1e6..5e7);
    let hydro = HydroSystem::new(HydroParams {
        eta: 0.85,
        water_density: 1000.0,
        gravity: 9.81,
        head: rng.random_range(20.0..150.0),
        cost_per_kwh: rng.random_range(100.0..2500.0),
        v0,
        v_min: v0 * rng.random_range(0.3..1.0),
        v_max: v0 * rng.random_range(1.0..3.0),
        emission_rate: 24.0,
    })
    .unwrap();
    let inflows = (0..steps).map(|_| rng.random_range(0.0..v0 / 100.0)).collect();
    UcpInstance {
        demand: DemandProfile::new(demand, 1.0).unwrap(),
        sources,
        hydro,
        inflows,
        hydro_power_cap: rng.random_bool(0.5).then(|| rng.random_range(10.0..1000.0)),
    }
}

#[test]
fn randomized_instances_satisfy_dispatch_invariants() {
    let start = std::time::Instant::now();
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let instance = random_instance(&mut rng);
        let sol = solve_ucp_checked(&instance).unwrap_or_else(|e| panic!("instance {seed}: {e}"));
        let v = sol.schedule.violations(&instance);
        assert!(v.max() <= 1e-6, "instance {seed}: {v:?}");
        assert!(sol.feasibility.max_violation() <= 1e-6, "instance {seed}");
        let gap = merit_order_gap(&instance, &sol.schedule);
        assert!(gap <= 1e-6 * instance.demand.values.iter().fold(1.0, |a: f64, b| a.max(*b)), "instance {seed}: gap {gap}");
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}
