use gridcharge::charging::{
    build_charging_lp, evaluate_schedule, fifs_schedule, solve_smart_charging, solve_smart_charging_with, ChargingInstance,
    EvSession, SolveMethod,
};
use gridcharge::lp::{solve_lp, LpStatus};
use gridcharge::Error;
use proptest::prelude::*;

const STEPS: usize = 8;

fn arb_instance(negative_prices: bool) -> impl Strategy<Value = ChargingInstance> {
    let price = if negative_prices { -1.0..3.0 } else { 0.0..3.0 };
    let session = (0..STEPS, 1..=STEPS, 0.0..1.0f64);
    (
        prop::collection::vec(session, 1..7),
        prop::collection::vec(price, STEPS),
        prop::collection::vec(0.0..2.0f64, STEPS),
        prop::collection::vec(5.0..40.0f64, STEPS),
        0.0..5.0f64,
    )
        .prop_map(|(raw, energy_price, emission_price, station_capacity, lambda)| {
            let sessions = raw
                .into_iter()
                .enumerate()
                .map(|(id, (a, len, frac))| {
                    let departure = (a + len).min(STEPS);
                    EvSession {
                        id,
                        arrival: a,
                        departure,
                        // half a step at 11 kW per dwell step at most
                        demand_kwh: frac * 11.0 * 0.5 * (departure - a) as f64,
                    }
                })
                .collect();
            ChargingInstance {
                sessions,
                socket_kw: 11.0,
                station_capacity,
                energy_price,
                emission_price,
                lambda,
                step_hours: 0.5,
            }
        })
}

fn lp_optimum(inst: &ChargingInstance) -> Option<f64> {
    let model = build_charging_lp(inst).unwrap();
    let sol = solve_lp(&model.lp).unwrap();
    match sol.status {
        LpStatus::Optimal => Some(sol.objective_value),
        LpStatus::Infeasible => None,
        LpStatus::Unbounded => panic!("bounded variables cannot be unbounded"),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_lp_oracle(inst in arb_instance(true)) {
        let oracle = lp_optimum(&inst);
        match (solve_smart_charging(&inst), oracle) {
            (Ok(alloc), Some(best)) => {
                prop_assert!(alloc.verify(&inst, true).unwrap() <= 1e-7);
                prop_assert!(close(alloc.objective(&inst), best), "{} vs {}", alloc.objective(&inst), best);
            }
            (Err(Error::CapacityInfeasible { step }), None) => prop_assert!(step < STEPS),
            (got, want) => prop_assert!(false, "solver {:?}, oracle {:?}", got.map(|a| a.objective(&inst)), want),
        }
    }

    #[test]
    fn flow_matches_lp_on_non_negative_prices(inst in arb_instance(false)) {
        let oracle = lp_optimum(&inst);
        match (solve_smart_charging_with(&inst, SolveMethod::MinCostFlow), oracle) {
            (Ok(alloc), Some(best)) => {
                prop_assert!(alloc.verify(&inst, true).unwrap() <= 1e-7);
                prop_assert!(close(alloc.objective(&inst), best));
            }
            (Err(Error::CapacityInfeasible { .. }), None) => {}
            (got, want) => prop_assert!(false, "flow {:?}, oracle {:?}", got.map(|a| a.objective(&inst)), want),
        }
    }

    #[test]
    fn greedy_matches_lp_when_slack(mut inst in arb_instance(true)) {
        inst.station_capacity = vec![11.0 * inst.sessions.len() as f64; STEPS];
        let alloc = solve_smart_charging_with(&inst, SolveMethod::Greedy).unwrap();
        let best = lp_optimum(&inst).unwrap();
        prop_assert!(alloc.verify(&inst, true).unwrap() <= 1e-9);
        prop_assert!(close(alloc.objective(&inst), best));
    }

    #[test]
    fn fifs_respects_limits_and_never_beats_optimum(inst in arb_instance(false)) {
        let fifs = fifs_schedule(&inst).unwrap();
        prop_assert!(fifs.verify(&inst, false).unwrap() <= 1e-9);
        let m = evaluate_schedule(&fifs, &inst, &[400.0; STEPS]).unwrap();
        if m.shortfall_kwh <= 1e-9 {
            let best = lp_optimum(&inst).expect("fifs served everyone");
            prop_assert!(fifs.objective(&inst) >= best - 1e-6 * (1.0 + best.abs()));
        }
    }

    #[test]
    fn scaling_all_prices_scales_objective(inst in arb_instance(false), k in 0.1..10.0f64) {
        let Ok(base) = solve_smart_charging(&inst) else { return Ok(()) };
        let mut scaled = inst.clone();
        scaled.energy_price.iter_mut().for_each(|p| *p *= k);
        scaled.emission_price.iter_mut().for_each(|p| *p *= k);
        let again = solve_smart_charging(&scaled).unwrap();
        prop_assert!(close(again.objective(&scaled), k * base.objective(&inst)));
    }

    #[test]
    fn metrics_decompose(inst in arb_instance(false)) {
        let Ok(alloc) = solve_smart_charging(&inst) else { return Ok(()) };
        let intensity: Vec<f64> = (0..STEPS).map(|t| 100.0 * t as f64).collect();
        let m = evaluate_schedule(&alloc, &inst, &intensity).unwrap();
        prop_assert!(close(m.total_objective, m.energy_cost + inst.lambda * m.emission_cost));
        prop_assert!(close(m.total_objective, alloc.objective(&inst)));
        prop_assert!(m.shortfall_kwh <= 1e-7);
        prop_assert!(close(m.delivered_kwh, inst.total_demand()) || m.delivered_kwh > inst.total_demand());
    }

    #[test]
    fn lambda_sweep_is_monotone(mut inst in arb_instance(false), intensity in prop::collection::vec(12.0..820.0f64, STEPS)) {
        inst.emission_price = intensity.iter().map(|i| i * 1e-3).collect();
        let mut prev: Option<(f64, f64)> = None;
        for lambda in [0.0, 0.1, 1.0, 10.0] {
            let at = inst.with_lambda(lambda);
            let Ok(alloc) = solve_smart_charging(&at) else { return Ok(()) };
            let m = evaluate_schedule(&alloc, &at, &intensity).unwrap();
            if let Some((cost, mass)) = prev {
                prop_assert!(m.energy_cost >= cost - 1e-9 * (1.0 + cost.abs()), "cost {} after {}", m.energy_cost, cost);
                prop_assert!(m.emission_mass_kg <= mass + 1e-9 * (1.0 + mass), "mass {} after {}", m.emission_mass_kg, mass);
            }
            prev = Some((m.energy_cost, m.emission_mass_kg));
        }
    }

    #[test]
    fn shifting_prices_adds_constant(inst in arb_instance(false), c in 0.0..2.0f64) {
        let Ok(base) = solve_smart_charging(&inst) else { return Ok(()) };
        let mut shifted = inst.clone();
        shifted.energy_price.iter_mut().for_each(|p| *p += c);
        let again = solve_smart_charging(&shifted).unwrap();
        let expected = base.objective(&inst) + c * inst.total_demand();
        prop_assert!(close(again.objective(&shifted), expected));
    }
}

#[test]
fn larger_binding_instance_flow_equals_lp() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let steps = 48;
    let sessions = (0..40)
        .map(|id| {
            let a = rng.random_range(0..steps - 1);
            let d = (a + rng.random_range(1..20)).min(steps);
            EvSession {
                id,
                arrival: a,
                departure: d,
                demand_kwh: rng.random_range(0.0..1.0) * 22.0 * (d - a) as f64 / 6.0,
            }
        })
        .collect();
    let inst = ChargingInstance {
        sessions,
        socket_kw: 22.0,
        station_capacity: vec![200.0; steps],
        energy_price: (0..steps).map(|_| rng.random_range(0.05..0.3)).collect(),
        emission_price: (0..steps).map(|_| rng.random_range(0.0..0.05)).collect(),
        lambda: 10.0,
        step_hours: 1.0 / 6.0,
    };
    assert!(!inst.capacity_is_slack());
    let flow = solve_smart_charging_with(&inst, SolveMethod::MinCostFlow).unwrap();
    let lp = solve_smart_charging_with(&inst, SolveMethod::Lp).unwrap();
    assert!(close(flow.objective(&inst), lp.objective(&inst)));
}
