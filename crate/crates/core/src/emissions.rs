//! Carbon intensity of a dispatch and the per-kWh emission price it implies.

use serde::{Deserialize, Serialize};

use crate::currency::Currency;
use crate::error::{Error, Result};
use crate::power_system_data::SourceSpec;
use crate::ucp::{DispatchSchedule, HydroSystem};

/// Grid-average carbon intensity per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensitySeries {
    /// g CO₂ per kWh generated.
    pub values: Vec<f64>,
    /// Total mass emitted in each step, kg.
    pub emissions_kg: Vec<f64>,
    /// Energy generated in each step, kWh.
    pub generation_kwh: Vec<f64>,
    pub step_hours: f64,
}

/// Emissions divided by generation at every step; steps without generation
/// get intensity 0.
pub fn carbon_intensity(schedule: &DispatchSchedule, sources: &[SourceSpec], hydro: &HydroSystem) -> Result<IntensitySeries> {
    if sources.len() != schedule.sources.len() || sources.iter().zip(&schedule.sources).any(|(s, n)| &s.name != n) {
        return Err(Error::Dimension("source list does not match schedule columns".into()));
    }
    let dt = schedule.step_hours;
    let steps = schedule.steps();
    let mut values = Vec::with_capacity(steps);
    let mut emissions_kg = Vec::with_capacity(steps);
    let mut generation_kwh = Vec::with_capacity(steps);
    for t in 0..steps {
        let row = &schedule.power[t];
        let vh = schedule.hydro_water[t];
        if row.len() != sources.len() {
            return Err(Error::Dimension(format!("schedule row {t} has {} entries", row.len())));
        }
        if row.iter().any(|&x| x < 0.0) || vh < 0.0 {
            return Err(Error::validation(format!("negative dispatch at step {t}")));
        }
        let hydro_kwh = hydro.rho * vh * 1000.0;
        let mut grams = hydro.emission_rate * hydro_kwh;
        let mut kwh = hydro_kwh;
        for (spec, &x) in sources.iter().zip(row) {
            let e = dt * x * 1000.0;
            grams += spec.emission_rate * e;
            kwh += e;
        }
        values.push(if kwh > 0.0 { grams / kwh } else { 0.0 });
        emissions_kg.push(grams / 1000.0);
        generation_kwh.push(kwh);
    }
    Ok(IntensitySeries {
        values,
        emissions_kg,
        generation_kwh,
        step_hours: dt,
    })
}

/// Carbon tax expressed as a price per tonne.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarbonPrice {
    pub per_tonne: f64,
    pub currency: Currency,
}

impl Default for CarbonPrice {
    /// 70 USD per tonne.
    fn default() -> Self {
        CarbonPrice {
            per_tonne: 70.0,
            currency: Currency::Usd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionPriceSeries {
    /// Currency per kWh.
    pub values: Vec<f64>,
    /// Currency per tonne used to build `values`.
    pub carbon_price: f64,
}

/// `carbon_price × intensity × 1e-6`: g/kWh times currency/t gives currency/kWh.
pub fn emission_price(intensity: &IntensitySeries, carbon_price: f64) -> Result<EmissionPriceSeries> {
    if !(carbon_price >= 0.0) || !carbon_price.is_finite() {
        return Err(Error::validation(format!("carbon price must be non-negative, got {carbon_price}")));
    }
    Ok(EmissionPriceSeries {
        values: intensity.values.iter().map(|i| carbon_price * i * 1e-6).collect(),
        carbon_price,
    })
}

/// Zero-order hold from a `coarse_step_hours` grid onto a `fine_step_hours` grid.
pub fn resample_hold(series: &[f64], coarse_step_hours: f64, fine_step_hours: f64) -> Result<Vec<f64>> {
    let ratio = coarse_step_hours / fine_step_hours;
    if !(fine_step_hours > 0.0) || !(ratio >= 1.0) || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "fine step {fine_step_hours} h does not divide coarse step {coarse_step_hours} h"
        )));
    }
    let k = ratio.round() as usize;
    Ok(series
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, k))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_system_data::AvailabilityKind;
    use crate::ucp::{HydroParams, HydroSystem};

    fn hydro() -> HydroSystem {
        HydroSystem::new(HydroParams {
            eta: 0.85,
            water_density: 1000.0,
            gravity: 9.81,
            head: 80.0,
            cost_per_kwh: 1128.0,
            v0: 1e9,
            v_min: 0.7e9,
            v_max: 2e9,
            emission_rate: 24.0,
        })
        .unwrap()
    }

    fn coal() -> SourceSpec {
        SourceSpec {
            name: "coal".into(),
            mix_share: 0.332,
            emission_rate: 820.0,
            unit_cost: 2.1e6,
            availability: AvailabilityKind::Constant,
        }
    }

    fn schedule(power: Vec<f64>, water: Vec<f64>, rho: f64) -> DispatchSchedule {
        let n = power.len();
        DispatchSchedule {
            sources: vec!["coal".into()],
            power: power.into_iter().map(|p| vec![p]).collect(),
            hydro_water: water,
            reservoir: vec![0.0; n],
            total_cost: 0.0,
            step_hours: 1.0,
            rho,
        }
    }

    #[test]
    fn coal_only_hour_has_coal_rate() {
        let h = hydro();
        let s = schedule(vec![123.0], vec![0.0], h.rho);
        let i = carbon_intensity(&s, &[coal()], &h).unwrap();
        assert_eq!(i.values, vec![820.0]);
    }

    #[test]
    fn idle_hour_has_zero_intensity() {
        let h = hydro();
        let s = schedule(vec![0.0], vec![0.0], h.rho);
        assert_eq!(carbon_intensity(&s, &[coal()], &h).unwrap().values, vec![0.0]);
    }

    #[test]
    fn equal_energy_coal_and_hydro_average_rates() {
        let h = hydro();
        let mw = 100.0;
        let s = schedule(vec![mw], vec![mw / h.rho], h.rho);
        let i = carbon_intensity(&s, &[coal()], &h).unwrap();
        assert!((i.values[0] - 422.0).abs() < 1e-9);
    }

    #[test]
    fn negative_dispatch_rejected() {
        let h = hydro();
        let s = schedule(vec![-1.0], vec![0.0], h.rho);
        assert!(carbon_intensity(&s, &[coal()], &h).is_err());
    }

    #[test]
    fn price_from_intensity() {
        let i = IntensitySeries {
            values: vec![820.0, 0.0],
            emissions_kg: vec![0.0; 2],
            generation_kwh: vec![0.0; 2],
            step_hours: 1.0,
        };
        let p = emission_price(&i, 1_785_000.0).unwrap();
        assert!((p.values[0] - 1463.7).abs() < 1e-9);
        assert_eq!(p.values[1], 0.0);
        assert!(emission_price(&i, 0.0).unwrap().values.iter().all(|&v| v == 0.0));
        assert!(emission_price(&i, -1.0).is_err());
    }

    #[test]
    fn hold_repeats_each_value() {
        let hourly: Vec<f64> = (0..24).map(f64::from).collect();
        let fine = resample_hold(&hourly, 1.0, 1.0 / 6.0).unwrap();
        assert_eq!(fine.len(), 144);
        assert!(fine.chunks(6).zip(&hourly).all(|(c, v)| c.iter().all(|x| x == v)));
        let mean_fine = fine.iter().sum::<f64>() / 144.0;
        let mean_hourly = hourly.iter().sum::<f64>() / 24.0;
        assert_eq!(mean_fine, mean_hourly);
        assert!(resample_hold(&hourly, 1.0, 0.7).is_err());
        assert_eq!(resample_hold(&[2.0; 3], 1.0, 0.25).unwrap(), vec![2.0; 12]);
    }
}
