//! Exogenous inputs to the unit-commitment model: the source table, the
//! hourly demand profile, and per-source availability caps.

mod ingest;

use std::collections::{BTreeMap, HashSet};

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::currency::Currency;
use crate::error::{Error, Result};

pub use ingest::{parse_timestamp, read_demand_csv, read_timeseries_csv, read_wind_clusters};

/// Shares may miss 1 by this much (the 2023 table sums to 0.999).
pub const SHARE_SUM_TOLERANCE: f64 = 1e-3;

/// Default maximum instantaneous deliverable power of the Vietnamese system.
pub const VIETNAM_P_MAX_MW: f64 = 46_348.0;

const VIETNAM_2023: &str = include_str!("../../assets/vietnam_2023.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AvailabilityKind {
    Constant,
    Profile,
    Hydro,
}

/// One generation source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub name: String,
    pub mix_share: f64,
    /// g CO₂ per kWh.
    pub emission_rate: f64,
    /// Currency per MWh.
    pub unit_cost: f64,
    pub availability: AvailabilityKind,
}

impl SourceSpec {
    pub fn cost_per_kwh(&self) -> f64 {
        self.unit_cost / 1000.0
    }

    pub fn cost_per_mwh(&self) -> f64 {
        self.unit_cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostUnit {
    PerKwh,
    PerMwh,
}

/// Raw row as it appears in a source-table file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRow {
    pub share: f64,
    pub emission_rate: f64,
    pub cost: f64,
    pub availability: AvailabilityKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceTable {
    pub currency: Currency,
    pub sources: Vec<SourceSpec>,
}

impl SourceTable {
    /// The bundled 2023 Vietnamese mix.
    pub fn vietnam_2023() -> Self {
        Self::from_toml_str(VIETNAM_2023).expect("bundled source table is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            currency: Currency,
            cost_unit: CostUnit,
            sources: toml::Table,
        }
        let file: File = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut rows = Vec::with_capacity(file.sources.len());
        for (name, value) in file.sources {
            let row: SourceRow = value
                .try_into()
                .map_err(|e| Error::Config(format!("source {name}: {e}")))?;
            rows.push((name, row));
        }
        load_source_table(&rows, file.cost_unit, file.currency)
    }

    pub fn get(&self, name: &str) -> Option<&SourceSpec> {
        self.sources.iter().find(|s| s.name == name)
    }

    pub fn hydro(&self) -> Option<&SourceSpec> {
        self.sources.iter().find(|s| s.availability == AvailabilityKind::Hydro)
    }

    pub fn non_hydro(&self) -> impl Iterator<Item = &SourceSpec> {
        self.sources.iter().filter(|s| s.availability != AvailabilityKind::Hydro)
    }
}

/// Validate source rows. Shares are kept as given; a sum within
/// [`SHARE_SUM_TOLERANCE`] of one is accepted.
pub fn load_source_table(rows: &[(String, SourceRow)], cost_unit: CostUnit, currency: Currency) -> Result<SourceTable> {
    if rows.is_empty() {
        return Err(Error::validation("source table is empty"));
    }
    let mut names = HashSet::new();
    let mut sources = Vec::with_capacity(rows.len());
    for (name, row) in rows {
        if !names.insert(name.as_str()) {
            return Err(Error::validation(format!("duplicate source {name}")));
        }
        for (field, value) in [
            ("share", row.share),
            ("emission_rate", row.emission_rate),
            ("cost", row.cost),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::validation(format!("source {name}: {field} must be non-negative, got {value}")));
            }
        }
        if row.share > 1.0 {
            return Err(Error::validation(format!("source {name}: share {} exceeds 1", row.share)));
        }
        let unit_cost = match cost_unit {
            CostUnit::PerMwh => row.cost,
            CostUnit::PerKwh => row.cost * 1000.0,
        };
        sources.push(SourceSpec {
            name: name.clone(),
            mix_share: row.share,
            emission_rate: row.emission_rate,
            unit_cost,
            availability: row.availability,
        });
    }
    let hydro_count = sources
        .iter()
        .filter(|s| s.availability == AvailabilityKind::Hydro)
        .count();
    if hydro_count > 1 {
        return Err(Error::validation(format!("{hydro_count} hydro sources, at most one allowed")));
    }
    let sum: f64 = sources.iter().map(|s| s.mix_share).sum();
    if (sum - 1.0).abs() > SHARE_SUM_TOLERANCE + 1e-12 {
        return Err(Error::validation(format!(
            "mix shares sum to {sum} (deficit {:+})",
            1.0 - sum
        )));
    }
    if (sum - 1.0).abs() > 1e-9 {
        log::warn!("mix shares sum to {sum}; using them as given");
    }
    Ok(SourceTable { currency, sources })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    /// MW per step.
    pub values: Vec<f64>,
    pub step_hours: f64,
}

impl DemandProfile {
    pub fn new(values: Vec<f64>, step_hours: f64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::validation("demand values must be finite and non-negative"));
        }
        if !(step_hours > 0.0) {
            return Err(Error::validation("step_hours must be positive"));
        }
        Ok(DemandProfile { values, step_hours })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityProfile {
    pub source: String,
    /// MW per step.
    pub caps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemCapacity {
    pub p_max: f64,
}

impl SystemCapacity {
    pub fn new(p_max: f64) -> Result<Self> {
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(Error::validation(format!("p_max must be positive, got {p_max}")));
        }
        Ok(SystemCapacity { p_max })
    }
}

impl Default for SystemCapacity {
    fn default() -> Self {
        SystemCapacity { p_max: VIETNAM_P_MAX_MW }
    }
}

/// Average half-hourly records into a 24-value hour-of-day profile.
///
/// Each (day, hour) is the mean of its two half-hour readings; each hour of
/// day is then the mean over all days. Every half-hour between the first and
/// last day must be present exactly once.
pub fn hourly_demand_from_records(records: &[(NaiveDateTime, f64)]) -> Result<DemandProfile> {
    if records.is_empty() {
        return Err(Error::validation("no demand records"));
    }
    let mut slots: BTreeMap<(NaiveDate, u32), f64> = BTreeMap::new();
    for &(ts, value) in records {
        if ts.second() != 0 || ts.nanosecond() != 0 || (ts.minute() != 0 && ts.minute() != 30) {
            return Err(Error::validation(format!("timestamp {ts} is not on a half-hour boundary")));
        }
        if !value.is_finite() {
            return Err(Error::validation(format!("non-finite demand at {ts}")));
        }
        let slot = ts.hour() * 2 + ts.minute() / 30;
        if slots.insert((ts.date(), slot), value).is_some() {
            return Err(Error::validation(format!("duplicate demand record at {ts}")));
        }
    }
    let first = slots.keys().next().expect("non-empty").0;
    let last = slots.keys().next_back().expect("non-empty").0;

    let mut sums = [0.0_f64; 24];
    let mut days = 0usize;
    for day in first.iter_days().take_while(|d| *d <= last) {
        for hour in 0..24u32 {
            let mut pair = [0.0; 2];
            for (k, p) in pair.iter_mut().enumerate() {
                let slot = hour * 2 + k as u32;
                *p = *slots.get(&(day, slot)).ok_or_else(|| {
                    let ts = day.and_hms_opt(hour, 30 * k as u32, 0).expect("valid time");
                    Error::DemandGap(ts.to_string())
                })?;
            }
            sums[hour as usize] += 0.5 * (pair[0] + pair[1]);
        }
        days += 1;
    }
    DemandProfile::new(sums.iter().map(|s| s / days as f64).collect(), 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvParams {
    pub peak_hour: f64,
    pub sigma: f64,
    /// Inclusive productive window, hours of day.
    pub window: (f64, f64),
    /// MWh produced over one day.
    pub daily_energy_budget: f64,
}

impl PvParams {
    /// Noon peak, σ = 2 h, productive 7:00 to 17:00, budget `share × p_max × 24`.
    pub fn with_budget_from_share(share: f64, capacity: SystemCapacity) -> Self {
        PvParams {
            peak_hour: 12.0,
            sigma: 2.0,
            window: (7.0, 17.0),
            daily_energy_budget: share * capacity.p_max * 24.0,
        }
    }
}

/// Gaussian PV curve over the productive window, scaled to the daily budget.
///
/// The density is sampled at grid times `k × step_hours`, normalised over the
/// in-window points, and converted from MWh per step to MW.
pub fn pv_availability_profile(source: &str, params: &PvParams, steps: usize, step_hours: f64) -> Result<AvailabilityProfile> {
    let (start, end) = params.window;
    if !(params.sigma > 0.0) {
        return Err(Error::validation(format!("PV sigma must be positive, got {}", params.sigma)));
    }
    if !(step_hours > 0.0) {
        return Err(Error::validation("step_hours must be positive"));
    }
    if !(params.daily_energy_budget >= 0.0) {
        return Err(Error::validation("PV energy budget must be non-negative"));
    }
    if !(0.0..24.0).contains(&start) || !(0.0..24.0).contains(&end) || start > end {
        return Err(Error::validation(format!("PV window [{start}, {end}] must lie within [0, 24)")));
    }
    let weights: Vec<f64> = (0..steps)
        .map(|k| {
            let t = k as f64 * step_hours;
            if t >= start && t <= end {
                let z = t - params.peak_hour;
                (-(z * z) / (2.0 * params.sigma * params.sigma)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if weights.iter().all(|&w| w == 0.0) || total <= 0.0 {
        return Err(Error::validation(format!("PV window [{start}, {end}] contains no grid point")));
    }
    let scale = params.daily_energy_budget / step_hours / total;
    Ok(AvailabilityProfile {
        source: source.to_string(),
        caps: weights.into_iter().map(|w| w * scale).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindCluster {
    pub id: String,
    pub installed_mw: f64,
    /// Capacity factors, one per step.
    pub factors: Vec<f64>,
}

/// Capacity-weighted national wind curve scaled to an energy budget and
/// averaged by time of day.
///
/// `energy_budget` is the MWh produced over the whole cluster series. The
/// result has `24 / step_hours` values.
pub fn wind_availability_profile(source: &str, clusters: &[WindCluster], energy_budget: f64, step_hours: f64) -> Result<AvailabilityProfile> {
    let series = wind_energy_series(clusters, energy_budget, step_hours)?;
    let per_day = steps_per_day(step_hours)?;
    if series.len() % per_day != 0 {
        return Err(Error::Dimension(format!(
            "wind series of {} steps is not a whole number of days",
            series.len()
        )));
    }
    let days = series.len() / per_day;
    let mut caps = vec![0.0; per_day];
    for (k, e) in series.iter().enumerate() {
        caps[k % per_day] += e / step_hours;
    }
    for c in &mut caps {
        *c /= days as f64;
    }
    Ok(AvailabilityProfile {
        source: source.to_string(),
        caps,
    })
}

/// MWh per step of the aggregated wind series, before time-of-day averaging.
pub fn wind_energy_series(clusters: &[WindCluster], energy_budget: f64, step_hours: f64) -> Result<Vec<f64>> {
    let Some(first) = clusters.first() else {
        return Err(Error::validation("no wind clusters"));
    };
    let len = first.factors.len();
    if len == 0 {
        return Err(Error::validation("wind clusters have no data"));
    }
    for c in clusters {
        if c.factors.len() != len {
            return Err(Error::Dimension(format!(
                "cluster {} has {} steps, expected {len}",
                c.id,
                c.factors.len()
            )));
        }
        if !(c.installed_mw >= 0.0) || !c.installed_mw.is_finite() {
            return Err(Error::validation(format!("cluster {} has negative capacity", c.id)));
        }
        if c.factors.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::validation(format!("cluster {} has invalid capacity factors", c.id)));
        }
    }
    if clusters.iter().all(|c| c.installed_mw == 0.0) {
        return Err(Error::validation("all wind cluster capacities are zero"));
    }
    if !(energy_budget >= 0.0) || !(step_hours > 0.0) {
        return Err(Error::validation("wind budget must be non-negative and step positive"));
    }
    let mut weighted = vec![0.0; len];
    for c in clusters {
        for (w, f) in weighted.iter_mut().zip(&c.factors) {
            *w += c.installed_mw * f;
        }
    }
    let total: f64 = weighted.iter().sum();
    if total <= 0.0 {
        return Err(Error::validation("aggregated wind production is zero"));
    }
    Ok(weighted.into_iter().map(|w| w / total * energy_budget).collect())
}

/// `mix_share × p_max` at every step.
pub fn constant_availability(spec: &SourceSpec, capacity: SystemCapacity, steps: usize) -> Result<AvailabilityProfile> {
    if spec.availability != AvailabilityKind::Constant {
        return Err(Error::validation(format!(
            "source {} has {:?} availability, not constant",
            spec.name, spec.availability
        )));
    }
    Ok(AvailabilityProfile {
        source: spec.name.clone(),
        caps: vec![spec.mix_share * capacity.p_max; steps],
    })
}

pub(crate) fn steps_per_day(step_hours: f64) -> Result<usize> {
    let n = 24.0 / step_hours;
    if !(step_hours > 0.0) || (n - n.round()).abs() > 1e-9 {
        return Err(Error::validation(format!("step of {step_hours} h does not divide a day")));
    }
    Ok(n.round() as usize)
}
