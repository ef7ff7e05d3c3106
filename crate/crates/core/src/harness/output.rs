use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::PriceMode;
use super::run::{Experiment, RunArtifacts, RunSeeds};
use super::stats::SummaryStats;
use crate::currency::{Currency, ExchangeRates};
use crate::emissions::{EmissionPriceSeries, IntensitySeries};
use crate::error::{Error, Result};
use crate::scenarios::write_fleet_csv;
use crate::ucp::DispatchSchedule;

pub const SUMMARY_HEADER: [&str; 7] = [
    "policy",
    "mean_cost",
    "sd_cost",
    "mean_emissions_kg",
    "sd_emissions_kg",
    "delta_cost_vs_fifs",
    "delta_emissions_vs_fifs",
];

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self> {
        let writer = csv::Writer::from_path(&path).map_err(|e| Error::io(&path, e.into()))?;
        let mut t = Table { path, writer };
        t.row(header.iter().map(|s| s.to_string()))?;
        Ok(t)
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        self.writer
            .write_record(fields.into_iter().collect::<Vec<_>>())
            .map_err(|e| Error::io(&self.path, e.into()))
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One row per policy under [`SUMMARY_HEADER`].
pub fn write_summary_csv(stats: &SummaryStats, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::create(path.as_ref().to_path_buf(), &SUMMARY_HEADER)?;
    for p in &stats.policies {
        t.row([
            p.policy.clone(),
            p.cost.mean.to_string(),
            p.cost.sd.to_string(),
            p.emissions_kg.mean.to_string(),
            p.emissions_kg.sd.to_string(),
            p.delta_cost_vs_fifs.to_string(),
            p.delta_emissions_vs_fifs.to_string(),
        ])?;
    }
    t.finish()
}

pub fn write_summary_json(stats: &SummaryStats, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), stats)
}

/// What is needed to reproduce an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub runs: usize,
    pub lambdas: Vec<f64>,
    pub price_mode: PriceMode,
    pub base_currency: Currency,
    pub exchange_rates: ExchangeRates,
    /// Base currency per tonne.
    pub carbon_price: f64,
    pub seeds: Vec<RunSeeds>,
}

impl Manifest {
    pub fn new(experiment: &Experiment, seeds: Vec<RunSeeds>) -> Self {
        let c = &experiment.config;
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: c.hash(),
            master_seed: c.master_seed,
            runs: seeds.len(),
            lambdas: c.lambdas.clone(),
            price_mode: c.price_mode,
            base_currency: c.base_currency,
            exchange_rates: c.exchange_rates,
            carbon_price: experiment.carbon_price(),
            seeds,
        }
    }
}

pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), manifest)
}

#[derive(Serialize)]
struct DispatchSummary<'a> {
    total_cost: f64,
    energy_mwh: Vec<(String, f64)>,
    intensity_g_per_kwh: &'a [f64],
}

/// `dispatch.csv`, `hydro.csv`, `intensity.csv` and `ucp_summary.json`.
pub fn write_dispatch_outputs(
    dir: impl AsRef<Path>,
    dispatch: &DispatchSchedule,
    hydro_name: &str,
    intensity: &IntensitySeries,
    price: &EmissionPriceSeries,
) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    let hydro_mw = dispatch.hydro_power();
    let mut t = Table::create(dir.join("dispatch.csv"), &["hour", "source", "power_mw"])?;
    for (h, row) in dispatch.power.iter().enumerate() {
        for (name, mw) in dispatch.sources.iter().zip(row) {
            t.row([h.to_string(), name.clone(), mw.to_string()])?;
        }
        t.row([h.to_string(), hydro_name.to_string(), hydro_mw[h].to_string()])?;
    }
    t.finish()?;

    let mut t = Table::create(dir.join("hydro.csv"), &["hour", "hydro_water_m3", "reservoir_m3"])?;
    for (h, (w, v)) in dispatch.hydro_water.iter().zip(&dispatch.reservoir).enumerate() {
        t.row([h.to_string(), w.to_string(), v.to_string()])?;
    }
    t.finish()?;

    let mut t = Table::create(
        dir.join("intensity.csv"),
        &["hour", "intensity_g_per_kwh", "total_emissions_kg", "emission_price_per_kwh"],
    )?;
    for h in 0..intensity.values.len() {
        t.row([
            h.to_string(),
            intensity.values[h].to_string(),
            intensity.emissions_kg[h].to_string(),
            price.values[h].to_string(),
        ])?;
    }
    t.finish()?;

    write_json(
        &dir.join("ucp_summary.json"),
        &DispatchSummary {
            total_cost: dispatch.total_cost,
            energy_mwh: dispatch.energy_by_source(hydro_name),
            intensity_g_per_kwh: &intensity.values,
        },
    )
}

/// Dispatch outputs plus `fleet.csv`, `heatmap.csv` for `heatmap_policy`,
/// `load_price.csv` and `metrics.json`.
pub fn write_run_outputs(dir: impl AsRef<Path>, run: &RunArtifacts, hydro_name: &str, heatmap_policy: &str) -> Result<()> {
    let dir = dir.as_ref();
    write_dispatch_outputs(dir, &run.dispatch, hydro_name, &run.intensity, &run.emission_price)?;
    write_fleet_csv(dir.join("fleet.csv"), run.fleet())?;

    let alloc = run
        .allocation(heatmap_policy)
        .ok_or_else(|| Error::validation(format!("no allocation for policy {heatmap_policy}")))?;
    let mut t = Table::create(dir.join("heatmap.csv"), &["step", "ev_id", "power_kw"])?;
    for step in 0..alloc.steps() {
        for (i, s) in run.fleet().iter().enumerate() {
            t.row([step.to_string(), s.id.to_string(), alloc.get(step, i).to_string()])?;
        }
    }
    t.finish()?;

    let mut header = vec!["step".to_string(), "energy_price".to_string(), "emission_price".to_string()];
    header.extend(run.allocations.iter().map(|(p, _)| format!("load_kw_{p}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let loads: Vec<Vec<f64>> = run.allocations.iter().map(|(_, a)| a.step_load()).collect();
    let mut t = Table::create(dir.join("load_price.csv"), &header_refs)?;
    for step in 0..run.instance.steps() {
        let mut row = vec![
            step.to_string(),
            run.instance.energy_price[step].to_string(),
            run.instance.emission_price[step].to_string(),
        ];
        row.extend(loads.iter().map(|l| l[step].to_string()));
        t.row(row)?;
    }
    t.finish()?;

    write_json(&dir.join("metrics.json"), &run.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::stats::{Moments, PolicySummary};

    fn stats() -> SummaryStats {
        let m = |v: f64| Moments {
            mean: v,
            sd: 0.5,
            min: v,
            max: v,
        };
        SummaryStats {
            runs: 2,
            policies: vec![
                PolicySummary {
                    policy: "lambda=10".into(),
                    lambda: 10.0,
                    cost: m(9.0),
                    emissions_kg: m(80.0),
                    delta_cost_vs_fifs: 10.0,
                    delta_emissions_vs_fifs: 20.0,
                },
                PolicySummary {
                    policy: "fifs".into(),
                    lambda: 0.0,
                    cost: m(10.0),
                    emissions_kg: m(100.0),
                    delta_cost_vs_fifs: 0.0,
                    delta_emissions_vs_fifs: 0.0,
                },
            ],
        }
    }

    #[test]
    fn summary_csv_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let s = stats();
        write_summary_csv(&s, dir.path().join("s.csv")).unwrap();
        write_summary_json(&s, dir.path().join("s.json")).unwrap();
        let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SUMMARY_HEADER.join(","));
        assert_eq!(lines.len(), 3);
        let back: SummaryStats = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
        assert_eq!(back, s);
        let first: Vec<f64> = lines[1].split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, vec![9.0, 0.5, 80.0, 0.5, 10.0, 20.0]);
    }

    #[test]
    fn rewriting_gives_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_summary_csv(&stats(), &path).unwrap();
        let a = fs::read(&path).unwrap();
        write_summary_csv(&stats(), &path).unwrap();
        assert_eq!(a, fs::read(&path).unwrap());
    }
}
