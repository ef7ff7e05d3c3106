use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::currency::{Currency, ExchangeRates};
use crate::emissions::CarbonPrice;
use crate::error::{Error, Result};
use crate::power_system_data::VIETNAM_P_MAX_MW;
use crate::scenarios::FleetParams;

/// Where each run's price profile comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriceMode {
    /// The historical mean day.
    Mean,
    /// One Gaussian draw per run.
    #[default]
    Sampled,
}

impl std::str::FromStr for PriceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(PriceMode::Mean),
            "sampled" => Ok(PriceMode::Sampled),
            other => Err(Error::Config(format!("unknown price mode {other:?}, expected mean or sampled"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Source-table TOML; the bundled Vietnam 2023 table when absent.
    pub source_table: Option<PathBuf>,
    pub p_max_mw: f64,
    /// Half-hourly `timestamp,power_mw` records.
    pub demand_csv: PathBuf,
    /// `cluster_id,installed_mw` manifest next to one CSV per cluster.
    pub wind_manifest: PathBuf,
    /// Cap hydro output at its mix share of `p_max_mw`.
    pub hydro_power_cap: bool,
    /// Draw fresh inflows and re-solve the dispatch for every run.
    pub resample_inflows: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            source_table: None,
            p_max_mw: VIETNAM_P_MAX_MW,
            demand_csv: PathBuf::from("data/demand_2023.csv"),
            wind_manifest: PathBuf::from("data/wind/manifest.csv"),
            hydro_power_cap: true,
            resample_inflows: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceConfig {
    /// Hourly `timestamp,price` records, currency per kWh.
    pub csv: PathBuf,
    pub currency: Currency,
    /// Lower clamp for sampled prices; `-inf` keeps negative draws.
    pub floor: Option<f64>,
}

impl Default for PriceConfig {
    fn default() -> Self {
        PriceConfig {
            csv: PathBuf::from("data/prices_hourly.csv"),
            currency: Currency::Eur,
            floor: Some(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct StationConfig {
    /// Aggregate limit, kW; every socket at full power when absent.
    pub capacity_kw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub runs: usize,
    /// Emission weights of the optimised policies; 0 maps onto the cost-only policy.
    pub lambdas: Vec<f64>,
    pub base_currency: Currency,
    pub exchange_rates: ExchangeRates,
    pub carbon_price: CarbonPrice,
    pub price_mode: PriceMode,
    pub output_dir: PathBuf,
    pub system: SystemConfig,
    pub fleet: FleetParams,
    pub station: StationConfig,
    pub prices: PriceConfig,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 2023,
            runs: 100,
            lambdas: vec![0.1, 1.0, 10.0],
            base_currency: Currency::Eur,
            exchange_rates: ExchangeRates::default(),
            carbon_price: CarbonPrice::default(),
            price_mode: PriceMode::Sampled,
            output_dir: PathBuf::from("out"),
            system: SystemConfig::default(),
            fleet: FleetParams::default(),
            station: StationConfig::default(),
            prices: PriceConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    /// Parse a config; relative paths inside resolve against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir.into();
        config.validate()?;
        Ok(config)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.lambdas.is_empty() {
            return Err(Error::Config("lambdas must not be empty".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(Error::Config(format!("lambda {l} must be a non-negative number")));
        }
        if self.prices.floor.is_some_and(f64::is_nan) {
            return Err(Error::Config("price floor must be a number".into()));
        }
        if !(self.carbon_price.per_tonne >= 0.0) {
            return Err(Error::Config("carbon price must be non-negative".into()));
        }
        if !(self.exchange_rates.vnd_per_usd > 0.0) || !(self.exchange_rates.usd_per_eur > 0.0) {
            return Err(Error::Config("exchange rates must be positive".into()));
        }
        if !(self.system.p_max_mw > 0.0) {
            return Err(Error::Config("p_max_mw must be positive".into()));
        }
        if (self.fleet.horizon_hours - 24.0).abs() > 1e-9 {
            return Err(Error::Config("the fleet horizon must cover the 24 h dispatch day".into()));
        }
        if let Some(c) = self.station.capacity_kw {
            if !(c >= 0.0) {
                return Err(Error::Config("station capacity must be non-negative".into()));
            }
        }
        self.fleet.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Station limit, kW.
    pub fn station_capacity_kw(&self) -> f64 {
        self.station
            .capacity_kw
            .unwrap_or(self.fleet.n_evs as f64 * self.fleet.socket_kw)
    }

    /// SHA-256 of the canonical JSON form of the config, hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn price_floor_can_be_disabled() {
        let c = ExperimentConfig::from_toml_str("[prices]\nfloor = -inf\n", ".").unwrap();
        assert_eq!(c.prices.floor, Some(f64::NEG_INFINITY));
        assert!(ExperimentConfig::from_toml_str("[prices]\nfloor = nan\n", ".").is_err());
    }

    #[test]
    fn empty_document_gives_defaults() {
        let c = ExperimentConfig::from_toml_str("", "/tmp").unwrap();
        assert_eq!(c.runs, 100);
        assert_eq!(c.fleet.n_evs, 300);
        assert_eq!(c.station_capacity_kw(), 6600.0);
        assert_eq!(c.resolve(Path::new("data/x.csv")), PathBuf::from("/tmp/data/x.csv"));
    }

    #[test]
    fn overrides_and_rejections() {
        let c = ExperimentConfig::from_toml_str("runs = 3\nlambdas = [0.0, 10.0]\n[fleet]\nn_evs = 10\n", ".").unwrap();
        assert_eq!((c.runs, c.fleet.n_evs), (3, 10));
        assert!(ExperimentConfig::from_toml_str("runs = 0", ".").is_err());
        assert!(ExperimentConfig::from_toml_str("lambdas = []", ".").is_err());
        assert!(ExperimentConfig::from_toml_str("lambdas = [-1.0]", ".").is_err());
        assert!(ExperimentConfig::from_toml_str("unknown_key = 1", ".").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.master_seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
