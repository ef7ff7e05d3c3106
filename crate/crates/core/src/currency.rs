use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Currency {
    Vnd,
    Usd,
    Eur,
}

/// Conversion rates between the three currencies the pipeline handles.
///
/// The defaults put 70 USD at exactly 64 EUR and 1 785 000 VND.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExchangeRates {
    pub vnd_per_usd: f64,
    pub usd_per_eur: f64,
}

impl Default for ExchangeRates {
    fn default() -> Self {
        ExchangeRates {
            vnd_per_usd: 25_500.0,
            usd_per_eur: 70.0 / 64.0,
        }
    }
}

impl ExchangeRates {
    fn usd_value(&self, currency: Currency) -> f64 {
        match currency {
            Currency::Usd => 1.0,
            Currency::Vnd => 1.0 / self.vnd_per_usd,
            Currency::Eur => self.usd_per_eur,
        }
    }

    pub fn convert(&self, amount: f64, from: Currency, to: Currency) -> f64 {
        if from == to {
            return amount;
        }
        amount * self.usd_value(from) / self.usd_value(to)
    }
}
