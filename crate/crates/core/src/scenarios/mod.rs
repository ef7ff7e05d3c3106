//! Stochastic inputs: EV fleets and electricity-price profiles.

mod fleet;
mod prices;

pub use fleet::{mode_matched_alpha, read_fleet_csv, sample_fleet, write_fleet_csv, DwellModel, FleetParams};
pub use prices::{daily_price_rows, fit_price_model, interpolate_day, read_price_csv, sample_price_profile, PriceModel};
