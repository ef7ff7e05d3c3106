use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::charging::EvSession;
use crate::error::{Error, Result};

/// Normal dwell time, hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwellModel {
    pub mean_hours: f64,
    pub sd_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetParams {
    pub n_evs: usize,
    pub morning_peak_hour: f64,
    pub afternoon_peak_hour: f64,
    /// Second Beta shape parameter, shared by both cohorts.
    pub beta_b: f64,
    pub morning_dwell: DwellModel,
    pub afternoon_dwell: DwellModel,
    pub socket_kw: f64,
    pub horizon_hours: f64,
    pub step_hours: f64,
}

impl Default for FleetParams {
    fn default() -> Self {
        FleetParams {
            n_evs: 300,
            morning_peak_hour: 7.0,
            afternoon_peak_hour: 17.0,
            beta_b: 12.0,
            morning_dwell: DwellModel {
                mean_hours: 7.0,
                sd_hours: 4.0,
            },
            afternoon_dwell: DwellModel {
                mean_hours: 3.0,
                sd_hours: 1.0,
            },
            socket_kw: 22.0,
            horizon_hours: 24.0,
            step_hours: 1.0 / 6.0,
        }
    }
}

impl FleetParams {
    pub fn steps(&self) -> usize {
        (self.horizon_hours / self.step_hours).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_evs == 0 {
            return Err(Error::validation("fleet needs at least one EV"));
        }
        for h in [self.morning_peak_hour, self.afternoon_peak_hour] {
            if !(h > 0.0 && h < 24.0) {
                return Err(Error::validation(format!("peak hour {h} outside (0, 24)")));
            }
        }
        if !(self.beta_b > 2.0) {
            return Err(Error::validation(format!("beta shape must exceed 2, got {}", self.beta_b)));
        }
        for d in [self.morning_dwell, self.afternoon_dwell] {
            if !(d.sd_hours > 0.0) || !d.mean_hours.is_finite() {
                return Err(Error::validation("dwell standard deviation must be positive"));
            }
        }
        if !(self.socket_kw > 0.0) || !(self.step_hours > 0.0) || !(self.horizon_hours >= self.step_hours) {
            return Err(Error::validation("socket power, step and horizon must be positive"));
        }
        let ratio = self.horizon_hours / self.step_hours;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::validation("step must divide the horizon"));
        }
        Ok(())
    }
}

/// `α` such that Beta(α, β) peaks at `peak_hour / 24`.
pub fn mode_matched_alpha(peak_hour: f64, beta: f64) -> f64 {
    let m = peak_hour / 24.0;
    (1.0 + m * (beta - 2.0)) / (1.0 - m)
}

/// Sessions `0..n`; the first `ceil(n/2)` follow the morning pattern.
pub fn sample_fleet<R: Rng + ?Sized>(params: &FleetParams, rng: &mut R) -> Result<Vec<EvSession>> {
    params.validate()?;
    let steps = params.steps();
    let delta = params.step_hours;
    let cohort = |peak: f64, dwell: DwellModel| -> Result<(Beta<f64>, Normal<f64>)> {
        let alpha = mode_matched_alpha(peak, params.beta_b);
        let beta = Beta::new(alpha, params.beta_b).map_err(|e| Error::validation(e.to_string()))?;
        let normal = Normal::new(dwell.mean_hours, dwell.sd_hours).map_err(|e| Error::validation(e.to_string()))?;
        Ok((beta, normal))
    };
    let morning = cohort(params.morning_peak_hour, params.morning_dwell)?;
    let afternoon = cohort(params.afternoon_peak_hour, params.afternoon_dwell)?;
    let demand_frac = Beta::new(2.0, 2.0).expect("valid shape");
    let n_morning = params.n_evs.div_ceil(2);

    let mut sessions = Vec::with_capacity(params.n_evs);
    for id in 0..params.n_evs {
        let (arrival_dist, dwell_dist) = if id < n_morning { &morning } else { &afternoon };
        let hour = params.horizon_hours * arrival_dist.sample(rng);
        let arrival = ((hour / delta).floor() as usize).min(steps - 1);
        let dwell = loop {
            let tau = dwell_dist.sample(rng);
            if tau >= delta {
                break tau;
            }
        };
        let dwell_steps = ((dwell / delta + 1e-9).floor() as usize).max(1);
        let departure = (arrival + dwell_steps).min(steps);
        let demand_kwh = demand_frac.sample(rng) * params.socket_kw * (departure - arrival) as f64 * delta;
        sessions.push(EvSession {
            id,
            arrival,
            departure,
            demand_kwh,
        });
    }
    Ok(sessions)
}

pub fn write_fleet_csv(path: impl AsRef<Path>, sessions: &[EvSession]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let io = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["ev_id", "arrival_step", "departure_step", "demand_kwh"])
        .map_err(io)?;
    for s in sessions {
        w.write_record([
            s.id.to_string(),
            s.arrival.to_string(),
            s.departure.to_string(),
            s.demand_kwh.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_fleet_csv(path: impl AsRef<Path>) -> Result<Vec<EvSession>> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::io(path, e.into()))?;
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", rec.len())));
        }
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(format!("bad integer {:?}", &rec[i])));
        out.push(EvSession {
            id: int(0)?,
            arrival: int(1)?,
            departure: int(2)?,
            demand_kwh: rec[3].parse().map_err(|_| bad(format!("bad demand {:?}", &rec[3])))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alpha_matches_hand_values() {
        let morning = (1.0 + (7.0 / 24.0) * 10.0) / (1.0 - 7.0 / 24.0);
        let afternoon = (1.0 + (17.0 / 24.0) * 10.0) / (1.0 - 17.0 / 24.0);
        assert!((mode_matched_alpha(7.0, 12.0) - morning).abs() < 1e-12);
        assert!((mode_matched_alpha(17.0, 12.0) - afternoon).abs() < 1e-12);
        assert!((morning - 5.529).abs() < 1e-3);
        assert!((afternoon - 27.714).abs() < 1e-3);
        // the mode lands back on the peak
        let a = mode_matched_alpha(7.0, 12.0);
        assert!(((a - 1.0) / (a + 12.0 - 2.0) * 24.0 - 7.0).abs() < 1e-12);
    }

    #[test]
    fn fleet_respects_invariants_and_cohort_split() {
        let params = FleetParams {
            n_evs: 301,
            ..FleetParams::default()
        };
        let fleet = sample_fleet(&params, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(fleet.len(), 301);
        for (k, s) in fleet.iter().enumerate() {
            assert_eq!(s.id, k);
            assert!(s.arrival < 144 && s.arrival < s.departure && s.departure <= 144);
            assert!(s.demand_kwh >= 0.0 && s.demand_kwh <= 22.0 * (s.departure - s.arrival) as f64 / 6.0);
        }
        let again = sample_fleet(&params, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(fleet, again);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = FleetParams {
            beta_b: 2.0,
            ..FleetParams::default()
        };
        assert!(p.validate().is_err());
        p.beta_b = 12.0;
        p.morning_peak_hour = 24.0;
        assert!(p.validate().is_err());
        p.morning_peak_hour = 7.0;
        p.n_evs = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn fleet_csv_round_trip() {
        let fleet = sample_fleet(
            &FleetParams {
                n_evs: 5,
                ..FleetParams::default()
            },
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fleet.csv");
        write_fleet_csv(&path, &fleet).unwrap();
        assert_eq!(read_fleet_csv(&path).unwrap(), fleet);
    }
}
