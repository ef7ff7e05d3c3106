use std::collections::BTreeMap;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::power_system_data::read_timeseries_csv;

const RIDGE: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;

/// Gaussian day-profile model on the fine grid.
#[derive(Debug, Clone)]
pub struct PriceModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
    pub floor: f64,
}

impl PriceModel {
    /// Covariance must be symmetric and positive semidefinite within 1e-8.
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>, floor: f64) -> Result<Self> {
        let n = mean.len();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::Dimension(format!(
                "mean has {n} entries, covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::validation("price model has non-finite entries"));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > PSD_TOL {
            return Err(Error::Factorization(format!("covariance asymmetric by {asym:e}")));
        }
        let eig = SymmetricEigen::new(covariance.clone());
        let min_eig = eig.eigenvalues.min();
        if min_eig < -PSD_TOL {
            return Err(Error::Factorization(format!("covariance has eigenvalue {min_eig:e}")));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
        Ok(PriceModel {
            mean: DVector::from_vec(mean),
            covariance,
            factor,
            floor,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Replace the lower clamp; `f64::NEG_INFINITY` keeps negative draws.
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }
}

/// Hourly `timestamp,price` records.
pub fn read_price_csv(path: impl AsRef<Path>) -> Result<Vec<(NaiveDateTime, f64)>> {
    read_timeseries_csv(path)
}

/// Group hourly records into complete days, in date order.
pub fn daily_price_rows(records: &[(NaiveDateTime, f64)]) -> Result<Vec<(NaiveDate, [f64; 24])>> {
    let mut days: BTreeMap<NaiveDate, [Option<f64>; 24]> = BTreeMap::new();
    for (ts, price) in records {
        if ts.minute() != 0 || ts.second() != 0 {
            return Err(Error::validation(format!("price at {ts} is not on the hour")));
        }
        if !price.is_finite() {
            return Err(Error::validation(format!("non-finite price at {ts}")));
        }
        days.entry(ts.date()).or_insert([None; 24])[ts.hour() as usize] = Some(*price);
    }
    days.into_iter()
        .map(|(date, slots)| {
            let mut row = [0.0; 24];
            for (h, v) in slots.iter().enumerate() {
                row[h] = v.ok_or_else(|| Error::validation(format!("day {date} is missing hour {h}")))?;
            }
            Ok((date, row))
        })
        .collect()
}

/// Linear interpolation of one day onto `steps` points; the last segment
/// wraps to the day's first hour.
pub fn interpolate_day(hourly: &[f64; 24], steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            let h = 24.0 * k as f64 / steps as f64;
            let lo = h.floor() as usize % 24;
            let frac = h - h.floor();
            hourly[lo] * (1.0 - frac) + hourly[(lo + 1) % 24] * frac
        })
        .collect()
}

/// Mean and sample covariance (divisor `D − 1`) of the interpolated days,
/// symmetrized with a small ridge; floor 0.
pub fn fit_price_model(records: &[(NaiveDateTime, f64)], steps: usize) -> Result<PriceModel> {
    let days = daily_price_rows(records)?;
    if days.len() < 2 {
        return Err(Error::validation(format!("need at least 2 days of prices, found {}", days.len())));
    }
    let d = days.len();
    let rows: Vec<Vec<f64>> = days.iter().map(|(_, h)| interpolate_day(h, steps)).collect();
    let data = DMatrix::from_fn(d, steps, |i, j| rows[i][j]);
    let mean: Vec<f64> = (0..steps).map(|j| data.column(j).sum() / d as f64).collect();
    let centered = DMatrix::from_fn(d, steps, |i, j| data[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (d - 1) as f64;
    let cov = (&cov + cov.transpose()) * 0.5 + DMatrix::identity(steps, steps) * RIDGE;
    PriceModel::new(mean, cov, 0.0)
}

/// One draw of `mean + L z`, clamped below at the model floor.
pub fn sample_price_profile<R: Rng + ?Sized>(model: &PriceModel, rng: &mut R) -> Vec<f64> {
    let z = DVector::from_fn(model.dim(), |_, _| StandardNormal.sample(rng));
    let draw = &model.mean + &model.factor * z;
    draw.iter().map(|v| v.max(model.floor)).collect()
}
