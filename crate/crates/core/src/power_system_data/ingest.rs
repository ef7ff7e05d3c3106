use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;

use super::WindCluster;
use crate::error::{Error, Result};

const TIMESTAMP_FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];

pub fn parse_timestamp(text: &str) -> Option<NaiveDateTime> {
    let text = text.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(text, f).ok())
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Two-column `timestamp,value` CSV with a header row.
pub fn read_timeseries_csv(path: impl AsRef<Path>) -> Result<Vec<(NaiveDateTime, f64)>> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let mut out = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| parse_error(path, line, e.to_string()))?;
        if record.len() != 2 {
            return Err(parse_error(path, line, format!("expected 2 fields, found {}", record.len())));
        }
        let ts = parse_timestamp(&record[0])
            .ok_or_else(|| parse_error(path, line, format!("bad timestamp {:?}", &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| parse_error(path, line, format!("non-numeric value {:?}", &record[1])))?;
        out.push((ts, value));
    }
    Ok(out)
}

/// `timestamp,power_mw` records.
pub fn read_demand_csv(path: impl AsRef<Path>) -> Result<Vec<(NaiveDateTime, f64)>> {
    read_timeseries_csv(path)
}

/// Read a `cluster_id,installed_mw` manifest and one `<cluster_id>.csv`
/// capacity-factor file per cluster from the same directory.
pub fn read_wind_clusters(manifest: impl AsRef<Path>) -> Result<Vec<WindCluster>> {
    let manifest = manifest.as_ref();
    let dir: PathBuf = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = open(manifest)?;
    let mut clusters = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| parse_error(manifest, line, e.to_string()))?;
        if record.len() != 2 {
            return Err(parse_error(manifest, line, "expected cluster_id,installed_mw"));
        }
        let id = record[0].to_string();
        let installed_mw: f64 = record[1]
            .parse()
            .map_err(|_| parse_error(manifest, line, format!("non-numeric capacity {:?}", &record[1])))?;
        let factors = read_timeseries_csv(dir.join(format!("{id}.csv")))?
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        clusters.push(WindCluster {
            id,
            installed_mw,
            factors,
        });
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parse_error_carries_line_number() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "timestamp,power_mw\n2023-01-01T00:00:00,1.0\n2023-01-01T00:30:00,abc").unwrap();
        match read_demand_csv(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn accepts_space_separated_timestamps() {
        assert!(parse_timestamp("2023-03-01 12:30").is_some());
        assert!(parse_timestamp("2023-03-01T12:30:00").is_some());
        assert!(parse_timestamp("March 1").is_none());
    }
}
