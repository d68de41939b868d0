use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::RunError;
use crate::geometry::Vec3;
use crate::grid::FieldGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementPoint {
    pub position: Vec3,
    pub power_dbm: f64,
}

/// Measured received powers. `metadata` holds the `#` comment lines that
/// precede the header.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MeasurementSet {
    pub points: Vec<MeasurementPoint>,
    pub metadata: Vec<String>,
}

const HEADER: [&str; 4] = ["x", "y", "z", "power_dbm"];

/// Reads a `x,y,z,power_dbm` CSV file.
pub fn read_measurements(path: impl AsRef<Path>) -> Result<MeasurementSet, RunError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read measurements {}: {e}", path.display())))?;
    let mut set = MeasurementSet::default();
    let mut header_seen = false;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            set.metadata.push(meta.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !header_seen {
            if fields != HEADER {
                return Err(RunError::Config(format!(
                    "{}:{}: expected header `x,y,z,power_dbm`",
                    path.display(),
                    n + 1
                )));
            }
            header_seen = true;
            continue;
        }
        let values: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match values {
            Ok(v) if v.len() == 4 && v.iter().all(|x| x.is_finite()) => {
                set.points.push(MeasurementPoint { position: Vec3::new(v[0], v[1], v[2]), power_dbm: v[3] })
            }
            _ => return Err(RunError::Config(format!("{}:{}: expected four finite numbers", path.display(), n + 1))),
        }
    }
    if set.points.is_empty() {
        return Err(RunError::Config(format!("{}: no measurement points", path.display())));
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointComparison {
    pub position: Vec3,
    pub measured_dbm: f64,
    /// `None` when no ray reached the containing cell.
    pub simulated_dbm: Option<f64>,
    /// Simulated minus measured (dB).
    pub error_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStatistics {
    pub mean_abs_error_db: f64,
    /// Population standard deviation of the signed error.
    pub std_db: f64,
    pub count: usize,
}

/// Mean absolute error and population standard deviation of signed errors.
pub fn error_statistics(errors: &[f64]) -> Option<ErrorStatistics> {
    if errors.is_empty() {
        return None;
    }
    let n = errors.len() as f64;
    let mae = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    Some(ErrorStatistics { mean_abs_error_db: mae, std_db: var.sqrt(), count: errors.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub points: Vec<PointComparison>,
    /// `None` when no point could be compared.
    pub statistics: Option<ErrorStatistics>,
    /// Points whose cell holds no data.
    pub flagged: usize,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z,measured_dbm,simulated_dbm,error_db,no_data\n");
        for p in &self.points {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "nan".into());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.position.x,
                p.position.y,
                p.position.z,
                p.measured_dbm,
                opt(p.simulated_dbm),
                opt(p.error_db),
                u8::from(p.simulated_dbm.is_none())
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        match &self.statistics {
            Some(s) => format!(
                "points compared: {}\nno-data points: {}\nmean absolute error: {:.3} dB\nsigned error std: {:.3} dB\n",
                s.count, self.flagged, s.mean_abs_error_db, s.std_db
            ),
            None => format!("points compared: 0\nno-data points: {}\n", self.flagged),
        }
    }
}

/// Compares measured powers against the received power of the cell
/// containing each point. Points outside the grid are an error.
pub fn compare(grid: &FieldGrid, set: &MeasurementSet) -> Result<ComparisonReport, RunError> {
    let mut points = Vec::with_capacity(set.points.len());
    for m in &set.points {
        let cell = grid.cell_at(m.position)?;
        let p = grid.received_power_dbm(cell);
        let simulated = p.is_finite().then_some(p);
        points.push(PointComparison {
            position: m.position,
            measured_dbm: m.power_dbm,
            simulated_dbm: simulated,
            error_db: simulated.map(|s| s - m.power_dbm),
        });
    }
    let errors: Vec<f64> = points.iter().filter_map(|p| p.error_db).collect();
    let flagged = points.len() - errors.len();
    Ok(ComparisonReport { statistics: error_statistics(&errors), points, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn synthetic_errors() {
        let s = error_statistics(&[1.0, -1.0, 3.0, -3.0]).unwrap();
        assert_eq!(s.mean_abs_error_db, 2.0);
        assert!((s.std_db - 5f64.sqrt()).abs() < 1e-12);
        assert!((s.std_db - 2.236).abs() < 1e-3);
    }

    #[test]
    fn perfect_agreement() {
        let s = error_statistics(&[0.0; 5]).unwrap();
        assert_eq!((s.mean_abs_error_db, s.std_db), (0.0, 0.0));
        assert!(error_statistics(&[]).is_none());
    }

    #[test]
    fn reads_csv_with_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "# frequency 2.44 GHz\n# monopole receiver\nx,y,z,power_dbm\n1,2,0.5,-60.5\n\n3, 4, 0.9, -71\n")
            .unwrap();
        let set = read_measurements(&p).unwrap();
        assert_eq!(set.metadata, vec!["frequency 2.44 GHz", "monopole receiver"]);
        assert_eq!(set.points.len(), 2);
        assert_eq!(set.points[1].position, Vec3::new(3.0, 4.0, 0.9));
        assert_eq!(set.points[1].power_dbm, -71.0);
    }

    #[test]
    fn rejects_bad_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "x,y,power\n1,2,3\n").unwrap();
        assert!(read_measurements(&p).is_err());
        fs::write(&p, "x,y,z,power_dbm\n1,2,abc,3\n").unwrap();
        let e = read_measurements(&p).unwrap_err().to_string();
        assert!(e.contains(":2:"), "{e}");
        fs::write(&p, "x,y,z,power_dbm\n").unwrap();
        assert!(read_measurements(&p).is_err());
    }

    proptest! {
        #[test]
        fn statistics_symmetric_under_negation(errs in prop::collection::vec(-30.0..30.0f64, 1..40)) {
            let a = error_statistics(&errs).unwrap();
            let neg: Vec<f64> = errs.iter().map(|e| -e).collect();
            let b = error_statistics(&neg).unwrap();
            prop_assert!((a.mean_abs_error_db - b.mean_abs_error_db).abs() < 1e-12);
            prop_assert!((a.std_db - b.std_db).abs() < 1e-12);
        }
    }
}
