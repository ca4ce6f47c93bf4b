// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! CSV export: one `timestamp` column (wall-clock seconds) followed by one
//! column per series; rows are the union of all point times and missing
//! points are empty cells.

use super::deltas::DeltaSeries;
use super::AnalysisError;
use crate::snapshot::Scalar;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

pub fn format_scalar(v: Scalar) -> String {
    match v {
        Scalar::Int(i) => i.to_string(),
        Scalar::Float(f) => f.to_string(),
    }
}

pub fn write_csv<W: Write>(series: &[DeltaSeries], out: W) -> Result<(), AnalysisError> {
    if series.is_empty() {
        return Err(AnalysisError::NoSeries);
    }
    // Points of one bucket share their closing snapshot, so the monotonic
    // time is an exact join key.
    let mut rows: BTreeMap<u64, (f64, Vec<Option<Scalar>>)> = BTreeMap::new();
    for (col, s) in series.iter().enumerate() {
        for p in &s.points {
            let row = rows.entry(p.monotonic_ns).or_insert_with(|| (p.wall_clock, vec![None; series.len()]));
            row.1[col] = Some(p.value);
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["timestamp".to_string()];
    header.extend(series.iter().map(DeltaSeries::label));
    w.write_record(&header)?;
    for (wall, values) in rows.values() {
        let mut record = vec![wall.to_string()];
        record.extend(values.iter().map(|v| v.map(format_scalar).unwrap_or_default()));
        w.write_record(&record)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn export_csv(series: &[DeltaSeries], path: &Path) -> Result<(), AnalysisError> {
    let write_err = |source: io::Error| AnalysisError::Write { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(write_err)?;
    let mut buf = io::BufWriter::new(file);
    write_csv(series, &mut buf)?;
    buf.flush().map_err(write_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::deltas::DeltaPoint;

    fn s(metric: &str, pts: &[(u64, Scalar)]) -> DeltaSeries {
        DeltaSeries {
            metric: metric.to_string(),
            pid: None,
            process_name: None,
            interval_seconds: 1.0,
            points: pts
                .iter()
                .map(|&(t, value)| DeltaPoint {
                    wall_clock: 100.0 + t as f64 * 0.5,
                    monotonic_ns: t,
                    value,
                    reset: false,
                })
                .collect(),
        }
    }

    #[test]
    fn equal_length_series() {
        let a = s("a", &[(1, Scalar::Int(5)), (2, Scalar::Int(6))]);
        let b = s("b", &[(1, Scalar::Float(0.25)), (2, Scalar::Int(0))]);
        let mut out = Vec::new();
        write_csv(&[a, b], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "timestamp,a,b\n100.5,5,0.25\n101,6,0\n");
    }

    #[test]
    fn union_of_times() {
        let a = s("a", &[(1, Scalar::Int(5))]);
        let mut b = s("b", &[(2, Scalar::Int(7))]);
        b.pid = Some(42);
        let mut out = Vec::new();
        write_csv(&[a, b], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "timestamp,a,b/42\n100.5,5,\n101,,7\n");
    }

    #[test]
    fn empty_and_unwritable() {
        assert!(matches!(write_csv(&[], Vec::new()), Err(AnalysisError::NoSeries)));
        let a = s("a", &[(1, Scalar::Int(5))]);
        let err = export_csv(&[a], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(matches!(err, AnalysisError::Write { .. }));
    }
}
