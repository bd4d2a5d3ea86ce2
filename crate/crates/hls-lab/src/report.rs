//! Report envelopes and JSON/CSV emission.
//!
//! JSON reports carry a fixed top-level schema {meta, records, summary} with
//! a canonical field order (struct order), so identical configurations
//! produce byte-identical files. CSV flattens the records only. Every
//! tolerance or slack a command asserts against travels in the meta block.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Run provenance: parameters, discretization, seed, and the tolerances the
/// run asserted against.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub n: u32,
    pub s: f64,
    #[serde(rename = "L")]
    pub cutoff: usize,
    pub m: usize,
    pub seed: u64,
    pub version: String,
    pub slack_percent: f64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Meta {
    pub fn new(n: u32, s: f64, cutoff: usize, m: usize, seed: u64, slack_percent: f64) -> Self {
        Self {
            n,
            s,
            cutoff,
            m,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            slack_percent,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn with_tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }
}

/// The {meta, records, summary} envelope every command emits.
#[derive(Debug, Clone, Serialize)]
pub struct Report<R: Serialize, S: Serialize> {
    pub meta: Meta,
    pub records: Vec<R>,
    pub summary: S,
}

impl<R: Serialize, S: Serialize> Report<R, S> {
    pub fn to_json(&self) -> Result<String> {
        let mut out = serde_json::to_string_pretty(self)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        out.push('\n');
        Ok(out)
    }

    /// CSV of the records only.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for record in &self.records {
            writer
                .serialize(record)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }
}

/// Two-column (x, y) plot data for external plotting.
pub fn plot_csv(x_name: &str, y_name: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("{x_name},{y_name}\n");
    for (x, y) in points {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

/// Writes a report payload to the given path.
pub fn write_to(path: &Path, payload: &str) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(payload.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Clone)]
    struct Row {
        k: u32,
        value: f64,
    }

    #[derive(Serialize, Clone)]
    struct Summary {
        pass: bool,
    }

    #[test]
    fn json_is_deterministic_and_ordered() {
        let report = Report {
            meta: Meta::new(3, 1.0, 32, 80, 7, 5.0).with_tolerance("x", 1e-3),
            records: vec![Row { k: 1, value: 0.5 }],
            summary: Summary { pass: true },
        };
        let a = report.to_json().unwrap();
        let b = report.to_json().unwrap();
        assert_eq!(a, b);
        let meta_pos = a.find("\"meta\"").unwrap();
        let records_pos = a.find("\"records\"").unwrap();
        let summary_pos = a.find("\"summary\"").unwrap();
        assert!(meta_pos < records_pos && records_pos < summary_pos);
        assert!(a.contains("\"L\": 32"));
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn csv_flattens_records_only() {
        let report = Report {
            meta: Meta::new(3, 1.0, 32, 80, 7, 5.0),
            records: vec![Row { k: 1, value: 0.5 }, Row { k: 2, value: 0.25 }],
            summary: Summary { pass: true },
        };
        let csv = report.to_csv().unwrap();
        assert!(csv.starts_with("k,value\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(!csv.contains("meta"));
    }
}
