//! CSV and JSON writers, the schedule reader and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use qrobust::dynamics::{ControlSchedule, StateTrajectory, Trajectory};

use crate::config::{field_err, ConfigError};

/// Collects every file written during a run.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    fn record(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let path = self.record(name);
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> std::io::Result<()> {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()
    }

    /// `t`, then `re_i_j, im_i_j` for every entry in row-major order.
    pub fn unitary_csv(&mut self, name: &str, traj: &Trajectory) -> std::io::Result<()> {
        let dim = traj.unitaries[0].dim();
        let mut header = vec!["t".to_string()];
        for i in 0..dim {
            for j in 0..dim {
                header.push(format!("re_{i}_{j}"));
                header.push(format!("im_{i}_{j}"));
            }
        }
        let rows = traj.times.iter().zip(&traj.unitaries).map(|(t, u)| {
            let mut row = vec![*t];
            for i in 0..dim {
                for j in 0..dim {
                    let z = u.matrix()[(i, j)];
                    row.extend([z.re, z.im]);
                }
            }
            row
        });
        self.csv(name, &header, rows)
    }

    pub fn bloch_csv(&mut self, name: &str, states: &StateTrajectory) -> std::io::Result<()> {
        let header = ["t", "bx", "by", "bz"].map(String::from);
        let bloch = states.bloch.as_ref().expect("single-qubit trajectory");
        let rows = states.times.iter().zip(bloch).map(|(t, b)| vec![*t, b[0], b[1], b[2]]);
        self.csv(name, &header, rows)
    }

    /// `t_k, h_1, ..., h_m` for every step.
    pub fn schedule_csv(&mut self, name: &str, schedule: &ControlSchedule) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((1..=schedule.channels()).map(|j| format!("h_{j}")));
        let rows = schedule.values().iter().enumerate().map(|(k, row)| {
            let mut r = vec![schedule.time(k)];
            r.extend(row);
            r
        });
        self.csv(name, &header, rows)
    }
}

/// Reads a schedule CSV written by [`OutputDir::schedule_csv`].
pub fn read_schedule_csv(path: &Path, dt: f64) -> Result<Vec<Vec<f64>>, ConfigError> {
    let field = format!("schedule.file ({})", path.display());
    let mut reader = csv::Reader::from_path(path).map_err(|e| field_err(&field, e))?;
    let header = reader.headers().map_err(|e| field_err(&field, e))?.clone();
    if header.get(0) != Some("t") || header.len() < 2 {
        return Err(field_err(&field, "header must be t, h_1, ..., h_m"));
    }
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| field_err(&field, e))?;
        let nums = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| field_err(&field, format!("line {line}: {e}")))?;
        if (nums[0] - k as f64 * dt).abs() > 1e-9 * dt.max(1.0) * (k as f64).max(1.0) {
            return Err(field_err(
                &field,
                format!("line {line}: t = {} is not {k} * dt", nums[0]),
            ));
        }
        values.push(nums[1..].to_vec());
    }
    Ok(values)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub exit_code: i32,
    pub outputs: Vec<String>,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}
