use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One sample of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub t: f64,
    pub ref_pos: [f64; 3],
    pub ref_euler: [f64; 3],
    pub pos: [f64; 3],
    pub vel: [f64; 3],
    pub euler: [f64; 3],
    pub rates: [f64; 3],
    pub motors: [f64; 4],
    pub omega_c: [f64; 4],
    pub nu_ang: [f64; 3],
    pub nu_acc: [f64; 3],
    pub thrust_inc: f64,
    pub euler_c: [f64; 3],
    pub force: [f64; 3],
    pub torque: [f64; 3],
    pub rates_f: [f64; 3],
    pub acc_f: [f64; 3],
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    /// A state left the configured bounds.
    Diverged { t: f64, reason: String },
    /// A sub-step returned an error.
    Failed { t: f64, error: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// Uniformly sampled record of a run. Stops early if the run did not complete.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub scenario: String,
    pub controller: String,
    pub fs: f64,
    pub rows: Vec<TraceRow>,
    pub status: RunStatus,
}

const VEC3: [&str; 3] = ["x", "y", "z"];
const EULER: [&str; 3] = ["roll", "pitch", "yaw"];
const MOTORS: [&str; 4] = ["1", "2", "3", "4"];

/// Column names of the trace CSV, in order.
pub fn trace_columns() -> Vec<String> {
    let mut c = vec!["t".to_string()];
    let mut add = |prefix: &str, names: &[&str]| c.extend(names.iter().map(|n| format!("{prefix}_{n}")));
    add("ref_pos", &VEC3);
    add("ref", &EULER);
    add("pos", &VEC3);
    add("vel", &VEC3);
    add("att", &EULER);
    add("rate", &["p", "q", "r"]);
    add("motor", &MOTORS);
    add("motor_cmd", &MOTORS);
    add("nu_ang", &["p", "q", "r"]);
    add("nu_acc", &VEC3);
    c.push("thrust_inc".into());
    let mut add = |prefix: &str, names: &[&str]| c.extend(names.iter().map(|n| format!("{prefix}_{n}")));
    add("att_cmd", &EULER);
    add("force", &VEC3);
    add("torque", &VEC3);
    add("rate_f", &["p", "q", "r"]);
    add("acc_f", &VEC3);
    c
}

impl TraceRow {
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t];
        for a in [self.ref_pos, self.ref_euler, self.pos, self.vel, self.euler, self.rates] {
            v.extend(a);
        }
        v.extend(self.motors);
        v.extend(self.omega_c);
        v.extend(self.nu_ang);
        v.extend(self.nu_acc);
        v.push(self.thrust_inc);
        for a in [self.euler_c, self.force, self.torque, self.rates_f, self.acc_f] {
            v.extend(a);
        }
        v
    }
}

impl SimTrace {
    /// CSV with a header row; numbers use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(trace_columns())?;
        for r in &self.rows {
            w.write_record(r.values().iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_row_width() {
        assert_eq!(trace_columns().len(), TraceRow::default().values().len());
    }

    #[test]
    fn csv_values_round_trip() {
        let row = TraceRow { t: 0.1 + 0.2, pos: [1.0 / 3.0, -2e-17, 5.0], ..Default::default() };
        let tr = SimTrace { scenario: "s".into(), controller: "c".into(), fs: 500.0, rows: vec![row], status: RunStatus::Completed };
        let text = tr.to_csv_string().unwrap();
        let line = text.lines().nth(1).unwrap();
        let parsed: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed, row.values());
    }
}
