use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Fixed CSV schema of a flight log. Motor speed columns are optional.
pub const LOG_COLUMNS: [&str; 13] = ["t", "p", "q", "r", "az", "u1", "u2", "u3", "u4", "w1", "w2", "w3", "w4"];

/// Uniformly sampled identification log.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightLog {
    pub fs: f64,
    /// Body rates, rad/s.
    pub gyro: Vec<[f64; 3]>,
    /// Body z specific acceleration, m/s².
    pub acc_z: Vec<f64>,
    /// Throttle command per motor.
    pub throttle: Vec<[f64; 4]>,
    /// Measured motor speeds, rad/s, when available.
    pub motor_speed: Option<Vec<[f64; 4]>>,
}

fn finite<const N: usize>(v: &[[f64; N]]) -> bool {
    v.iter().all(|r| r.iter().all(|x| x.is_finite()))
}

impl FlightLog {
    pub fn new(
        fs: f64,
        gyro: Vec<[f64; 3]>,
        acc_z: Vec<f64>,
        throttle: Vec<[f64; 4]>,
        motor_speed: Option<Vec<[f64; 4]>>,
    ) -> Result<Self> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs}")));
        }
        let n = gyro.len();
        if acc_z.len() != n || throttle.len() != n || motor_speed.as_ref().is_some_and(|w| w.len() != n) {
            return Err(Error::Dimension("log channels have different lengths".into()));
        }
        if n < 2 {
            return Err(Error::InvalidParameter("log needs at least two samples".into()));
        }
        if !(finite(&gyro) && acc_z.iter().all(|x| x.is_finite()) && finite(&throttle)) || motor_speed.as_ref().is_some_and(|w| !finite(w)) {
            return Err(Error::InvalidParameter("non-finite log sample".into()));
        }
        Ok(Self { fs, gyro, acc_z, throttle, motor_speed })
    }

    pub fn len(&self) -> usize {
        self.gyro.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gyro.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 / self.fs
    }

    /// Copy with every motor channel (throttle and speed) multiplied by `c`.
    pub fn scale_motor_channels(&self, c: f64) -> Self {
        let sc = |v: &[[f64; 4]]| v.iter().map(|r| r.map(|x| x * c)).collect::<Vec<_>>();
        Self {
            fs: self.fs,
            gyro: self.gyro.clone(),
            acc_z: self.acc_z.clone(),
            throttle: sc(&self.throttle),
            motor_speed: self.motor_speed.as_deref().map(sc),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ncol = if self.motor_speed.is_some() { 13 } else { 9 };
        w.write_record(&LOG_COLUMNS[..ncol])?;
        for k in 0..self.len() {
            let mut row = vec![k as f64 / self.fs];
            row.extend(self.gyro[k]);
            row.push(self.acc_z[k]);
            row.extend(self.throttle[k]);
            if let Some(ws) = &self.motor_speed {
                row.extend(ws[k]);
            }
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse a log; the sample rate is taken from the time column, which
    /// must be uniform to within 0.1% of a period.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let with_speed = match header.len() {
            9 => false,
            13 => true,
            n => return Err(Error::Parse(format!("log has {n} columns, expected 9 or 13"))),
        };
        if header.iter().zip(LOG_COLUMNS).any(|(h, c)| h != c) {
            return Err(Error::Parse(format!("log header must be {}", LOG_COLUMNS[..header.len()].join(","))));
        }
        let (mut t, mut gyro, mut acc_z, mut throttle, mut speed) = (vec![], vec![], vec![], vec![], vec![]);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("row {}: bad number '{s}'", i + 1))))
                .collect::<Result<_>>()?;
            if v.len() != header.len() {
                return Err(Error::Parse(format!("row {} has {} fields", i + 1, v.len())));
            }
            t.push(v[0]);
            gyro.push([v[1], v[2], v[3]]);
            acc_z.push(v[4]);
            throttle.push([v[5], v[6], v[7], v[8]]);
            if with_speed {
                speed.push([v[9], v[10], v[11], v[12]]);
            }
        }
        if t.len() < 2 {
            return Err(Error::Parse("log needs at least two rows".into()));
        }
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(dt > 0.0 && dt.is_finite()) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-3 * dt) {
            return Err(Error::Parse("time column is not uniformly sampled".into()));
        }
        Self::new(1.0 / dt, gyro, acc_z, throttle, with_speed.then_some(speed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FlightLog {
        FlightLog::new(
            500.0,
            vec![[0.1, 0.2, 0.3], [0.15, -0.2, 1e-9]],
            vec![-9.81, -9.7],
            vec![[1.0, 2.0, 3.0, 4.0], [0.5, 0.25, 0.125, 1.0 / 3.0]],
            Some(vec![[10.0; 4], [11.0; 4]]),
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let log = sample();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let back = FlightLog::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.gyro, log.gyro);
        assert_eq!(back.throttle, log.throttle);
        assert_eq!(back.motor_speed, log.motor_speed);
        assert!((back.fs - 500.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_jittered_time() {
        let text = "t,p,q,r,az,u1,u2,u3,u4\n0,0,0,0,0,0,0,0,0\n0.002,0,0,0,0,0,0,0,0\n0.005,0,0,0,0,0,0,0,0\n";
        assert!(FlightLog::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn rejects_ragged_channels() {
        assert!(FlightLog::new(500.0, vec![[0.0; 3]; 3], vec![0.0; 2], vec![[0.0; 4]; 3], None).is_err());
    }
}
