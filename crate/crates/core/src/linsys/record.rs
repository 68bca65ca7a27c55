use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::system::{Domain, StateSpaceSystem};
use crate::error::{Error, Result};

/// Text form of a [`StateSpaceSystem`]: matrices as row-major nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemRecord {
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<f64>,
    pub states: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(name: &str, data: &[Vec<f64>], r: usize, c: usize) -> Result<DMatrix<f64>> {
    if data.len() != r || data.iter().any(|row| row.len() != c) {
        return Err(Error::Parse(format!("matrix {name} must be {r}x{c}")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| data[i][j]))
}

impl From<StateSpaceSystem> for SystemRecord {
    fn from(sys: StateSpaceSystem) -> Self {
        let (domain, ts) = match sys.domain() {
            Domain::Continuous => ("continuous".to_string(), None),
            Domain::Discrete { ts } => ("discrete".to_string(), Some(ts)),
        };
        SystemRecord {
            domain,
            ts,
            states: sys.order(),
            inputs: sys.n_inputs(),
            outputs: sys.n_outputs(),
            a: rows(sys.a()),
            b: rows(sys.b()),
            c: rows(sys.c()),
            d: rows(sys.d()),
        }
    }
}

impl TryFrom<SystemRecord> for StateSpaceSystem {
    type Error = Error;

    fn try_from(r: SystemRecord) -> Result<Self> {
        const MAX_DIM: usize = 4096;
        if r.states > MAX_DIM || r.inputs > MAX_DIM || r.outputs > MAX_DIM {
            return Err(Error::Parse("dimension too large".into()));
        }
        let domain = match (r.domain.as_str(), r.ts) {
            ("continuous", None) => Domain::Continuous,
            ("discrete", Some(ts)) => Domain::Discrete { ts },
            ("continuous", Some(_)) => return Err(Error::Parse("continuous system must not set ts".into())),
            ("discrete", None) => return Err(Error::Parse("discrete system requires ts".into())),
            (other, _) => return Err(Error::Parse(format!("unknown domain '{other}'"))),
        };
        let (n, m, p) = (r.states, r.inputs, r.outputs);
        StateSpaceSystem::new(
            matrix("a", &r.a, n, n)?,
            matrix("b", &r.b, n, m)?,
            matrix("c", &r.c, p, n)?,
            matrix("d", &r.d, p, m)?,
            domain,
        )
    }
}

impl Serialize for StateSpaceSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemRecord::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateSpaceSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = SystemRecord::deserialize(d)?;
        StateSpaceSystem::try_from(rec).map_err(serde::de::Error::custom)
    }
}

impl StateSpaceSystem {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&SystemRecord::from(self.clone())).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let rec: SystemRecord = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        rec.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_continuous_and_discrete() {
        let c = StateSpaceSystem::second_order_lowpass(0.55, 50.0).unwrap();
        let back = StateSpaceSystem::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, back);
        let d = c.discretize_tustin(500.0).unwrap();
        let back = StateSpaceSystem::from_toml(&d.to_toml().unwrap()).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn static_gain_round_trip_keeps_ports() {
        let k = StateSpaceSystem::gain(DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        let back = StateSpaceSystem::from_toml(&k.to_toml().unwrap()).unwrap();
        assert_eq!((back.n_outputs(), back.n_inputs(), back.order()), (2, 3, 0));
    }

    #[test]
    fn rejects_mismatched_rows() {
        let text = "domain = \"continuous\"\nstates = 1\ninputs = 1\noutputs = 1\na = [[0.0, 1.0]]\nb = [[1.0]]\nc = [[1.0]]\nd = [[0.0]]\n";
        assert!(matches!(StateSpaceSystem::from_toml(text), Err(Error::Parse(_))));
    }
}
