//! Shared serialization pieces: the report envelope and complex records.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::{BoundaryGrid, BoundarySample};
use crate::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every JSON report carries `{tool_version, config_echo, results}`.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<C, R> {
    pub tool_version: &'static str,
    pub config_echo: C,
    pub results: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(config_echo: C, results: R) -> Self {
        Self {
            tool_version: TOOL_VERSION,
            config_echo,
            results,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A complex number as `{re, im}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexRecord {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<ComplexRecord> for Complex64 {
    fn from(c: ComplexRecord) -> Self {
        Complex64::new(c.re, c.im)
    }
}

pub fn sample_records(s: &BoundarySample) -> Vec<ComplexRecord> {
    s.values().iter().map(|&v| v.into()).collect()
}

pub fn sample_from_records(
    grid: BoundaryGrid,
    records: &[ComplexRecord],
) -> Result<BoundarySample> {
    BoundarySample::new(grid, records.iter().map(|&r| r.into()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn complex_records_round_trip_bit_exact(re in any::<f64>(), im in any::<f64>()) {
            prop_assume!(re.is_finite() && im.is_finite());
            let rec = ComplexRecord { re, im };
            let back: ComplexRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
            prop_assert_eq!(back.re.to_bits(), re.to_bits());
            prop_assert_eq!(back.im.to_bits(), im.to_bits());
        }
    }

    #[test]
    fn envelope_shape() {
        let env = Envelope::new(serde_json::json!({"a": 1}), vec![1, 2]);
        let v: serde_json::Value = serde_json::from_str(&env.to_json().unwrap()).unwrap();
        assert_eq!(v["tool_version"], TOOL_VERSION);
        assert_eq!(v["config_echo"]["a"], 1);
        assert_eq!(v["results"][1], 2);
    }
}
