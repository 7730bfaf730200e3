//! Conserved-quantity records along a trajectory.

use std::collections::BTreeMap;

use serde::Serialize;

use super::integrate::Trajectory;
use crate::error::{Error, Result};

/// A scalar function of a packed state.
pub type Quantity<'a> = Box<dyn Fn(&[f64]) -> Result<f64> + 'a>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantityRecord {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    /// `max |value(t) − value(0)|`.
    pub max_drift: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub quantities: BTreeMap<String, QuantityRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge_covariance_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosscheck_residual: Option<f64>,
}

impl DiagnosticsReport {
    pub fn drift(&self, name: &str) -> Result<f64> {
        self.quantities
            .get(name)
            .map(|r| r.max_drift)
            .ok_or_else(|| Error::UnknownQuantity(name.to_string()))
    }
}

/// Evaluates each requested quantity from `available` at every sample.
pub fn diagnose(
    trajectory: &Trajectory,
    available: &BTreeMap<String, Quantity<'_>>,
    names: &[&str],
) -> Result<DiagnosticsReport> {
    if trajectory.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let mut report = DiagnosticsReport::default();
    for &name in names {
        let f = available
            .get(name)
            .ok_or_else(|| Error::UnknownQuantity(name.to_string()))?;
        let values = trajectory
            .states
            .iter()
            .map(|s| f(s))
            .collect::<Result<Vec<f64>>>()?;
        let initial = values[0];
        let max_drift = values.iter().map(|v| (v - initial).abs()).fold(0.0, f64::max);
        report.quantities.insert(
            name.to_string(),
            QuantityRecord {
                initial,
                last: *values.last().unwrap(),
                max_drift,
                values,
            },
        );
    }
    Ok(report)
}
