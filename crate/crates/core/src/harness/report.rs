//! Serializable pieces shared by verification and scan reports.

use serde::{Deserialize, Serialize};

use crate::geometry::Configuration;
use crate::Cplx;

/// Process exit status of the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Pass,
    Disagreement,
    Violation,
    InputError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Disagreement => 1,
            ExitStatus::Violation => 2,
            ExitStatus::InputError => 3,
        }
    }

    /// The more severe of two statuses.
    pub fn worst(self, other: Self) -> Self {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

/// A configuration that can be replayed bit-for-bit, with the value found for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDump {
    pub trial: u64,
    pub points: Vec<[f64; 3]>,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl ConfigDump {
    pub fn new(trial: u64, c: &Configuration<f64>, d: Cplx<f64>) -> Self {
        Self { trial, points: c.to_arrays(), re: d.re, im: d.im, abs: d.norm() }
    }

    pub fn configuration(&self) -> crate::Result<Configuration<f64>> {
        Configuration::from_arrays(&self.points)
    }
}
