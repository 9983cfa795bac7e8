use serde::{Deserialize, Serialize};

use crate::Cx;

/// Result of any evaluation route: value, error estimate and diagnostics.
///
/// Fields that a route does not produce are omitted from the JSON form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub route: String,
    pub n: usize,
    pub nu: Vec<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
    pub value: Cx,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cancellation_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms_summed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_est: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization_est: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn value(&self) -> num_complex::Complex64 {
        self.value.into()
    }
}
