//! Report rows and their CSV / JSON encodings.
//!
//! Each row type has a fixed column order (the struct field order) and
//! starts with `format_version`. CSV output has one header row; JSON output
//! is an array of objects with the same keys. Both encodings are pure
//! functions of the rows, so equal inputs give byte-identical files.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::estimators::Estimate;
use crate::io::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

/// Encodes `rows` in `format`.
pub fn encode<T: Serialize>(rows: &[T], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| Error::Report(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Report(e.to_string()))
        }
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| Error::Report(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// One estimator query against a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub format_version: u32,
    pub estimator: String,
    pub target_id: String,
    pub behavior_policy_id: String,
    pub master_seed: u64,
    pub n_samples: usize,
    pub value: f64,
    pub std_error: f64,
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
    pub w_mean: Option<f64>,
}

impl EstimateRow {
    pub fn new(e: &Estimate, target_id: &str, behavior_policy_id: &str, master_seed: u64) -> Self {
        EstimateRow {
            format_version: FORMAT_VERSION,
            estimator: e.kind.as_str().into(),
            target_id: target_id.into(),
            behavior_policy_id: behavior_policy_id.into(),
            master_seed,
            n_samples: e.n_samples,
            value: e.value,
            std_error: e.std_error,
            w_min: e.weight_stats.map(|w| w.min),
            w_max: e.weight_stats.map(|w| w.max),
            w_mean: e.weight_stats.map(|w| w.mean),
        }
    }
}

/// A [`BoundReport`] flattened to columns; the entropy profile is embedded
/// as compact JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub format_version: u32,
    pub name: String,
    pub quantity: String,
    pub variant: String,
    pub value: f64,
    pub v_max: f64,
    pub eta: f64,
    pub delta: f64,
    pub horizon: usize,
    pub entropy: String,
    pub vc_dim: Option<u64>,
    pub c_floor: f64,
    pub n: Option<u64>,
    pub epsilon: Option<f64>,
}

impl From<&BoundReport> for BoundRow {
    fn from(r: &BoundReport) -> Self {
        BoundRow {
            format_version: FORMAT_VERSION,
            name: r.name.clone(),
            quantity: r.quantity.as_str().into(),
            variant: r.variant.as_str().into(),
            value: r.value,
            v_max: r.inputs.v_max,
            eta: r.inputs.eta,
            delta: r.inputs.delta,
            horizon: r.inputs.horizon,
            entropy: serde_json::to_string(&r.inputs.entropy).expect("entropy serializes"),
            vc_dim: r.inputs.vc_dim,
            c_floor: r.inputs.c_floor,
            n: r.n,
            epsilon: r.epsilon,
        }
    }
}

/// Summary of one coverage experiment scope (`single` or `class_sup`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub format_version: u32,
    pub scope: String,
    pub target_id: String,
    pub n: usize,
    pub replications: usize,
    pub delta: f64,
    pub variant: String,
    pub v_max: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub violations: usize,
    pub empirical_rate: f64,
    pub bound_rate: f64,
    pub median_deviation: f64,
    pub max_deviation: f64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorComparisonRow {
    pub format_version: u32,
    pub estimator: String,
    pub n: usize,
    pub replications: usize,
    pub exact_value: f64,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    /// Standard error of `mean` across replications.
    pub mean_std_error: f64,
    /// Exact variance of one estimate, where a closed form exists.
    pub predicted_variance: Option<f64>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparisonRow {
    pub format_version: u32,
    pub horizon: usize,
    pub v_max_over_eps: f64,
    pub delta: f64,
    pub log_covering: f64,
    pub vc_dim: u64,
    pub c_floor: f64,
    pub eta: f64,
    pub k1: f64,
    pub uniform_n: u64,
    pub kearns_n: f64,
    pub mcdiarmid_n: f64,
    pub parametric_n: f64,
}

/// Log-log slope of each sample-size column against `v_max / eps` at one
/// `(horizon, delta)` cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub format_version: u32,
    pub horizon: usize,
    pub delta: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub uniform_slope: f64,
    pub kearns_slope: f64,
    pub mcdiarmid_slope: f64,
    pub parametric_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrmRow {
    pub format_version: u32,
    pub class_id: String,
    pub estimate: f64,
    pub n: u64,
    pub delta: f64,
    pub delta_per_class: f64,
    pub epsilon: f64,
    pub lower_bound: f64,
    pub chosen: bool,
}

/// One exact quantity computed by enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub format_version: u32,
    pub quantity: String,
    pub target_id: String,
    pub behavior_policy_id: Option<String>,
    pub n: Option<usize>,
    pub value: f64,
}
