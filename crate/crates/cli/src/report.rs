//! Machine-readable records emitted by the subcommands.

use qmeter::estimator::{EstimatePair, FidelityReport};
use qmeter::haar::MonteCarloResult;
use qmeter::Measurement;
use serde::{Deserialize, Serialize};

use crate::files::{to_pairs, ComplexPair};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub valid: bool,
    pub dim: usize,
    pub outcomes: usize,
    pub defect: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub outcome: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub a_max: f64,
    pub chi_pre: Vec<ComplexPair>,
    pub chi_post: Vec<ComplexPair>,
    pub degenerate: bool,
}

impl EstimateRecord {
    pub fn new(pair: &EstimatePair, m: &Measurement) -> Self {
        Self {
            outcome: pair.outcome,
            label: m.labels().map(|l| l[pair.outcome - 1].clone()),
            a_max: pair.a_max,
            chi_pre: to_pairs(pair.chi_pre.amplitudes()),
            chi_post: to_pairs(pair.chi_post.amplitudes()),
            degenerate: pair.degenerate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatesRecord {
    pub estimates: Vec<EstimateRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McValue {
    pub mean: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub agrees: bool,
}

impl McValue {
    pub fn new(result: &MonteCarloResult, analytic: f64) -> Self {
        Self {
            mean: result.mean,
            std_error: result.std_error,
            analytic,
            agrees: result.agrees_with(analytic),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRecord {
    pub samples: usize,
    pub seed: u64,
    pub g_post: McValue,
    pub g_pre: McValue,
    pub f_op: McValue,
    pub agree: bool,
}

/// Analytic fidelities, tradeoff check and per-outcome estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub dim: usize,
    pub outcomes: usize,
    pub g_post: f64,
    pub g_pre: f64,
    pub f_op: f64,
    pub per_outcome_a_max: Vec<f64>,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
    pub bound_satisfied: bool,
    pub within_display_window: bool,
    pub estimates: Vec<EstimateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloRecord>,
}

impl ReportRecord {
    pub fn new(report: &FidelityReport, m: &Measurement, pairs: &[EstimatePair]) -> Self {
        Self {
            dim: report.dim,
            outcomes: m.outcomes(),
            g_post: report.g_post,
            g_pre: report.g_pre,
            f_op: report.f_op,
            per_outcome_a_max: report.per_outcome_a_max.clone(),
            bound_lhs: report.bound_lhs,
            bound_rhs: report.bound_rhs,
            bound_satisfied: report.bound_satisfied,
            within_display_window: report.within_display_window,
            estimates: pairs.iter().map(|p| EstimateRecord::new(p, m)).collect(),
            montecarlo: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: usize,
    pub outcome: usize,
    pub input: Vec<ComplexPair>,
    pub post_state: Vec<ComplexPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub shots: Vec<ShotRecord>,
    pub counts: Vec<usize>,
    pub frequencies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    /// Dimension, or `"inf"` for the large-dimension limit.
    pub d: String,
    /// The curve is the analytic `d → ∞` limit `F = 1 − G_post`.
    pub analytic_limit: bool,
    /// `[g_post, max_f]` rows.
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub curves: Vec<CurveRecord>,
}
