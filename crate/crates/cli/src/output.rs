//! JSON documents written by the subcommands.

use loewner_core::chains::NormalityDiagnostic;
use loewner_core::continuous::{ContinuousChain, DissipativityReport};
use loewner_core::families::FamilyJson;
use loewner_core::normalize::{Policy, Warning};
use loewner_core::spectrum::ResonanceReport;
use loewner_core::{JetMap, MultiIndex, Spectrum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SortHeader {
    /// True when the input was not already in decreasing order.
    pub reordered: bool,
    /// Sorted position `k` holds input entry `permutation[k]` (0-based).
    pub permutation: Vec<usize>,
    pub index_order: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonancesOutput {
    pub header: SortHeader,
    pub spectrum: Spectrum,
    pub report: ResonanceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutput {
    pub degree: usize,
    pub residual_norm: f64,
    /// `(target, index)` kept in the normal form, 1-based target.
    pub resonant_terms: Vec<(usize, MultiIndex)>,
    pub conjugators: Vec<JetMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizeOutput {
    pub spectrum: Spectrum,
    pub policy: Policy,
    pub q: usize,
    pub l: usize,
    pub beta: f64,
    pub agreement_order: usize,
    pub report: ResonanceReport,
    pub stages: Vec<StageOutput>,
    /// Cumulative conjugators `K_n`.
    pub conjugators: Vec<JetMap>,
    pub normal_form: FamilyJson,
    pub normal_form_linear: bool,
    pub conjugation_residual: f64,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Family,
    Herglotz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeEntry {
    pub time: f64,
    pub delta: f64,
    /// Absent when `time ± delta` leaves `[0, T]`.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub input: InputKind,
    pub chain: loewner_core::chains::ChainJets,
    pub agreement_order: usize,
    pub normal_form_linear: bool,
    pub subordination_residual: f64,
    /// Absent for chains too short for a verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality: Option<NormalityDiagnostic>,
    pub warnings: Vec<Warning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_time: Option<ContinuousChain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous_subordination: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pde: Vec<PdeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipativity: Option<DissipativityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub subordination_residual: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality: Option<NormalityDiagnostic>,
    pub passed: bool,
}
