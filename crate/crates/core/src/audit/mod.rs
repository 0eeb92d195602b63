//! Grounding-profile measurements for an architecture at an evaluation tuple.
//!
//! Each measurement returns its aggregate together with the per-item table it
//! was computed from, so confidence intervals can be recomputed downstream.

mod measures;
mod profile;
mod robustness;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{ArchError, RepresentationSampler, ThreatModel};
use crate::semantics::{EvalContext, Meaning, MeaningType, SemanticsError};

pub use measures::{
    composition_deficit, estimate_ace, faithfulness_error, preservation_error, systematicity,
    AceReport, AceRow, ErrorReport, ItemRow, SystematicityReport,
};
pub use profile::{
    grounding_profile, Aggregators, GroundingProfile, OmegaEntry, ProfileAudit, ProfileNotes, ProfileRequest,
    ProfileTables,
};
pub use robustness::{robustness_curve, OmegaPoint, RobustnessCurve, SamplingPlan};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AuditError {
    #[error("atom set is empty")]
    EmptyAtomSet,
    #[error("item set is empty")]
    EmptyItemSet,
    #[error("instance set is empty")]
    EmptyInstanceSet,
    #[error("held-out set is empty")]
    EmptyHeldout,
    #[error("reference sampler produced no representations")]
    EmptySampler,
    #[error("threat model `{0}` cannot enumerate its members")]
    NotEnumerable(String),
    #[error("negative scale {0}")]
    NegativeScale(f64),
    #[error("scales must be ascending and start at 0")]
    InvalidScales,
    #[error("confidence parameter alpha = {0} is outside [0, 1)")]
    InvalidAlpha(f64),
    #[error("threshold {0} must be nonnegative")]
    NegativeThreshold(f64),
    #[error("`{0}` is a leaf; composition deficit needs composite terms")]
    LeafTermRejected(String),
    #[error("`{0}` is composite; preservation is measured on atoms only")]
    CompositeAtom(String),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// How per-item distances are reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Max,
    Mean,
    /// Nearest-rank empirical quantile at level `q`.
    Quantile(f64),
}

impl Aggregator {
    pub fn aggregate(&self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        Some(match *self {
            Aggregator::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregator::Quantile(q) => empirical_quantile(values, q),
        })
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregator::Max => f.write_str("max"),
            Aggregator::Mean => f.write_str("mean"),
            Aggregator::Quantile(q) => write!(f, "quantile({q})"),
        }
    }
}

/// Smallest sample value `x` with at least `ceil(q·n)` samples `≤ x`.
pub fn empirical_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// `succ`: an outcome succeeds when its distance to the target is strictly
/// below the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessPredicate {
    threshold: f64,
}

impl SuccessPredicate {
    pub fn new(threshold: f64) -> Result<Self, AuditError> {
        if !(threshold >= 0.0) {
            return Err(AuditError::NegativeThreshold(threshold));
        }
        Ok(SuccessPredicate { threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn succeeds(&self, distance: f64) -> bool {
        distance < self.threshold
    }
}

/// `E = (k, t, U, P)` plus the confidence parameter used by the G3 estimator.
#[derive(Clone)]
pub struct EvaluationTuple {
    pub context: EvalContext,
    pub threat: Arc<dyn ThreatModel>,
    pub reference: Arc<dyn RepresentationSampler>,
    /// Confidence level is `1 - alpha`.
    pub alpha: f64,
}

impl fmt::Debug for EvaluationTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluationTuple")
            .field("context", &self.context)
            .field("threat", &self.threat.id())
            .field("reference", &self.reference.id())
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl EvaluationTuple {
    pub fn new(
        context: EvalContext,
        threat: Arc<dyn ThreatModel>,
        reference: Arc<dyn RepresentationSampler>,
        alpha: f64,
    ) -> Result<Self, AuditError> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(AuditError::InvalidAlpha(alpha));
        }
        Ok(EvaluationTuple {
            context,
            threat,
            reference,
            alpha,
        })
    }

    pub fn summary(&self) -> EvalSummary {
        EvalSummary {
            context: self.context.context.clone(),
            meaning_type: self.context.meaning_type,
            threat_model: self.threat.id().to_string(),
            reference: self.reference.id().to_string(),
            alpha: self.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub context: String,
    pub meaning_type: MeaningType,
    pub threat_model: String,
    pub reference: String,
    pub alpha: f64,
}

pub(crate) fn distance(
    arch: &dyn crate::architecture::GroundingArchitecture,
    a: &Meaning,
    b: &Meaning,
    ctx: &EvalContext,
) -> Result<f64, AuditError> {
    Ok(arch.meaning_distance(a, b, ctx)?)
}
