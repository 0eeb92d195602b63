use serde::{Deserialize, Serialize};

use super::measures::{
    composition_deficit, estimate_ace, faithfulness_error, preservation_error, systematicity, AceReport,
    ErrorReport, SystematicityReport,
};
use super::robustness::{robustness_curve, RobustnessCurve, SamplingPlan};
use super::{Aggregator, AuditError, EvalSummary, EvaluationTuple, SuccessPredicate};
use crate::architecture::{G0Level, GroundingArchitecture};
use crate::rng::SeedStreams;
use crate::semantics::{homomorphic_extension, Atom, IntendedInterpretation, Meaning, Term};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregators {
    pub preservation: Aggregator,
    pub faithfulness: Aggregator,
    pub composition: Aggregator,
}

impl Default for Aggregators {
    fn default() -> Self {
        Aggregators {
            preservation: Aggregator::Max,
            faithfulness: Aggregator::Max,
            composition: Aggregator::Max,
        }
    }
}

/// Everything `grounding_profile` needs besides the architecture.
#[derive(Debug, Clone)]
pub struct ProfileRequest<'a> {
    pub interp: &'a IntendedInterpretation,
    pub eval: &'a EvaluationTuple,
    pub atoms: &'a [Atom],
    /// Items for G2a. Their composites are also the G4 node terms, and
    /// paired with their gold meanings they are the ACE instances.
    pub items: &'a [Term],
    pub heldout: &'a [(Term, Meaning)],
    pub mechanisms: &'a [String],
    pub succ: SuccessPredicate,
    pub scales: &'a [f64],
    pub plan: SamplingPlan,
    pub tau: f64,
    pub aggregators: Aggregators,
    pub streams: SeedStreams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaEntry {
    pub scale: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileNotes {
    /// `ace_continuous` is not part of the original profile definition.
    pub ace_continuous_extension: bool,
    pub robustness_estimator: String,
    pub aggregators: Aggregators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingProfile {
    pub eps_pres: f64,
    pub eps_faith: f64,
    pub ace: f64,
    pub ace_continuous: f64,
    pub omega_curve: Vec<OmegaEntry>,
    pub delta_comp: f64,
    pub beta: f64,
    pub g0_level: G0Level,
    pub eval: EvalSummary,
    pub notes: ProfileNotes,
}

impl GroundingProfile {
    /// `ω̂` as a right-continuous step function of the scale.
    pub fn omega_at(&self, scale: f64) -> f64 {
        self.omega_curve
            .iter()
            .take_while(|p| p.scale <= scale)
            .last()
            .map_or(0.0, |p| p.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTables {
    pub preservation: ErrorReport,
    pub faithfulness: ErrorReport,
    pub ace: AceReport,
    pub robustness: RobustnessCurve,
    pub composition: ErrorReport,
    pub systematicity: SystematicityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileAudit {
    pub profile: GroundingProfile,
    pub tables: ProfileTables,
}

/// Runs every component measurement and assembles the profile.
pub fn grounding_profile(
    arch: &dyn GroundingArchitecture,
    req: &ProfileRequest<'_>,
) -> Result<ProfileAudit, AuditError> {
    let ctx = &req.eval.context;
    let algebra = req.interp.algebra();
    let preservation = preservation_error(arch, req.interp, ctx, req.atoms, req.aggregators.preservation)?;
    let faithfulness = faithfulness_error(arch, req.interp, ctx, req.items, req.aggregators.faithfulness)?;
    let instances = req
        .items
        .iter()
        .map(|t| Ok((t.clone(), homomorphic_extension(req.interp, t)?)))
        .collect::<Result<Vec<_>, AuditError>>()?;
    let ace = estimate_ace(arch, req.mechanisms, ctx, &instances, req.succ)?;
    let robustness = robustness_curve(arch, req.eval, req.scales, req.plan, &req.streams)?;
    let nodes: Vec<Term> = req.items.iter().filter(|t| !t.is_leaf()).cloned().collect();
    let composition = composition_deficit(arch, algebra, ctx, &nodes, req.aggregators.composition)?;
    let systematicity = systematicity(arch, ctx, req.heldout, req.tau)?;

    let estimator = match req.plan {
        SamplingPlan::Exhaustive => format!(
            "exact sup over enumerated perturbations, then the {} quantile over the reference support",
            1.0 - req.eval.alpha
        ),
        SamplingPlan::Random { samples_per_scale } => format!(
            "one perturbation per reference draw stands in for the sup; {} quantile of {samples_per_scale} drifts per scale",
            1.0 - req.eval.alpha
        ),
    };
    let profile = GroundingProfile {
        eps_pres: preservation.value,
        eps_faith: faithfulness.value,
        ace: ace.ace,
        ace_continuous: ace.ace_continuous,
        omega_curve: robustness
            .pairs()
            .into_iter()
            .map(|(scale, bound)| OmegaEntry { scale, bound })
            .collect(),
        delta_comp: composition.value,
        beta: systematicity.beta,
        g0_level: arch.provenance().g0_level,
        eval: req.eval.summary(),
        notes: ProfileNotes {
            ace_continuous_extension: true,
            robustness_estimator: estimator,
            aggregators: req.aggregators,
        },
    };
    Ok(ProfileAudit {
        profile,
        tables: ProfileTables {
            preservation,
            faithfulness,
            ace,
            robustness,
            composition,
            systematicity,
        },
    })
}
