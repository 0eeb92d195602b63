use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{distance, empirical_quantile, AuditError, EvaluationTuple};
use crate::architecture::{perturb_and_interpret, GroundingArchitecture, Representation};
use crate::modulus::{ModulusCurve, ModulusError};
use crate::rng::SeedStreams;

/// How drifts are collected at each scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SamplingPlan {
    /// `n` draws of `r ~ P`, one random perturbation each.
    Random { samples_per_scale: usize },
    /// Every point of `P`'s support against every member of the threat
    /// family at that scale; the per-point sup is taken exactly.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaPoint {
    pub scale: f64,
    /// After the running-max envelope.
    pub bound: f64,
    /// The `1 - alpha` quantile before the envelope.
    pub quantile: f64,
    pub drifts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCurve {
    pub threat_model: String,
    pub alpha: f64,
    pub plan: SamplingPlan,
    pub points: Vec<OmegaPoint>,
}

impl RobustnessCurve {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.scale, p.bound)).collect()
    }

    /// Step value at `scale`, right-continuous between grid points.
    pub fn value_at(&self, scale: f64) -> f64 {
        self.points
            .iter()
            .take_while(|p| p.scale <= scale)
            .last()
            .map_or(0.0, |p| p.bound)
    }

    pub fn to_modulus_curve(&self) -> Result<ModulusCurve, ModulusError> {
        ModulusCurve::new(
            self.points.iter().map(|p| p.scale).collect(),
            self.points.iter().map(|p| p.bound).collect(),
        )
    }
}

/// `ω̂(ε)`: the `1 - alpha` quantile of semantic drift `d(S(r), S(u·r))` at
/// each scale, then a running max. `ω̂(0)` is pinned to 0.
///
/// Each scale draws from its own labelled stream, so the result does not
/// depend on how scales are scheduled across threads.
pub fn robustness_curve(
    arch: &dyn GroundingArchitecture,
    eval: &EvaluationTuple,
    scales: &[f64],
    plan: SamplingPlan,
    streams: &SeedStreams,
) -> Result<RobustnessCurve, AuditError> {
    if let Some(&bad) = scales.iter().find(|s| **s < 0.0) {
        return Err(AuditError::NegativeScale(bad));
    }
    let ascending = scales.windows(2).all(|w| w[0] < w[1]);
    if scales.first() != Some(&0.0) || !ascending {
        return Err(AuditError::InvalidScales);
    }
    if matches!(plan, SamplingPlan::Random { samples_per_scale: 0 }) {
        return Err(AuditError::EmptySampler);
    }
    let support = match plan {
        SamplingPlan::Exhaustive => match eval.reference.support() {
            Some(s) if !s.is_empty() => Some(s),
            _ => return Err(AuditError::EmptySampler),
        },
        SamplingPlan::Random { .. } => None,
    };

    let per_scale = scales
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| match &support {
            Some(points) => exhaustive_drifts(arch, eval, points, eps),
            None => {
                let SamplingPlan::Random { samples_per_scale } = plan else {
                    unreachable!()
                };
                random_drifts(arch, eval, eps, samples_per_scale, streams, i)
            }
        })
        .collect::<Result<Vec<_>, AuditError>>()?;

    let mut points = Vec::with_capacity(scales.len());
    let mut envelope = 0.0_f64;
    for (i, (&scale, drifts)) in scales.iter().zip(per_scale).enumerate() {
        let quantile = if i == 0 {
            0.0
        } else {
            empirical_quantile(&drifts, 1.0 - eval.alpha)
        };
        envelope = envelope.max(quantile);
        points.push(OmegaPoint {
            scale,
            bound: envelope,
            quantile,
            drifts,
        });
    }
    Ok(RobustnessCurve {
        threat_model: eval.threat.id().to_string(),
        alpha: eval.alpha,
        plan,
        points,
    })
}

fn drift(
    arch: &dyn GroundingArchitecture,
    eval: &EvaluationTuple,
    rep: &Representation,
    u: &crate::architecture::Perturbation,
) -> Result<f64, AuditError> {
    let (before, after) = perturb_and_interpret(arch, rep, u, &eval.context)?;
    distance(arch, &before, &after, &eval.context)
}

fn random_drifts(
    arch: &dyn GroundingArchitecture,
    eval: &EvaluationTuple,
    eps: f64,
    n: usize,
    streams: &SeedStreams,
    index: usize,
) -> Result<Vec<f64>, AuditError> {
    let mut rng = streams.stream(&format!("robustness/{}/{index}", eval.threat.id()));
    (0..n)
        .map(|_| {
            let rep = eval.reference.sample(&mut rng);
            let u = eval.threat.draw(&rep, eps, &mut rng)?;
            drift(arch, eval, &rep, &u)
        })
        .collect()
}

fn exhaustive_drifts(
    arch: &dyn GroundingArchitecture,
    eval: &EvaluationTuple,
    support: &[Representation],
    eps: f64,
) -> Result<Vec<f64>, AuditError> {
    support
        .iter()
        .map(|rep| {
            let members = eval
                .threat
                .enumerate(rep, eps)
                .ok_or_else(|| AuditError::NotEnumerable(eval.threat.id().to_string()))??;
            members
                .iter()
                .map(|u| drift(arch, eval, rep, u))
                .try_fold(0.0_f64, |acc, d| Ok(acc.max(d?)))
        })
        .collect()
}
