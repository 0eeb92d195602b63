//! The pluggable grounding architecture `Σ →Φ→ R →Γ→ C →A→ M`.
//!
//! An architecture exposes its three stages separately so audits can
//! perturb representations between `Φ` and `Γ`, and it publishes a registry
//! of named mechanisms that callers may switch off for a single call. Switch
//! state is passed down with every call rather than stored on the
//! architecture, so concurrent audits with different ablation sets never
//! interfere.

mod tabulated;
mod threat;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semantics::{EvalContext, Meaning, SemanticsError, Term};

pub use tabulated::TabulatedArchitecture;
pub use threat::{
    FiniteNeighborhoodThreat, FixedSampler, RepresentationSampler, ThreatModel,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ArchError {
    #[error("token `{0}` is not in the architecture's alphabet")]
    UnknownToken(String),
    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),
    #[error("representation does not belong to this architecture's space: {0}")]
    SpaceMismatch(String),
    #[error("invalid provenance: {0}")]
    Provenance(String),
    #[error("negative perturbation scale {0}")]
    NegativeScale(f64),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// A symbol tree with plain string labels; the representation used by
/// symbolic encoders, which keep the term's shape but drop its typing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolTree {
    Token(String),
    Node(String, Vec<SymbolTree>),
}

impl SymbolTree {
    pub fn from_term(term: &Term) -> Self {
        match term {
            Term::Leaf(a) => SymbolTree::Token(a.name.clone()),
            Term::Node(c, ch) => SymbolTree::Node(c.name.clone(), ch.iter().map(Self::from_term).collect()),
        }
    }

    pub fn tokens_mut(&mut self) -> Vec<&mut String> {
        match self {
            SymbolTree::Token(t) => vec![t],
            SymbolTree::Node(_, ch) => ch.iter_mut().flat_map(|c| c.tokens_mut()).collect(),
        }
    }

    pub fn tokens(&self) -> Vec<&str> {
        match self {
            SymbolTree::Token(t) => vec![t.as_str()],
            SymbolTree::Node(_, ch) => ch.iter().flat_map(|c| c.tokens()).collect(),
        }
    }
}

/// A point of the representation space `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Vector(Vec<f64>),
    Symbols(SymbolTree),
    /// Index into a finite representation space.
    Point(usize),
}

impl Representation {
    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Representation::Vector(v) => Some(v),
            _ => None,
        }
    }
}

/// Where a mechanism lives in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Encoder,
    Conceptualizer,
    Alignment,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Encoder => "Φ",
            Stage::Conceptualizer => "Γ",
            Stage::Alignment => "A",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mechanism {
    pub id: String,
    pub locus: Stage,
    pub description: String,
}

impl Mechanism {
    pub fn new(id: impl Into<String>, locus: Stage, description: impl Into<String>) -> Self {
        Mechanism {
            id: id.into(),
            locus,
            description: description.into(),
        }
    }
}

/// Mechanisms switched off for one call. Everything not listed is on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Switches {
    off: BTreeSet<String>,
}

impl Switches {
    pub fn all_on() -> Self {
        Self::default()
    }

    pub fn is_on(&self, id: &str) -> bool {
        !self.off.contains(id)
    }

    pub fn disabled(&self) -> impl Iterator<Item = &String> {
        self.off.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G0Level {
    Weak,
    Strong,
}

impl fmt::Display for G0Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            G0Level::Weak => "weak",
            G0Level::Strong => "strong",
        })
    }
}

/// Declared origin of the semantic mappings, used for the G0 verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub g0_level: G0Level,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_process: Option<String>,
    pub acquired_components: BTreeSet<Stage>,
}

impl ProvenanceRecord {
    /// Stipulated mappings: nothing acquired by the agent.
    pub fn stipulated() -> Self {
        ProvenanceRecord {
            g0_level: G0Level::Weak,
            training_process: None,
            acquired_components: BTreeSet::new(),
        }
    }

    /// Learned mappings. Strong only when `alignment_internal` holds or the
    /// alignment stage itself was acquired; an external measurement adapter
    /// caps the record at weak.
    pub fn learned(
        training_process: impl Into<String>,
        acquired: impl IntoIterator<Item = Stage>,
        alignment_internal: bool,
    ) -> Result<Self, ArchError> {
        let acquired_components: BTreeSet<Stage> = acquired.into_iter().collect();
        if acquired_components.is_empty() {
            return Err(ArchError::Provenance("no acquired components".into()));
        }
        let external = !alignment_internal && !acquired_components.contains(&Stage::Alignment);
        Ok(ProvenanceRecord {
            g0_level: if external { G0Level::Weak } else { G0Level::Strong },
            training_process: Some(training_process.into()),
            acquired_components,
        })
    }

    pub fn validate(&self) -> Result<(), ArchError> {
        if self.g0_level == G0Level::Strong
            && (self.acquired_components.is_empty() || self.training_process.is_none())
        {
            return Err(ArchError::Provenance(
                "strong G0 needs acquired components and a training process".into(),
            ));
        }
        Ok(())
    }
}

type PerturbFn = dyn Fn(&Representation) -> Result<Representation, ArchError> + Send + Sync;

/// A member `u` of a threat model, with its scale `ε(u)`.
#[derive(Clone)]
pub struct Perturbation {
    family: String,
    scale: f64,
    apply: Arc<PerturbFn>,
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Perturbation")
            .field("family", &self.family)
            .field("scale", &self.scale)
            .finish()
    }
}

impl Perturbation {
    pub fn new<F>(family: impl Into<String>, scale: f64, apply: F) -> Result<Self, ArchError>
    where
        F: Fn(&Representation) -> Result<Representation, ArchError> + Send + Sync + 'static,
    {
        if !(scale >= 0.0) {
            return Err(ArchError::NegativeScale(scale));
        }
        Ok(Perturbation {
            family: family.into(),
            scale,
            apply: Arc::new(apply),
        })
    }

    pub fn identity(family: impl Into<String>) -> Self {
        Perturbation {
            family: family.into(),
            scale: 0.0,
            apply: Arc::new(|r| Ok(r.clone())),
        }
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, rep: &Representation) -> Result<Representation, ArchError> {
        if self.scale == 0.0 {
            return Ok(rep.clone());
        }
        (self.apply)(rep)
    }
}

/// `𝔊`: encoder `Φ`, conceptualizer `Γ` and alignment `A`, plus its
/// mechanism registry and provenance.
pub trait GroundingArchitecture: Send + Sync {
    fn name(&self) -> &str;

    /// `Φ`. Token encoders consume `term.surface()`.
    fn encode(&self, term: &Term, switches: &Switches) -> Result<Representation, ArchError>;

    /// `Γ`.
    fn conceptualize(&self, rep: &Representation, switches: &Switches) -> Result<Meaning, ArchError>;

    /// `A_k^t`.
    fn align(&self, concept: Meaning, ctx: &EvalContext, switches: &Switches) -> Result<Meaning, ArchError>;

    /// `d_R` on the representation space.
    fn representation_distance(&self, a: &Representation, b: &Representation) -> Result<f64, ArchError>;

    /// `d_{k,t}` on the meaning space.
    fn meaning_distance(&self, a: &Meaning, b: &Meaning, _ctx: &EvalContext) -> Result<f64, ArchError> {
        Ok(a.distance(b)?)
    }

    fn mechanisms(&self) -> &[Mechanism];

    fn provenance(&self) -> &ProvenanceRecord;
}

/// `A(Γ(Φ(surf(term))))` with every mechanism on.
pub fn interpret(
    arch: &dyn GroundingArchitecture,
    term: &Term,
    ctx: &EvalContext,
) -> Result<Meaning, ArchError> {
    run_pipeline(arch, term, ctx, &Switches::all_on())
}

/// `interpret` with the listed mechanisms switched off for this call only.
pub fn interpret_under<S: AsRef<str>>(
    arch: &dyn GroundingArchitecture,
    term: &Term,
    ctx: &EvalContext,
    off: &[S],
) -> Result<Meaning, ArchError> {
    let switches = switches_for(arch, off)?;
    run_pipeline(arch, term, ctx, &switches)
}

/// Validates mechanism ids against the registry.
pub fn switches_for<S: AsRef<str>>(
    arch: &dyn GroundingArchitecture,
    off: &[S],
) -> Result<Switches, ArchError> {
    let mut switches = Switches::default();
    for id in off {
        let id = id.as_ref();
        if !arch.mechanisms().iter().any(|m| m.id == id) {
            return Err(ArchError::UnknownMechanism(id.to_string()));
        }
        switches.off.insert(id.to_string());
    }
    Ok(switches)
}

pub fn run_pipeline(
    arch: &dyn GroundingArchitecture,
    term: &Term,
    ctx: &EvalContext,
    switches: &Switches,
) -> Result<Meaning, ArchError> {
    let rep = arch.encode(term, switches)?;
    let concept = arch.conceptualize(&rep, switches)?;
    arch.align(concept, ctx, switches)
}

/// Observable semantics `S = A∘Γ` at `rep` and at `u·rep`. `Φ` is not re-run.
pub fn perturb_and_interpret(
    arch: &dyn GroundingArchitecture,
    rep: &Representation,
    u: &Perturbation,
    ctx: &EvalContext,
) -> Result<(Meaning, Meaning), ArchError> {
    let on = Switches::all_on();
    let observe = |r: &Representation| -> Result<Meaning, ArchError> {
        let c = arch.conceptualize(r, &on)?;
        arch.align(c, ctx, &on)
    };
    let moved = u.apply(rep)?;
    Ok((observe(rep)?, observe(&moved)?))
}

#[cfg(test)]
mod tests;
