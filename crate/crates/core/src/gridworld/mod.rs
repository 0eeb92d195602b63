//! The grid-world navigation agent: a continuous 10×10 plane, six command
//! words, composition by vector addition, and a recurrent agent trained with
//! REINFORCE to output target coordinates.

mod agent;
mod train;
mod weights;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{
    ArchError, FixedSampler, GroundingArchitecture, Mechanism, Perturbation, ProvenanceRecord, Representation,
    Stage, Switches, TabulatedArchitecture, ThreatModel,
};
use crate::audit::{
    grounding_profile, AuditError, EvaluationTuple, ProfileAudit, ProfileRequest, RobustnessCurve, SamplingPlan,
    SuccessPredicate,
};
use crate::rng::{SeedStreams, StreamRng};
use crate::semantics::{
    euclidean, homomorphic_extension, Atom, Carrier, Constructor, EvalContext, IntendedInterpretation, Meaning,
    MeaningOp, MeaningType, SemanticAlgebra, SemanticsError, Sort, Term, TypedGrammar,
};
use crate::typology::{classify, ThresholdPolicy, TypologyError, TypologyVerdict};

pub use agent::{Agent, AgentSpec, Group, Step, Trace, DEFAULT_VOCAB};
pub use train::{gradient_check, train, GradientCheck, GroupCheck, LogRow, TrainConfig, TrainLog};
pub use weights::{TensorEntry, WeightFile, WEIGHT_FORMAT_VERSION};

pub const MODIFIER_INTEGRATION: &str = "modifier-integration";
pub const GAUSSIAN_NORM: &str = "gaussian-norm";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GridError {
    #[error("malformed command: {0}")]
    MalformedCommand(String),
    #[error("token `{0}` is not in the vocabulary")]
    UnknownToken(String),
    #[error("training diverged at episode {episode}: mean loss {loss}")]
    DivergedTraining { episode: usize, loss: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("weight file: {0}")]
    WeightFile(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Typology(#[from] TypologyError),
}

impl From<GridError> for ArchError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::UnknownToken(t) => ArchError::UnknownToken(t),
            GridError::Arch(a) => a,
            GridError::Semantics(s) => ArchError::Semantics(s),
            other => ArchError::SpaceMismatch(other.to_string()),
        }
    }
}

/// The plane, its colour landmarks and the four compass directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub bounds: [f64; 2],
    pub landmarks: BTreeMap<String, [f64; 2]>,
    pub directions: BTreeMap<String, [f64; 2]>,
    pub success_threshold: f64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec {
            bounds: [0.0, 10.0],
            landmarks: BTreeMap::from([("RED".into(), [8.0, 8.0]), ("BLUE".into(), [2.0, 2.0])]),
            directions: BTreeMap::from([
                ("NORTH".into(), [0.0, 1.0]),
                ("SOUTH".into(), [0.0, -1.0]),
                ("EAST".into(), [1.0, 0.0]),
                ("WEST".into(), [-1.0, 0.0]),
            ]),
            success_threshold: 0.5,
        }
    }
}

impl WorldSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        let [lo, hi] = self.bounds;
        if !(lo < hi) {
            return Err(GridError::InvalidWorld(format!("bounds [{lo}, {hi}]")));
        }
        for (name, p) in &self.landmarks {
            if p.iter().any(|x| !(lo..=hi).contains(x)) {
                return Err(GridError::InvalidWorld(format!("landmark {name} lies outside the bounds")));
            }
        }
        for (name, d) in &self.directions {
            if ((d[0] * d[0] + d[1] * d[1]).sqrt() - 1.0).abs() > 1e-12 {
                return Err(GridError::InvalidWorld(format!("direction {name} is not a unit vector")));
            }
        }
        if self.landmarks.keys().any(|k| self.directions.contains_key(k)) {
            return Err(GridError::InvalidWorld("a word is both a landmark and a direction".into()));
        }
        if !(self.success_threshold > 0.0) {
            return Err(GridError::InvalidWorld("success threshold must be positive".into()));
        }
        Ok(())
    }

    /// `compose : COLOR × DIRECTION → LOCATION`.
    pub fn grammar(&self) -> Result<TypedGrammar, GridError> {
        let mut g = TypedGrammar::new();
        for name in self.landmarks.keys() {
            g.add_atom(Atom::new(name.clone(), Sort::new("COLOR"))?)?;
        }
        for name in self.directions.keys() {
            g.add_atom(Atom::new(name.clone(), Sort::new("DIRECTION"))?)?;
        }
        g.add_constructor(Constructor::new(
            "compose",
            vec![Sort::new("COLOR"), Sort::new("DIRECTION")],
            Sort::new("LOCATION"),
        )?)?;
        Ok(g)
    }

    /// Landmarks and direction vectors as atom meanings, vector addition for
    /// `compose`.
    pub fn interpretation(&self) -> Result<IntendedInterpretation, GridError> {
        let ops = BTreeMap::from([("compose".to_string(), MeaningOp::VectorAdd)]);
        let algebra = SemanticAlgebra::new(Arc::new(self.grammar()?), Carrier::Vector { dim: 2 }, ops)?;
        let gold = self
            .landmarks
            .iter()
            .chain(&self.directions)
            .map(|(n, v)| (n.clone(), Meaning::vector(v)))
            .collect();
        Ok(IntendedInterpretation::new(Arc::new(algebra), gold)?)
    }

    /// The target of a command; not clamped to the bounds.
    pub fn gold_meaning(&self, command: &Term) -> Result<[f64; 2], GridError> {
        let malformed = || GridError::MalformedCommand(format!("{command:?}"));
        match command {
            Term::Leaf(a) => self
                .landmarks
                .get(&a.name)
                .or_else(|| self.directions.get(&a.name))
                .copied()
                .ok_or_else(malformed),
            Term::Node(c, args) if c.name == "compose" && args.len() == 2 => {
                match (&args[0], &args[1]) {
                    (Term::Leaf(col), Term::Leaf(dir)) => {
                        let p = self.landmarks.get(&col.name).ok_or_else(malformed)?;
                        let d = self.directions.get(&dir.name).ok_or_else(malformed)?;
                        Ok([p[0] + d[0], p[1] + d[1]])
                    }
                    _ => Err(malformed()),
                }
            }
            _ => Err(malformed()),
        }
    }

    pub fn atoms(&self) -> Result<Vec<Term>, GridError> {
        let g = self.grammar()?;
        Ok(g.atoms().map(|a| Term::Leaf(a.clone())).collect())
    }

    /// Every `compose(COLOR, DIRECTION)`.
    pub fn composites(&self) -> Result<Vec<Term>, GridError> {
        let g = self.grammar()?;
        let mut out = Vec::new();
        for c in self.landmarks.keys() {
            for d in self.directions.keys() {
                out.push(g.apply("compose", vec![g.leaf(c)?, g.leaf(d)?])?);
            }
        }
        Ok(out)
    }

    /// Atoms followed by composites.
    pub fn commands(&self) -> Result<Vec<Term>, GridError> {
        let mut out = self.atoms()?;
        out.extend(self.composites()?);
        Ok(out)
    }

    /// Accepts `(compose RED NORTH)` or the surface form `RED NORTH`.
    pub fn parse_command(&self, text: &str) -> Result<Term, GridError> {
        let g = self.grammar()?;
        let text = text.trim();
        if text.starts_with('(') {
            return Ok(g.parse_term(text)?);
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            [w] => Ok(g.leaf(w)?),
            [c, d] => Ok(g.apply("compose", vec![g.leaf(c)?, g.leaf(d)?])?),
            _ => Err(GridError::MalformedCommand(text.to_string())),
        }
    }

    pub fn parse_commands<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<Term>, GridError> {
        texts.iter().map(|t| self.parse_command(t.as_ref())).collect()
    }
}

/// `Φ` runs the recurrence to its final hidden state, `Γ` is the read-out,
/// `A` the identity.
#[derive(Debug, Clone)]
pub struct GridworldArchitecture {
    agent: Arc<Agent>,
    mechanisms: Vec<Mechanism>,
    provenance: ProvenanceRecord,
}

pub fn build_architecture(agent: Agent, training: &TrainConfig) -> Result<GridworldArchitecture, GridError> {
    let provenance = ProvenanceRecord::learned(
        training.descriptor(),
        [Stage::Encoder, Stage::Conceptualizer],
        true,
    )?;
    Ok(GridworldArchitecture {
        agent: Arc::new(agent),
        mechanisms: vec![Mechanism::new(
            MODIFIER_INTEGRATION,
            Stage::Encoder,
            "processing of tokens after the first",
        )],
        provenance,
    })
}

impl GridworldArchitecture {
    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn hidden(&self, term: &Term) -> Result<Vec<f64>, GridError> {
        match self.encode(term, &Switches::all_on())? {
            Representation::Vector(h) => Ok(h),
            _ => unreachable!("the encoder emits vectors"),
        }
    }
}

impl GroundingArchitecture for GridworldArchitecture {
    fn name(&self) -> &str {
        "gridworld-agent"
    }

    fn encode(&self, term: &Term, switches: &Switches) -> Result<Representation, ArchError> {
        let words = term.surface_tokens();
        let mut tokens = words
            .iter()
            .map(|w| self.agent.spec().token_index(w))
            .collect::<Result<Vec<_>, _>>()?;
        if !switches.is_on(MODIFIER_INTEGRATION) {
            tokens.truncate(1);
        }
        let trace = self.agent.forward(&tokens)?;
        Ok(Representation::Vector(trace.final_hidden().to_vec()))
    }

    fn conceptualize(&self, rep: &Representation, _switches: &Switches) -> Result<Meaning, ArchError> {
        match rep.as_vector() {
            Some(h) if h.len() == self.agent.spec().hidden_width => Ok(Meaning::vector(&self.agent.decode(h))),
            _ => Err(ArchError::SpaceMismatch(format!(
                "expected a {}-dimensional hidden state",
                self.agent.spec().hidden_width
            ))),
        }
    }

    fn align(&self, concept: Meaning, _ctx: &EvalContext, _switches: &Switches) -> Result<Meaning, ArchError> {
        Ok(concept)
    }

    fn representation_distance(&self, a: &Representation, b: &Representation) -> Result<f64, ArchError> {
        match (a.as_vector(), b.as_vector()) {
            (Some(x), Some(y)) if x.len() == y.len() => Ok(euclidean(x, y)),
            _ => Err(ArchError::SpaceMismatch(format!("{a:?} / {b:?}"))),
        }
    }

    fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    fn provenance(&self) -> &ProvenanceRecord {
        &self.provenance
    }
}

fn norm_scaled_noise(dim: usize, scale: f64, rng: &mut StreamRng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.into_iter().map(|x| x * scale / n).collect();
        }
    }
}

fn additive(delta: Vec<f64>, scale: f64) -> Result<Perturbation, ArchError> {
    Perturbation::new(GAUSSIAN_NORM, scale, move |r| match r.as_vector() {
        Some(x) if x.len() == delta.len() => Ok(Representation::Vector(
            x.iter().zip(&delta).map(|(a, b)| a + b).collect(),
        )),
        _ => Err(ArchError::SpaceMismatch(format!("expected a {}-vector", delta.len()))),
    })
}

/// A standard normal direction in `ℝ^dim` rescaled to norm `scale` and added
/// to the representation.
pub fn gaussian_norm_perturbation(dim: usize, scale: f64, seed: u64) -> Result<Perturbation, ArchError> {
    if !(scale >= 0.0) {
        return Err(ArchError::NegativeScale(scale));
    }
    if scale == 0.0 {
        return Ok(Perturbation::identity(GAUSSIAN_NORM));
    }
    let mut rng = SeedStreams::new(seed).stream("gridworld/gaussian-norm");
    additive(norm_scaled_noise(dim, scale, &mut rng), scale)
}

/// Isotropic additive noise of exact norm `ε`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianNormThreat;

impl ThreatModel for GaussianNormThreat {
    fn id(&self) -> &str {
        GAUSSIAN_NORM
    }

    fn draw(&self, rep: &Representation, scale: f64, rng: &mut StreamRng) -> Result<Perturbation, ArchError> {
        if !(scale >= 0.0) {
            return Err(ArchError::NegativeScale(scale));
        }
        let dim = rep
            .as_vector()
            .ok_or_else(|| ArchError::SpaceMismatch(format!("{rep:?}")))?
            .len();
        if scale == 0.0 {
            return Ok(Perturbation::identity(GAUSSIAN_NORM));
        }
        additive(norm_scaled_noise(dim, scale, rng), scale)
    }
}

/// Reference outputs of a trained agent, as a table keyed by
/// surface form.
pub fn printed_agent() -> Result<TabulatedArchitecture, ArchError> {
    Ok(TabulatedArchitecture::from_entries(
        "printed-agent",
        [
            ("RED", Meaning::vector(&[7.941, 8.224])),
            ("NORTH", Meaning::vector(&[-0.097, 1.114])),
            ("RED NORTH", Meaning::vector(&[7.726, 9.522])),
            ("RED WEST", Meaning::vector(&[7.050, 8.680])),
            ("BLUE EAST", Meaning::vector(&[2.609, 1.793])),
        ],
        ProvenanceRecord::learned("REINFORCE, 3000 episodes", [Stage::Encoder, Stage::Conceptualizer], true)?,
    )?
    .with_first_token_mechanism(MODIFIER_INTEGRATION))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCurve {
    pub atom: String,
    pub curve: RobustnessCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridworldAudit {
    pub audit: ProfileAudit,
    pub verdict: TypologyVerdict,
    pub per_atom: Vec<AtomCurve>,
}

/// Settings of the standard grid-world audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridAuditSettings {
    pub heldout: Vec<String>,
    pub tau: f64,
    pub success_threshold: f64,
    pub scales: Vec<f64>,
    pub samples_per_scale: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for GridAuditSettings {
    fn default() -> Self {
        GridAuditSettings {
            heldout: vec!["(compose BLUE EAST)".into(), "(compose RED WEST)".into()],
            tau: 0.5,
            success_threshold: 0.5,
            scales: vec![0.0, 0.25, 0.5, 1.0],
            samples_per_scale: 200,
            alpha: 0.1,
            seed: 0,
        }
    }
}

pub fn context() -> EvalContext {
    EvalContext::new("navigation", MeaningType::Ext)
}

/// Audits an agent over the six atoms and the eight composites, with
/// robustness measured around the atoms' hidden states (pooled for the
/// profile and separately per atom).
pub fn audit_agent(
    arch: &GridworldArchitecture,
    world: &WorldSpec,
    settings: &GridAuditSettings,
    policy: &ThresholdPolicy,
) -> Result<GridworldAudit, GridError> {
    policy.validate()?;
    let interp = world.interpretation()?;
    let ctx = context();
    let atoms: Vec<Atom> = interp.algebra().grammar().atoms().cloned().collect();
    let items = world.composites()?;
    let heldout = world
        .parse_commands(&settings.heldout)?
        .into_iter()
        .map(|t| {
            let gold = homomorphic_extension(&interp, &t)?;
            Ok((t, gold))
        })
        .collect::<Result<Vec<_>, GridError>>()?;
    let mut hidden = Vec::new();
    for a in &atoms {
        hidden.push((a.name.clone(), Representation::Vector(arch.hidden(&Term::Leaf(a.clone()))?)));
    }
    let pooled = FixedSampler::new("atom-hidden-states", hidden.iter().map(|(_, r)| r.clone()).collect());
    let eval = EvaluationTuple::new(ctx.clone(), Arc::new(GaussianNormThreat), Arc::new(pooled), settings.alpha)?;
    let plan = SamplingPlan::Random {
        samples_per_scale: settings.samples_per_scale,
    };
    let streams = SeedStreams::new(settings.seed);
    let mechanisms = vec![MODIFIER_INTEGRATION.to_string()];
    let req = ProfileRequest {
        interp: &interp,
        eval: &eval,
        atoms: &atoms,
        items: &items,
        heldout: &heldout,
        mechanisms: &mechanisms,
        succ: SuccessPredicate::new(settings.success_threshold)?,
        scales: &settings.scales,
        plan,
        tau: settings.tau,
        aggregators: Default::default(),
        streams,
    };
    let audit = grounding_profile(arch, &req)?;
    let verdict = classify(&audit.profile, policy);

    let mut per_atom = Vec::new();
    for (name, rep) in hidden {
        let single = FixedSampler::new(format!("hidden({name})"), vec![rep]);
        let eval = EvaluationTuple::new(ctx.clone(), Arc::new(GaussianNormThreat), Arc::new(single), settings.alpha)?;
        let curve = crate::audit::robustness_curve(
            arch,
            &eval,
            &settings.scales,
            plan,
            &streams.child(&format!("atom/{name}")),
        )?;
        per_atom.push(AtomCurve { atom: name, curve });
    }
    Ok(GridworldAudit {
        audit,
        verdict,
        per_atom,
    })
}

/// The standard audit with default settings and policy.
pub fn audit_appendix_b(arch: &GridworldArchitecture, world: &WorldSpec) -> Result<GridworldAudit, GridError> {
    audit_agent(arch, world, &GridAuditSettings::default(), &ThresholdPolicy::default())
}
