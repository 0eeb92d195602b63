use super::{
    ArchError, GroundingArchitecture, Mechanism, ProvenanceRecord, Representation, Stage, Switches,
};
use crate::semantics::{EvalContext, FiniteMetricSpace, Meaning, SemanticsError, Term};

/// An architecture given entirely by a table: `Φ` maps a surface form to a
/// point of a finite space, `Γ` reads the point's tabulated meaning, `A` is
/// the identity.
///
/// Surface forms are the term's atom names joined by single spaces. An
/// optional encoder mechanism truncates the surface to its first token when
/// switched off.
#[derive(Debug, Clone)]
pub struct TabulatedArchitecture {
    name: String,
    space: FiniteMetricSpace,
    values: Vec<Meaning>,
    mechanisms: Vec<Mechanism>,
    provenance: ProvenanceRecord,
}

impl TabulatedArchitecture {
    /// `space` labels are the surface keys; `values[i]` is `S` at point `i`.
    pub fn new(
        name: impl Into<String>,
        space: FiniteMetricSpace,
        values: Vec<Meaning>,
        provenance: ProvenanceRecord,
    ) -> Result<Self, ArchError> {
        if values.len() != space.len() {
            return Err(SemanticsError::MatrixShape { points: values.len() }.into());
        }
        provenance.validate()?;
        Ok(TabulatedArchitecture {
            name: name.into(),
            space,
            values,
            mechanisms: Vec::new(),
            provenance,
        })
    }

    /// A table over surface keys with the discrete metric on representations.
    pub fn from_entries<K: Into<String>>(
        name: impl Into<String>,
        entries: impl IntoIterator<Item = (K, Meaning)>,
        provenance: ProvenanceRecord,
    ) -> Result<Self, ArchError> {
        let (keys, values): (Vec<String>, Vec<Meaning>) =
            entries.into_iter().map(|(k, v)| (k.into(), v)).unzip();
        let space = FiniteMetricSpace::discrete(keys.len()).with_labels(keys)?;
        Self::new(name, space, values, provenance)
    }

    /// Registers a mechanism that, when off, keeps only the first surface token.
    pub fn with_first_token_mechanism(mut self, id: impl Into<String>) -> Self {
        self.mechanisms.push(Mechanism::new(
            id,
            Stage::Encoder,
            "integration of tokens after the first",
        ));
        self
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn values(&self) -> &[Meaning] {
        &self.values
    }

    pub fn key_of(term: &Term) -> String {
        term.surface_tokens().join(" ")
    }
}

impl GroundingArchitecture for TabulatedArchitecture {
    fn name(&self) -> &str {
        &self.name
    }

    fn encode(&self, term: &Term, switches: &Switches) -> Result<Representation, ArchError> {
        let mut tokens = term.surface_tokens();
        let truncate = self.mechanisms.iter().any(|m| !switches.is_on(&m.id));
        if truncate {
            tokens.truncate(1);
        }
        let key = tokens.join(" ");
        self.space
            .index_of(&key)
            .map(Representation::Point)
            .ok_or(ArchError::UnknownToken(key))
    }

    fn conceptualize(&self, rep: &Representation, _switches: &Switches) -> Result<Meaning, ArchError> {
        match rep {
            Representation::Point(i) if *i < self.values.len() => Ok(self.values[*i].clone()),
            other => Err(ArchError::SpaceMismatch(format!("{other:?}"))),
        }
    }

    fn align(&self, concept: Meaning, _ctx: &EvalContext, _switches: &Switches) -> Result<Meaning, ArchError> {
        Ok(concept)
    }

    fn representation_distance(&self, a: &Representation, b: &Representation) -> Result<f64, ArchError> {
        match (a, b) {
            (Representation::Point(i), Representation::Point(j))
                if *i < self.space.len() && *j < self.space.len() =>
            {
                Ok(self.space.distance(*i, *j))
            }
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
