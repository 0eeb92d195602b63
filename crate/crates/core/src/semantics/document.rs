//! Structured-text (TOML) documents for grammars, interpretations and finite
//! spaces.
//!
//! ```toml
//! carrier = "vector"
//! dim = 2
//!
//! [[atoms]]
//! name = "RED"
//! sort = "COLOR"
//! meaning = { vector = [8.0, 8.0] }
//!
//! [[constructors]]
//! name = "compose"
//! args = ["COLOR", "DIRECTION"]
//! result = "LOCATION"
//! op = "vector_add"
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::algebra::{Carrier, IntendedInterpretation, MeaningOp, SemanticAlgebra};
use super::meaning::Meaning;
use super::metric::FiniteMetricSpace;
use super::term::{Atom, Constructor, Sort, TypedGrammar};
use super::SemanticsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierKind {
    Vector,
    Label,
    Roles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEntry {
    pub name: String,
    pub sort: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meaning: Option<Meaning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructorEntry {
    pub name: String,
    pub args: Vec<String>,
    pub result: String,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarDocument {
    pub carrier: CarrierKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub atoms: Vec<AtomEntry>,
    #[serde(default)]
    pub constructors: Vec<ConstructorEntry>,
}

impl GrammarDocument {
    pub fn from_toml_str(text: &str) -> Result<Self, SemanticsError> {
        toml::from_str(text).map_err(|e| SemanticsError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, SemanticsError> {
        toml::to_string(self).map_err(|e| SemanticsError::Parse(e.to_string()))
    }

    /// Builds the grammar, its algebra and the (partial) intended interpretation.
    pub fn build(&self) -> Result<IntendedInterpretation, SemanticsError> {
        let mut grammar = TypedGrammar::new();
        for a in &self.atoms {
            grammar.add_atom(Atom::new(a.name.clone(), Sort::new(a.sort.clone()))?)?;
        }
        let mut ops = BTreeMap::new();
        for c in &self.constructors {
            let args = c.args.iter().cloned().map(Sort::new).collect();
            grammar.add_constructor(Constructor::new(c.name.clone(), args, Sort::new(c.result.clone()))?)?;
            ops.insert(c.name.clone(), MeaningOp::builtin(&c.op, c.tag.as_deref())?);
        }
        let carrier = match self.carrier {
            CarrierKind::Vector => Carrier::Vector {
                dim: self
                    .dim
                    .ok_or_else(|| SemanticsError::Parse("vector carrier needs `dim`".into()))?,
            },
            CarrierKind::Label => Carrier::Label,
            CarrierKind::Roles => Carrier::Roles,
        };
        let algebra = SemanticAlgebra::new(Arc::new(grammar), carrier, ops)?;
        let gold = self
            .atoms
            .iter()
            .filter_map(|a| a.meaning.clone().map(|m| (a.name.clone(), m)))
            .collect();
        IntendedInterpretation::new(Arc::new(algebra), gold)
    }
}

/// A finite space with an optional tabulated map `S` on its points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpaceDocument {
    pub labels: Vec<String>,
    pub distances: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<Meaning>>,
}

impl FiniteSpaceDocument {
    pub fn from_toml_str(text: &str) -> Result<Self, SemanticsError> {
        toml::from_str(text).map_err(|e| SemanticsError::Parse(e.to_string()))
    }

    pub fn space(&self) -> Result<FiniteMetricSpace, SemanticsError> {
        FiniteMetricSpace::from_matrix(self.labels.clone(), self.distances.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::homomorphic_extension;

    const GRID: &str = r#"
carrier = "vector"
dim = 2

[[atoms]]
name = "RED"
sort = "COLOR"
meaning = { vector = [8.0, 8.0] }

[[atoms]]
name = "NORTH"
sort = "DIRECTION"
meaning = { vector = [0.0, 1.0] }

[[atoms]]
name = "GREEN"
sort = "COLOR"

[[constructors]]
name = "compose"
args = ["COLOR", "DIRECTION"]
result = "LOCATION"
op = "vector_add"
"#;

    #[test]
    fn loads_grammar_and_partial_interpretation() {
        let doc = GrammarDocument::from_toml_str(GRID).unwrap();
        let interp = doc.build().unwrap();
        let g = interp.algebra().grammar();
        let t = g.parse_term("(compose RED NORTH)").unwrap();
        assert_eq!(homomorphic_extension(&interp, &t).unwrap(), Meaning::vector(&[8.0, 9.0]));
        let u = g.parse_term("(compose GREEN NORTH)").unwrap();
        assert!(matches!(
            homomorphic_extension(&interp, &u),
            Err(SemanticsError::UndefinedAtom(a)) if a == "GREEN"
        ));
        let again = GrammarDocument::from_toml_str(&doc.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn rejects_unknown_op_and_bad_dim() {
        let bad = GRID.replace("vector_add", "vector_mul");
        assert!(GrammarDocument::from_toml_str(&bad).unwrap().build().is_err());
        let bad = GRID.replace("[8.0, 8.0]", "[8.0]");
        assert!(matches!(
            GrammarDocument::from_toml_str(&bad).unwrap().build(),
            Err(SemanticsError::OutsideMeaningSpace(_))
        ));
    }

    #[test]
    fn finite_space_document() {
        let doc = FiniteSpaceDocument::from_toml_str(
            "labels = [\"a\", \"b\"]\ndistances = [[0.0, 1.0], [1.0, 0.0]]\nimage = [{ vector = [0.0] }, { vector = [2.0] }]\n",
        )
        .unwrap();
        assert_eq!(doc.space().unwrap().diameter(), 1.0);
        assert_eq!(doc.image.unwrap().len(), 2);
    }
}
