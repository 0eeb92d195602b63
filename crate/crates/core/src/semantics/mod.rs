//! Symbols, typed grammars, meaning spaces and intended interpretations.

mod algebra;
mod document;
mod meaning;
mod metric;
mod term;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use algebra::{
    check_homomorphism, homomorphic_extension, Carrier, IntendedInterpretation, MeaningOp,
    SemanticAlgebra,
};
pub use document::{AtomEntry, CarrierKind, ConstructorEntry, FiniteSpaceDocument, GrammarDocument};
pub use meaning::{euclidean, Literal, Meaning, RoleSet};
pub use metric::{
    validate_pseudometric, DiscreteMetric, Euclidean, FiniteMetricSpace, MetricViolation,
    Pseudometric, METRIC_TOLERANCE,
};
pub use term::{Atom, Constructor, Sort, Term, TypedGrammar};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SemanticsError {
    #[error("atom name must be nonempty")]
    EmptyAtomName,
    #[error("constructor `{0}` must take at least one argument")]
    NullaryConstructor(String),
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("duplicate constructor `{0}`")]
    DuplicateConstructor(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("atom `{0}` has no intended meaning")]
    UndefinedAtom(String),
    #[error("sort mismatch in `{context}`: expected {expected}, found {found}")]
    SortMismatch {
        context: String,
        expected: Sort,
        found: Sort,
    },
    #[error("`{constructor}` takes {expected} arguments, got {found}")]
    ArityMismatch {
        constructor: String,
        expected: usize,
        found: usize,
    },
    #[error("no meaning operation for constructor `{0}`")]
    MissingOperation(String),
    #[error("unknown meaning operation `{0}`")]
    UnknownOperation(String),
    #[error("meaning of `{0}` lies outside the meaning space")]
    OutsideMeaningSpace(String),
    #[error("role `{0}` and its negation are both present")]
    InconsistentRoles(String),
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cannot compare {0} meaning with {1} meaning")]
    KindMismatch(&'static str, &'static str),
    #[error("distance matrix does not match {points} points")]
    MatrixShape { points: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Meaning type `t`: extensional, inferential or social.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeaningType {
    Ext,
    Inf,
    Soc,
}

impl fmt::Display for MeaningType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeaningType::Ext => "ext",
            MeaningType::Inf => "inf",
            MeaningType::Soc => "soc",
        })
    }
}

/// The `(k, t)` index every interpretation is evaluated at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvalContext {
    pub context: String,
    pub meaning_type: MeaningType,
}

impl EvalContext {
    pub fn new(context: impl Into<String>, meaning_type: MeaningType) -> Self {
        EvalContext {
            context: context.into(),
            meaning_type,
        }
    }
}

#[cfg(test)]
mod tests;
