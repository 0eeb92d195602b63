//! A stipulated lookup architecture over a typed calculus with rule closure.
//!
//! `Φ` keeps the term as a symbol tree, `Γ` looks atoms up in the rule base
//! (closing them under the rules) and folds the tree with the role algebra,
//! `A` is the identity. Unknown tokens and constructors mean ⊥.

mod kb;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::architecture::{
    ArchError, GroundingArchitecture, Mechanism, Perturbation, ProvenanceRecord, Representation, Stage, Switches,
    SymbolTree, ThreatModel,
};
use crate::rng::StreamRng;
use crate::semantics::{EvalContext, Meaning, SemanticsError, Term};

pub use kb::{
    closure, compose_roles, role_distance, AtomDef, Composition, RuleBase, RuleDef, RuleDocument, DEFAULT_RULES,
};

pub const RULE_CLOSURE: &str = "rule-closure";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SymbolicError {
    #[error("atom `{0}` is not in the rule base")]
    UnknownAtom(String),
    #[error("closure of `{atom}` derives both {role} and its negation")]
    InconsistentClosure { atom: String, role: String },
    #[error("rules are cyclic through `{0}`")]
    CyclicRules(String),
    #[error("rule document: {0}")]
    Parse(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Debug, Clone)]
pub struct SymbolicArchitecture {
    kb: RuleBase,
    mechanisms: Vec<Mechanism>,
    provenance: ProvenanceRecord,
}

impl SymbolicArchitecture {
    pub fn new(kb: RuleBase) -> Self {
        SymbolicArchitecture {
            kb,
            mechanisms: vec![Mechanism::new(
                RULE_CLOSURE,
                Stage::Conceptualizer,
                "closing atom roles under the definitional rules",
            )],
            provenance: ProvenanceRecord::stipulated(),
        }
    }

    pub fn kb(&self) -> &RuleBase {
        &self.kb
    }

    fn meaning_of(&self, tree: &SymbolTree, close: bool) -> Result<Meaning, ArchError> {
        match tree {
            SymbolTree::Token(name) => {
                let roles = if close {
                    self.kb.closed_roles(name)
                } else {
                    self.kb.base_roles(name)
                };
                Ok(roles.map_or(Meaning::Bottom, |r| Meaning::Roles(r.clone())))
            }
            SymbolTree::Node(ctor, children) => {
                let known = self.kb.algebra().grammar().constructor(ctor);
                if known.is_none_or(|c| c.arity() != children.len()) {
                    return Ok(Meaning::Bottom);
                }
                let args = children
                    .iter()
                    .map(|c| self.meaning_of(c, close))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(self.kb.algebra().apply(ctor, &args)?)
            }
        }
    }
}

impl GroundingArchitecture for SymbolicArchitecture {
    fn name(&self) -> &str {
        "symbolic-lookup"
    }

    fn encode(&self, term: &Term, _switches: &Switches) -> Result<Representation, ArchError> {
        Ok(Representation::Symbols(SymbolTree::from_term(term)))
    }

    fn conceptualize(&self, rep: &Representation, switches: &Switches) -> Result<Meaning, ArchError> {
        match rep {
            Representation::Symbols(tree) => self.meaning_of(tree, switches.is_on(RULE_CLOSURE)),
            other => Err(ArchError::SpaceMismatch(format!("{other:?}"))),
        }
    }

    fn align(&self, concept: Meaning, _ctx: &EvalContext, _switches: &Switches) -> Result<Meaning, ArchError> {
        Ok(concept)
    }

    /// Character substitutions between trees of the same shape and token
    /// lengths; infinite otherwise.
    fn representation_distance(&self, a: &Representation, b: &Representation) -> Result<f64, ArchError> {
        match (a, b) {
            (Representation::Symbols(x), Representation::Symbols(y)) => {
                Ok(substitution_distance(x, y).map_or(f64::INFINITY, |n| n as f64))
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

fn substitution_distance(a: &SymbolTree, b: &SymbolTree) -> Option<usize> {
    match (a, b) {
        (SymbolTree::Token(x), SymbolTree::Token(y)) if x.chars().count() == y.chars().count() => {
            Some(x.chars().zip(y.chars()).filter(|(p, q)| p != q).count())
        }
        (SymbolTree::Node(f, xs), SymbolTree::Node(g, ys)) if f == g && xs.len() == ys.len() => xs
            .iter()
            .zip(ys)
            .map(|(x, y)| substitution_distance(x, y))
            .sum(),
        _ => None,
    }
}

fn substitute(c: char, rng: &mut StreamRng) -> char {
    let (lo, hi) = if c.is_ascii_uppercase() { (b'A', b'Z') } else { (b'a', b'z') };
    loop {
        let d = rng.gen_range(lo..=hi) as char;
        if d != c {
            return d;
        }
    }
}

/// `n` single-character substitutions at distinct positions, each changing
/// its character. `n` is capped at the token length.
pub fn edit_perturbation(token: &str, n: usize, rng: &mut StreamRng) -> String {
    let mut chars: Vec<char> = token.chars().collect();
    let n = n.min(chars.len());
    for i in sample(rng, chars.len(), n) {
        chars[i] = substitute(chars[i], rng);
    }
    chars.into_iter().collect()
}

/// Typos: a perturbation of scale `ε` makes `⌊ε⌋` substitutions spread over
/// the tree's tokens.
#[derive(Debug, Clone, Copy, Default)]
pub struct EditThreat;

impl EditThreat {
    fn tree(rep: &Representation) -> Result<&SymbolTree, ArchError> {
        match rep {
            Representation::Symbols(t) => Ok(t),
            other => Err(ArchError::SpaceMismatch(format!("{other:?}"))),
        }
    }

    fn replace_with(original: SymbolTree, edited: SymbolTree, n: usize) -> Result<Perturbation, ArchError> {
        Perturbation::new("edit", n as f64, move |r| match r {
            Representation::Symbols(t) if *t == original => Ok(Representation::Symbols(edited.clone())),
            other => Err(ArchError::SpaceMismatch(format!("edit built for another tree, got {other:?}"))),
        })
    }
}

impl ThreatModel for EditThreat {
    fn id(&self) -> &str {
        "edit"
    }

    fn draw(&self, rep: &Representation, scale: f64, rng: &mut StreamRng) -> Result<Perturbation, ArchError> {
        if !(scale >= 0.0) {
            return Err(ArchError::NegativeScale(scale));
        }
        let tree = Self::tree(rep)?;
        let mut edited = tree.clone();
        let mut slots: Vec<(usize, usize)> = Vec::new();
        for (t, tok) in edited.tokens().iter().enumerate() {
            slots.extend((0..tok.chars().count()).map(|c| (t, c)));
        }
        let n = (scale.floor() as usize).min(slots.len());
        let picks: Vec<(usize, usize)> = sample(rng, slots.len(), n).into_iter().map(|i| slots[i]).collect();
        {
            let mut tokens = edited.tokens_mut();
            for (t, c) in picks {
                let mut chars: Vec<char> = tokens[t].chars().collect();
                chars[c] = substitute(chars[c], rng);
                *tokens[t] = chars.into_iter().collect();
            }
        }
        Self::replace_with(tree.clone(), edited, n)
    }

    /// Enumerable up to one edit; larger budgets return `None`.
    fn enumerate(&self, rep: &Representation, scale: f64) -> Option<Result<Vec<Perturbation>, ArchError>> {
        if scale < 0.0 {
            return Some(Err(ArchError::NegativeScale(scale)));
        }
        if scale >= 2.0 {
            return None;
        }
        let tree = match Self::tree(rep) {
            Ok(t) => t.clone(),
            Err(e) => return Some(Err(e)),
        };
        let mut out = vec![Perturbation::identity("edit")];
        if scale < 1.0 {
            return Some(Ok(out));
        }
        let lens: Vec<Vec<char>> = tree.tokens().iter().map(|t| t.chars().collect()).collect();
        for (t, chars) in lens.iter().enumerate() {
            for c in 0..chars.len() {
                let (lo, hi) = if chars[c].is_ascii_uppercase() { (b'A', b'Z') } else { (b'a', b'z') };
                for d in (lo..=hi).map(char::from).filter(|d| *d != chars[c]) {
                    let mut edited = tree.clone();
                    let mut word = chars.clone();
                    word[c] = d;
                    *edited.tokens_mut()[t] = word.into_iter().collect();
                    match Self::replace_with(tree.clone(), edited, 1) {
                        Ok(u) => out.push(u),
                        Err(e) => return Some(Err(e)),
                    }
                }
            }
        }
        Some(Ok(out))
    }
}
