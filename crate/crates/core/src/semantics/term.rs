//! Atoms, typed constructors and the free term algebra they generate.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::SemanticsError;

/// Type tag attached to atoms and constructor slots (e.g. `COLOR`, `DIRECTION`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sort(pub String);

impl Sort {
    pub fn new(name: impl Into<String>) -> Self {
        Sort(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    pub sort: Sort,
}

impl Atom {
    pub fn new(name: impl Into<String>, sort: Sort) -> Result<Self, SemanticsError> {
        let name = name.into();
        if name.is_empty() {
            return Err(SemanticsError::EmptyAtomName);
        }
        Ok(Atom { name, sort })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Constructor {
    pub name: String,
    pub arg_sorts: Vec<Sort>,
    pub result_sort: Sort,
}

impl Constructor {
    pub fn new(
        name: impl Into<String>,
        arg_sorts: Vec<Sort>,
        result_sort: Sort,
    ) -> Result<Self, SemanticsError> {
        let name = name.into();
        if arg_sorts.is_empty() {
            return Err(SemanticsError::NullaryConstructor(name));
        }
        Ok(Constructor {
            name,
            arg_sorts,
            result_sort,
        })
    }

    pub fn arity(&self) -> usize {
        self.arg_sorts.len()
    }
}

/// A finite, well-typed tree over atoms and constructors.
///
/// Equality is structural. Terms are normally built through
/// [`TypedGrammar::apply`], which refuses ill-sorted argument tuples; terms
/// assembled by hand can be re-checked with [`TypedGrammar::check`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Leaf(Atom),
    Node(Constructor, Vec<Term>),
}

impl Term {
    pub fn sort(&self) -> &Sort {
        match self {
            Term::Leaf(atom) => &atom.sort,
            Term::Node(ctor, _) => &ctor.result_sort,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Term::Leaf(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Leaf(_) => 1,
            Term::Node(_, children) => 1 + children.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// In-order atom sequence; the surface form consumed by token encoders.
    pub fn surface(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    pub fn surface_tokens(&self) -> Vec<String> {
        self.surface().into_iter().map(|a| a.name.clone()).collect()
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Term::Leaf(atom) => out.push(atom),
            Term::Node(_, children) => children.iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    /// Every subterm, children before parents, the term itself last.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        if let Term::Node(_, children) = self {
            children.iter().for_each(|c| c.collect_subterms(out));
        }
        out.push(self);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Leaf(atom) => f.write_str(&atom.name),
            Term::Node(ctor, children) => {
                write!(f, "({}", ctor.name)?;
                for child in children {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// An alphabet of atoms plus the typed constructors that build composites.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypedGrammar {
    atoms: BTreeMap<String, Atom>,
    constructors: BTreeMap<String, Constructor>,
}

impl TypedGrammar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> Result<(), SemanticsError> {
        if self.atoms.contains_key(&atom.name) {
            return Err(SemanticsError::DuplicateAtom(atom.name));
        }
        self.atoms.insert(atom.name.clone(), atom);
        Ok(())
    }

    pub fn add_constructor(&mut self, ctor: Constructor) -> Result<(), SemanticsError> {
        if self.constructors.contains_key(&ctor.name) {
            return Err(SemanticsError::DuplicateConstructor(ctor.name));
        }
        self.constructors.insert(ctor.name.clone(), ctor);
        Ok(())
    }

    pub fn atom(&self, name: &str) -> Option<&Atom> {
        self.atoms.get(name)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.values()
    }

    pub fn constructor(&self, name: &str) -> Option<&Constructor> {
        self.constructors.get(name)
    }

    pub fn constructors(&self) -> impl Iterator<Item = &Constructor> {
        self.constructors.values()
    }

    pub fn leaf(&self, name: &str) -> Result<Term, SemanticsError> {
        self.atom(name)
            .cloned()
            .map(Term::Leaf)
            .ok_or_else(|| SemanticsError::UnknownSymbol(name.to_string()))
    }

    pub fn apply(&self, ctor: &str, children: Vec<Term>) -> Result<Term, SemanticsError> {
        let ctor = self
            .constructor(ctor)
            .ok_or_else(|| SemanticsError::UnknownSymbol(ctor.to_string()))?;
        check_application(ctor, &children)?;
        Ok(Term::Node(ctor.clone(), children))
    }

    /// Re-validates a term against this grammar: every atom and constructor must
    /// belong to it and every application must be sort-correct.
    pub fn check(&self, term: &Term) -> Result<(), SemanticsError> {
        match term {
            Term::Leaf(atom) => match self.atoms.get(&atom.name) {
                Some(known) if known == atom => Ok(()),
                Some(known) => Err(SemanticsError::SortMismatch {
                    context: atom.name.clone(),
                    expected: known.sort.clone(),
                    found: atom.sort.clone(),
                }),
                None => Err(SemanticsError::UnknownSymbol(atom.name.clone())),
            },
            Term::Node(ctor, children) => {
                if self.constructors.get(&ctor.name) != Some(ctor) {
                    return Err(SemanticsError::UnknownSymbol(ctor.name.clone()));
                }
                check_application(ctor, children)?;
                children.iter().try_for_each(|c| self.check(c))
            }
        }
    }

    /// Every well-typed term of depth at most `max_depth`, in a deterministic
    /// order. Growth is doubly exponential; callers keep grammars small.
    pub fn terms_up_to_depth(&self, max_depth: usize) -> Vec<Term> {
        let mut terms: Vec<Term> = if max_depth == 0 {
            Vec::new()
        } else {
            self.atoms.values().cloned().map(Term::Leaf).collect()
        };
        for _ in 1..max_depth {
            let mut next: Vec<Term> = self.atoms.values().cloned().map(Term::Leaf).collect();
            for ctor in self.constructors.values() {
                let pools: Vec<Vec<&Term>> = ctor
                    .arg_sorts
                    .iter()
                    .map(|s| terms.iter().filter(|t| t.sort() == s).collect())
                    .collect();
                let mut idx = vec![0usize; pools.len()];
                if pools.iter().any(Vec::is_empty) {
                    continue;
                }
                'odometer: loop {
                    let children = idx.iter().zip(&pools).map(|(&i, p)| p[i].clone()).collect();
                    next.push(Term::Node(ctor.clone(), children));
                    for slot in (0..pools.len()).rev() {
                        idx[slot] += 1;
                        if idx[slot] < pools[slot].len() {
                            continue 'odometer;
                        }
                        idx[slot] = 0;
                    }
                    break;
                }
            }
            terms = next;
        }
        terms
    }

    /// Parses the s-expression syntax produced by `Term`'s `Display`:
    /// `RED`, `(compose RED NORTH)`, `(and bachelor (mod large dragon))`.
    pub fn parse_term(&self, text: &str) -> Result<Term, SemanticsError> {
        let tokens = lex(text);
        let mut pos = 0;
        let term = self.parse_at(&tokens, &mut pos, text)?;
        if pos != tokens.len() {
            return Err(SemanticsError::Parse(format!("trailing input in `{text}`")));
        }
        Ok(term)
    }

    fn parse_at(&self, tokens: &[String], pos: &mut usize, src: &str) -> Result<Term, SemanticsError> {
        let tok = tokens
            .get(*pos)
            .ok_or_else(|| SemanticsError::Parse(format!("unexpected end of `{src}`")))?;
        *pos += 1;
        match tok.as_str() {
            "(" => {
                let name = tokens
                    .get(*pos)
                    .filter(|t| *t != "(" && *t != ")")
                    .ok_or_else(|| SemanticsError::Parse(format!("missing constructor in `{src}`")))?
                    .clone();
                *pos += 1;
                let mut children = Vec::new();
                loop {
                    match tokens.get(*pos).map(String::as_str) {
                        Some(")") => {
                            *pos += 1;
                            break;
                        }
                        Some(_) => children.push(self.parse_at(tokens, pos, src)?),
                        None => return Err(SemanticsError::Parse(format!("unclosed `(` in `{src}`"))),
                    }
                }
                self.apply(&name, children)
            }
            ")" => Err(SemanticsError::Parse(format!("unexpected `)` in `{src}`"))),
            name => self.leaf(name),
        }
    }
}

fn check_application(ctor: &Constructor, children: &[Term]) -> Result<(), SemanticsError> {
    if children.len() != ctor.arity() {
        return Err(SemanticsError::ArityMismatch {
            constructor: ctor.name.clone(),
            expected: ctor.arity(),
            found: children.len(),
        });
    }
    for (expected, child) in ctor.arg_sorts.iter().zip(children) {
        if child.sort() != expected {
            return Err(SemanticsError::SortMismatch {
                context: ctor.name.clone(),
                expected: expected.clone(),
                found: child.sort().clone(),
            });
        }
    }
    Ok(())
}

fn lex(text: &str) -> Vec<String> {
    text.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}
