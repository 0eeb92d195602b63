//! Semantic algebras, intended interpretations and homomorphic extension.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::meaning::{Literal, Meaning, RoleSet};
use super::term::{Term, TypedGrammar};
use super::SemanticsError;

type CustomFn = dyn Fn(&[Meaning]) -> Result<Meaning, SemanticsError> + Send + Sync;

/// The meaning operation `f^M` attached to a constructor.
#[derive(Clone)]
pub enum MeaningOp {
    /// Component-wise sum of all arguments.
    VectorAdd,
    /// Typed union `⊓` of role sets; fails on a literal/negation clash.
    RoleUnion,
    /// Modifier application: the last argument is the head, every literal of
    /// the earlier arguments is re-tagged as `TAG:ROLE` and added to it.
    RoleAttribute { tag: String },
    Custom(Arc<CustomFn>),
}

impl fmt::Debug for MeaningOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeaningOp::VectorAdd => f.write_str("VectorAdd"),
            MeaningOp::RoleUnion => f.write_str("RoleUnion"),
            MeaningOp::RoleAttribute { tag } => write!(f, "RoleAttribute({tag})"),
            MeaningOp::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl MeaningOp {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[Meaning]) -> Result<Meaning, SemanticsError> + Send + Sync + 'static,
    {
        MeaningOp::Custom(Arc::new(f))
    }

    /// Looks up a builtin by its document name.
    pub fn builtin(name: &str, tag: Option<&str>) -> Result<Self, SemanticsError> {
        match name {
            "vector_add" => Ok(MeaningOp::VectorAdd),
            "role_union" | "conjunction" => Ok(MeaningOp::RoleUnion),
            "attribute" => Ok(MeaningOp::RoleAttribute {
                tag: tag.unwrap_or("MOD").to_string(),
            }),
            other => Err(SemanticsError::UnknownOperation(other.to_string())),
        }
    }

    pub fn apply(&self, args: &[Meaning]) -> Result<Meaning, SemanticsError> {
        match self {
            MeaningOp::VectorAdd => vector_add(args),
            MeaningOp::RoleUnion => roles_of(args).map_or(Ok(Meaning::Bottom), |sets| {
                let mut acc = RoleSet::new();
                for s in sets {
                    acc = acc.union(s);
                }
                consistent(acc)
            }),
            MeaningOp::RoleAttribute { tag } => roles_of(args).map_or(Ok(Meaning::Bottom), |sets| {
                let (head, mods) = sets.split_last().ok_or(SemanticsError::ArityMismatch {
                    constructor: format!("attribute:{tag}"),
                    expected: 2,
                    found: 0,
                })?;
                let mut acc = (*head).clone();
                for lit in mods.iter().flat_map(|m| m.iter()) {
                    acc.insert(Literal {
                        role: format!("{tag}:{}", lit.role).into(),
                        positive: lit.positive,
                    });
                }
                consistent(acc)
            }),
            MeaningOp::Custom(f) => f(args),
        }
    }
}

fn vector_add(args: &[Meaning]) -> Result<Meaning, SemanticsError> {
    let mut acc: Option<Vec<f64>> = None;
    for arg in args {
        let v = arg
            .as_vector()
            .ok_or(SemanticsError::KindMismatch("vector", arg.kind()))?;
        match acc.as_mut() {
            None => acc = Some(v.to_vec()),
            Some(a) if a.len() == v.len() => a.iter_mut().zip(v).for_each(|(x, y)| *x += y),
            Some(a) => return Err(SemanticsError::DimensionMismatch(a.len(), v.len())),
        }
    }
    acc.map(Meaning::Vector)
        .ok_or(SemanticsError::Parse("vector_add of no arguments".into()))
}

/// `None` when any argument is ⊥ (absorbing), otherwise the role sets.
fn roles_of(args: &[Meaning]) -> Option<Vec<&RoleSet>> {
    args.iter().map(Meaning::as_roles).collect()
}

fn consistent(set: RoleSet) -> Result<Meaning, SemanticsError> {
    match set.first_clash() {
        Some(lit) => Err(SemanticsError::InconsistentRoles(lit.role.to_string())),
        None => Ok(Meaning::Roles(set)),
    }
}

/// Which carrier a meaning space uses; used to check that interpretations
/// land inside the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Vector { dim: usize },
    Label,
    Roles,
}

impl Carrier {
    pub fn contains(&self, m: &Meaning) -> bool {
        match (self, m) {
            (Carrier::Vector { dim }, Meaning::Vector(v)) => v.len() == *dim,
            (Carrier::Label, Meaning::Label(_) | Meaning::Bottom) => true,
            (Carrier::Roles, Meaning::Roles(_) | Meaning::Bottom) => true,
            _ => false,
        }
    }
}

/// `⟨M, F⟩`: a meaning space plus one operation per grammar constructor.
#[derive(Debug, Clone)]
pub struct SemanticAlgebra {
    grammar: Arc<TypedGrammar>,
    carrier: Carrier,
    ops: BTreeMap<String, MeaningOp>,
}

impl SemanticAlgebra {
    pub fn new(
        grammar: Arc<TypedGrammar>,
        carrier: Carrier,
        ops: BTreeMap<String, MeaningOp>,
    ) -> Result<Self, SemanticsError> {
        for ctor in grammar.constructors() {
            if !ops.contains_key(&ctor.name) {
                return Err(SemanticsError::MissingOperation(ctor.name.clone()));
            }
        }
        if let Some(extra) = ops.keys().find(|k| grammar.constructor(k).is_none()) {
            return Err(SemanticsError::UnknownSymbol(extra.clone()));
        }
        Ok(SemanticAlgebra {
            grammar,
            carrier,
            ops,
        })
    }

    pub fn grammar(&self) -> &TypedGrammar {
        &self.grammar
    }

    pub fn carrier(&self) -> Carrier {
        self.carrier
    }

    pub fn distance(&self, a: &Meaning, b: &Meaning) -> Result<f64, SemanticsError> {
        a.distance(b)
    }

    /// `f^M(args)` for the named constructor.
    pub fn apply(&self, ctor: &str, args: &[Meaning]) -> Result<Meaning, SemanticsError> {
        let c = self
            .grammar
            .constructor(ctor)
            .ok_or_else(|| SemanticsError::UnknownSymbol(ctor.to_string()))?;
        if c.arity() != args.len() {
            return Err(SemanticsError::ArityMismatch {
                constructor: ctor.to_string(),
                expected: c.arity(),
                found: args.len(),
            });
        }
        self.ops[ctor].apply(args)
    }
}

/// The partial map `I: Σ ⇀ M` of gold atom meanings.
#[derive(Debug, Clone)]
pub struct IntendedInterpretation {
    algebra: Arc<SemanticAlgebra>,
    gold: BTreeMap<String, Meaning>,
}

impl IntendedInterpretation {
    pub fn new(
        algebra: Arc<SemanticAlgebra>,
        gold: BTreeMap<String, Meaning>,
    ) -> Result<Self, SemanticsError> {
        for (name, meaning) in &gold {
            if algebra.grammar().atom(name).is_none() {
                return Err(SemanticsError::UnknownSymbol(name.clone()));
            }
            if !algebra.carrier().contains(meaning) {
                return Err(SemanticsError::OutsideMeaningSpace(name.clone()));
            }
        }
        Ok(IntendedInterpretation { algebra, gold })
    }

    pub fn algebra(&self) -> &SemanticAlgebra {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> Arc<SemanticAlgebra> {
        self.algebra.clone()
    }

    pub fn get(&self, atom: &str) -> Option<&Meaning> {
        self.gold.get(atom)
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.gold.keys()
    }
}

/// `I↑(τ)`: leaves map through `I`, nodes through `f^M` of their children.
pub fn homomorphic_extension(
    interp: &IntendedInterpretation,
    term: &Term,
) -> Result<Meaning, SemanticsError> {
    match term {
        Term::Leaf(atom) => {
            let known = interp.algebra().grammar().atom(&atom.name);
            if let Some(known) = known {
                if known.sort != atom.sort {
                    return Err(SemanticsError::SortMismatch {
                        context: atom.name.clone(),
                        expected: known.sort.clone(),
                        found: atom.sort.clone(),
                    });
                }
            }
            interp
                .get(&atom.name)
                .cloned()
                .ok_or_else(|| SemanticsError::UndefinedAtom(atom.name.clone()))
        }
        Term::Node(ctor, children) => {
            for (expected, child) in ctor.arg_sorts.iter().zip(children) {
                if child.sort() != expected {
                    return Err(SemanticsError::SortMismatch {
                        context: ctor.name.clone(),
                        expected: expected.clone(),
                        found: child.sort().clone(),
                    });
                }
            }
            let args = children
                .iter()
                .map(|c| homomorphic_extension(interp, c))
                .collect::<Result<Vec<_>, _>>()?;
            interp.algebra().apply(&ctor.name, &args)
        }
    }
}

/// Largest `d(F(f(τ⃗)), f^M(F(τ1), …, F(τn)))` over every node subterm of
/// `terms`. Zero exactly when `F` is a homomorphism on that set.
pub fn check_homomorphism<F, E>(
    mut interpret: F,
    algebra: &SemanticAlgebra,
    terms: &[Term],
) -> Result<f64, E>
where
    F: FnMut(&Term) -> Result<Meaning, E>,
    E: From<SemanticsError>,
{
    let mut worst: f64 = 0.0;
    for term in terms {
        for sub in term.subterms() {
            if let Term::Node(ctor, children) = sub {
                let whole = interpret(sub)?;
                let parts = children
                    .iter()
                    .map(&mut interpret)
                    .collect::<Result<Vec<_>, _>>()?;
                let combined = algebra.apply(&ctor.name, &parts)?;
                worst = worst.max(algebra.distance(&whole, &combined)?);
            }
        }
    }
    Ok(worst)
}
