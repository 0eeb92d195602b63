use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use petgraph::algo::toposort;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

use super::SymbolicError;
use crate::semantics::{
    Atom, Carrier, Constructor, ConstructorEntry, IntendedInterpretation, Literal, Meaning, MeaningOp, RoleSet,
    SemanticAlgebra, Sort, TypedGrammar,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDef {
    pub name: String,
    pub sort: String,
    /// Stipulated base roles, e.g. `["HUMAN", "¬MARRIED"]`.
    #[serde(default)]
    pub roles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDef {
    /// An atom name or a positive role.
    pub premise: String,
    pub implies: Vec<String>,
}

/// The on-disk form of a rule base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDocument {
    pub atoms: Vec<AtomDef>,
    #[serde(default)]
    pub rules: Vec<RuleDef>,
    #[serde(default)]
    pub constructors: Vec<ConstructorEntry>,
}

impl RuleDocument {
    pub fn from_toml_str(text: &str) -> Result<Self, SymbolicError> {
        toml::from_str(text).map_err(|e| SymbolicError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, SymbolicError> {
        toml::to_string(self).map_err(|e| SymbolicError::Parse(e.to_string()))
    }
}

/// Atoms with stipulated roles, definitional rules and typed constructors.
#[derive(Debug, Clone)]
pub struct RuleBase {
    base: BTreeMap<String, RoleSet>,
    rules: BTreeMap<String, Vec<Literal>>,
    closed: BTreeMap<String, RoleSet>,
    algebra: Arc<SemanticAlgebra>,
    document: RuleDocument,
}

impl RuleBase {
    pub fn from_document(doc: RuleDocument) -> Result<Self, SymbolicError> {
        let mut grammar = TypedGrammar::new();
        let mut base = BTreeMap::new();
        for a in &doc.atoms {
            grammar.add_atom(Atom::new(a.name.clone(), Sort::new(a.sort.clone()))?)?;
            base.insert(a.name.clone(), RoleSet::parse_all(&a.roles)?);
        }
        let mut ops = BTreeMap::new();
        for c in &doc.constructors {
            let args = c.args.iter().cloned().map(Sort::new).collect();
            grammar.add_constructor(Constructor::new(c.name.clone(), args, Sort::new(c.result.clone()))?)?;
            ops.insert(c.name.clone(), MeaningOp::builtin(&c.op, c.tag.as_deref())?);
        }
        let algebra = Arc::new(SemanticAlgebra::new(Arc::new(grammar), Carrier::Roles, ops)?);

        let mut rules: BTreeMap<String, Vec<Literal>> = BTreeMap::new();
        for r in &doc.rules {
            let lits = RoleSet::parse_all(&r.implies)?;
            rules.entry(r.premise.clone()).or_default().extend(lits.iter().cloned());
        }
        check_acyclic(&rules)?;

        let mut kb = RuleBase {
            base,
            rules,
            closed: BTreeMap::new(),
            algebra,
            document: doc,
        };
        kb.closed = kb
            .base
            .keys()
            .map(|a| Ok((a.clone(), kb.compute_closure(a)?)))
            .collect::<Result<_, SymbolicError>>()?;
        Ok(kb)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SymbolicError> {
        Self::from_document(RuleDocument::from_toml_str(text)?)
    }

    pub fn document(&self) -> &RuleDocument {
        &self.document
    }

    pub fn algebra(&self) -> &SemanticAlgebra {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> Arc<SemanticAlgebra> {
        self.algebra.clone()
    }

    pub fn contains(&self, atom: &str) -> bool {
        self.base.contains_key(atom)
    }

    pub fn base_roles(&self, atom: &str) -> Option<&RoleSet> {
        self.base.get(atom)
    }

    /// The closed role set computed at load time.
    pub fn closed_roles(&self, atom: &str) -> Option<&RoleSet> {
        self.closed.get(atom)
    }

    /// The stipulated interpretation: every atom mapped to its closure.
    pub fn interpretation(&self) -> Result<IntendedInterpretation, SymbolicError> {
        let gold = self
            .closed
            .iter()
            .map(|(a, r)| (a.clone(), Meaning::Roles(r.clone())))
            .collect();
        Ok(IntendedInterpretation::new(self.algebra.clone(), gold)?)
    }

    fn compute_closure(&self, atom: &str) -> Result<RoleSet, SymbolicError> {
        let mut roles = self
            .base
            .get(atom)
            .cloned()
            .ok_or_else(|| SymbolicError::UnknownAtom(atom.to_string()))?;
        let mut fired: BTreeSet<&str> = BTreeSet::new();
        loop {
            let triggers: Vec<&str> = std::iter::once(atom)
                .chain(roles.iter().filter(|l| l.positive).map(|l| &*l.role))
                .filter(|t| !fired.contains(t))
                .filter_map(|t| self.rules.get_key_value(t).map(|(k, _)| k.as_str()))
                .collect();
            if triggers.is_empty() {
                break;
            }
            let mut next = roles.clone();
            for t in triggers {
                fired.insert(t);
                for lit in &self.rules[t] {
                    next.insert(lit.clone());
                }
            }
            roles = next;
        }
        if let Some(lit) = roles.first_clash() {
            return Err(SymbolicError::InconsistentClosure {
                atom: atom.to_string(),
                role: lit.role.to_string(),
            });
        }
        Ok(roles)
    }
}

/// Premises point at the positive roles they derive; the graph must admit a
/// topological order.
fn check_acyclic(rules: &BTreeMap<String, Vec<Literal>>) -> Result<(), SymbolicError> {
    let mut g: DiGraphMap<&str, ()> = DiGraphMap::new();
    for (premise, lits) in rules {
        g.add_node(premise.as_str());
        for lit in lits.iter().filter(|l| l.positive) {
            g.add_edge(premise.as_str(), &*lit.role, ());
        }
    }
    toposort(&g, None)
        .map(|_| ())
        .map_err(|cycle| SymbolicError::CyclicRules(cycle.node_id().to_string()))
}

/// Least fixed point of rule application from the atom's base roles.
pub fn closure(kb: &RuleBase, atom: &str) -> Result<RoleSet, SymbolicError> {
    kb.closed_roles(atom)
        .cloned()
        .ok_or_else(|| SymbolicError::UnknownAtom(atom.to_string()))
}

/// How two role sets combine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Composition {
    /// Typed union `⊓`.
    Conjunction,
    /// `left` modifies `right`; its literals are tagged `TAG:ROLE`.
    Attribute { tag: String },
}

pub fn compose_roles(left: &RoleSet, right: &RoleSet, how: &Composition) -> Result<RoleSet, SymbolicError> {
    let op = match how {
        Composition::Conjunction => MeaningOp::RoleUnion,
        Composition::Attribute { tag } => MeaningOp::RoleAttribute { tag: tag.clone() },
    };
    let out = op
        .apply(&[Meaning::Roles(left.clone()), Meaning::Roles(right.clone())])
        .map_err(|e| match e {
            crate::semantics::SemanticsError::InconsistentRoles(role) => SymbolicError::InconsistentClosure {
                atom: "composition".into(),
                role,
            },
            other => other.into(),
        })?;
    match out {
        Meaning::Roles(r) => Ok(r),
        other => Err(SymbolicError::Parse(format!("role composition produced {}", other.kind()))),
    }
}

/// `|a Δ b| / |a ∪ b|`, 0 for two empty sets.
pub fn role_distance(a: &RoleSet, b: &RoleSet) -> f64 {
    a.distance(b)
}

/// A small rule base: three concepts, a colour and a size modifier.
pub const DEFAULT_RULES: &str = r#"
[[atoms]]
name = "bachelor"
sort = "CONCEPT"

[[atoms]]
name = "cat"
sort = "CONCEPT"

[[atoms]]
name = "car"
sort = "CONCEPT"
roles = ["ARTIFACT"]

[[atoms]]
name = "red"
sort = "COLOR"
roles = ["RED"]

[[atoms]]
name = "large"
sort = "SIZE"
roles = ["LARGE"]

[[rules]]
premise = "bachelor"
implies = ["HUMAN", "MALE", "¬MARRIED"]

[[rules]]
premise = "HUMAN"
implies = ["ANIMATE"]

[[rules]]
premise = "cat"
implies = ["FELINE"]

[[rules]]
premise = "FELINE"
implies = ["ANIMAL"]

[[rules]]
premise = "ANIMAL"
implies = ["ANIMATE"]

[[rules]]
premise = "car"
implies = ["VEHICLE"]

[[constructors]]
name = "and"
args = ["CONCEPT", "CONCEPT"]
result = "CONCEPT"
op = "conjunction"

[[constructors]]
name = "color"
args = ["COLOR", "CONCEPT"]
result = "CONCEPT"
op = "attribute"
tag = "COLOR"

[[constructors]]
name = "size"
args = ["SIZE", "CONCEPT"]
result = "CONCEPT"
op = "attribute"
tag = "SIZE"
"#;
