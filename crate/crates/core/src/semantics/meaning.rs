//! Meaning points: the carriers shared by vectorial, symbolic and relational
//! meaning spaces, and the distance `d_{k,t}` on them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SemanticsError;

/// A signed role literal such as `HUMAN` or `¬MARRIED`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub role: Arc<str>,
    pub positive: bool,
}

impl Literal {
    pub fn pos(role: impl Into<Arc<str>>) -> Self {
        Literal {
            role: role.into(),
            positive: true,
        }
    }

    pub fn neg(role: impl Into<Arc<str>>) -> Self {
        Literal {
            role: role.into(),
            positive: false,
        }
    }

    pub fn negated(&self) -> Self {
        Literal {
            role: self.role.clone(),
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            f.write_str(&self.role)
        } else {
            write!(f, "¬{}", self.role)
        }
    }
}

impl FromStr for Literal {
    type Err = SemanticsError;

    /// Accepts `ROLE`, `¬ROLE`, `-ROLE` and `!ROLE`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (positive, role) = match s.strip_prefix('¬').or_else(|| s.strip_prefix('-')).or_else(|| s.strip_prefix('!')) {
            Some(rest) => (false, rest),
            None => (true, s),
        };
        if role.is_empty() {
            return Err(SemanticsError::Parse(format!("empty role literal `{s}`")));
        }
        Ok(Literal {
            role: role.into(),
            positive,
        })
    }
}

/// A finite set of signed role literals, kept sorted and deduplicated.
///
/// Construction does not enforce consistency; [`RoleSet::is_consistent`] and
/// [`RoleSet::first_clash`] expose it so that closure and composition can
/// report the clash.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct RoleSet(Vec<Literal>);

impl RoleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_literals(lits: impl IntoIterator<Item = Literal>) -> Self {
        let mut v: Vec<Literal> = lits.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        RoleSet(v)
    }

    pub fn parse_all<S: AsRef<str>>(items: &[S]) -> Result<Self, SemanticsError> {
        items
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<_>, _>>()
            .map(RoleSet::from_literals)
    }

    pub fn insert(&mut self, lit: Literal) -> bool {
        match self.0.binary_search(&lit) {
            Ok(_) => false,
            Err(i) => {
                self.0.insert(i, lit);
                true
            }
        }
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.0.binary_search(lit).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &RoleSet) -> RoleSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        RoleSet(out)
    }

    /// A literal whose negation is also present, if any.
    pub fn first_clash(&self) -> Option<&Literal> {
        // `¬R` sorts directly before `R`.
        self.0
            .windows(2)
            .find(|w| w[0].role == w[1].role)
            .map(|w| &w[1])
    }

    pub fn is_consistent(&self) -> bool {
        self.first_clash().is_none()
    }

    /// Normalized symmetric difference `|a Δ b| / |a ∪ b|`, with `0/0 = 0`.
    pub fn distance(&self, other: &RoleSet) -> f64 {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut common) = (0, 0, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = a.len() + b.len() - common;
        if union == 0 {
            return 0.0;
        }
        (union - common) as f64 / union as f64
    }
}

impl FromIterator<Literal> for RoleSet {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        RoleSet::from_literals(iter)
    }
}

impl TryFrom<Vec<String>> for RoleSet {
    type Error = SemanticsError;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        RoleSet::parse_all(&v)
    }
}

impl From<RoleSet> for Vec<String> {
    fn from(r: RoleSet) -> Self {
        r.0.iter().map(Literal::to_string).collect()
    }
}

impl fmt::Display for RoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, lit) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{lit}")?;
        }
        f.write_str("}")
    }
}

/// A point in some meaning space `M_k^t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Meaning {
    Vector(Vec<f64>),
    Label(String),
    Roles(RoleSet),
    /// Designated out-of-vocabulary meaning, at distance 1 from every label
    /// or role set.
    Bottom,
}

impl Meaning {
    pub fn vector(xs: &[f64]) -> Self {
        Meaning::Vector(xs.to_vec())
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Meaning::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_roles(&self) -> Option<&RoleSet> {
        match self {
            Meaning::Roles(r) => Some(r),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Meaning::Vector(_) => "vector",
            Meaning::Label(_) => "label",
            Meaning::Roles(_) => "roles",
            Meaning::Bottom => "bottom",
        }
    }

    /// The default `d_{k,t}` for each carrier: Euclidean on vectors, the
    /// discrete metric on labels, normalized symmetric difference on role sets.
    pub fn distance(&self, other: &Meaning) -> Result<f64, SemanticsError> {
        match (self, other) {
            (Meaning::Vector(a), Meaning::Vector(b)) => {
                if a.len() != b.len() {
                    return Err(SemanticsError::DimensionMismatch(a.len(), b.len()));
                }
                Ok(euclidean(a, b))
            }
            (Meaning::Label(a), Meaning::Label(b)) => Ok(if a == b { 0.0 } else { 1.0 }),
            (Meaning::Roles(a), Meaning::Roles(b)) => Ok(a.distance(b)),
            (Meaning::Bottom, Meaning::Bottom) => Ok(0.0),
            (Meaning::Bottom, Meaning::Label(_) | Meaning::Roles(_))
            | (Meaning::Label(_) | Meaning::Roles(_), Meaning::Bottom) => Ok(1.0),
            (a, b) => Err(SemanticsError::KindMismatch(a.kind(), b.kind())),
        }
    }
}

impl fmt::Display for Meaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Meaning::Vector(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x:.3}")?;
                }
                f.write_str(")")
            }
            Meaning::Label(l) => f.write_str(l),
            Meaning::Roles(r) => write!(f, "{r}"),
            Meaning::Bottom => f.write_str("⊥"),
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_distance_examples() {
        let a = RoleSet::parse_all(&["H", "M"]).unwrap();
        let b = RoleSet::parse_all(&["H", "F"]).unwrap();
        assert_eq!(a.distance(&a), 0.0);
        assert!((a.distance(&b) - 2.0 / 3.0).abs() < 1e-15);
        let c = RoleSet::parse_all(&["X"]).unwrap();
        assert_eq!(a.distance(&c), 1.0);
        assert_eq!(RoleSet::new().distance(&RoleSet::new()), 0.0);
    }

    #[test]
    fn literal_parsing_and_clash() {
        let r = RoleSet::parse_all(&["HUMAN", "¬MARRIED", "-TALL"]).unwrap();
        assert!(r.is_consistent());
        assert_eq!(r.to_string(), "{HUMAN, ¬MARRIED, ¬TALL}");
        let bad = RoleSet::parse_all(&["MARRIED", "¬MARRIED"]).unwrap();
        assert_eq!(bad.first_clash(), Some(&Literal::pos("MARRIED")));
        assert!("¬".parse::<Literal>().is_err());
    }

    #[test]
    fn meaning_distances() {
        let a = Meaning::vector(&[7.941, 8.224]);
        let b = Meaning::vector(&[8.0, 8.0]);
        assert!((a.distance(&b).unwrap() - 0.2316).abs() < 1e-4);
        assert!(a.distance(&Meaning::vector(&[1.0])).is_err());
        assert!(a.distance(&Meaning::Bottom).is_err());
        let r = Meaning::Roles(RoleSet::parse_all(&["X"]).unwrap());
        assert_eq!(r.distance(&Meaning::Bottom).unwrap(), 1.0);
        assert_eq!(Meaning::Bottom.distance(&Meaning::Bottom).unwrap(), 0.0);
        assert_eq!(
            Meaning::Label("a".into()).distance(&Meaning::Label("b".into())).unwrap(),
            1.0
        );
    }
}
