use rand::Rng;

use super::{ArchError, Perturbation, Representation};
use crate::rng::StreamRng;
use crate::semantics::FiniteMetricSpace;

/// The reference distribution `P` over representations.
pub trait RepresentationSampler: Send + Sync {
    fn id(&self) -> &str;

    fn sample(&self, rng: &mut StreamRng) -> Representation;

    /// The full support, when `P` is finite and can be enumerated.
    fn support(&self) -> Option<Vec<Representation>> {
        None
    }
}

/// A threat model `U`: a family of perturbations indexed by scale.
pub trait ThreatModel: Send + Sync {
    fn id(&self) -> &str;

    /// One random member with budget `scale` for `rep`.
    fn draw(&self, rep: &Representation, scale: f64, rng: &mut StreamRng) -> Result<Perturbation, ArchError>;

    /// Every member with budget `scale` for `rep`, when the family is finite.
    fn enumerate(&self, _rep: &Representation, _scale: f64) -> Option<Result<Vec<Perturbation>, ArchError>> {
        None
    }
}

/// Uniform over a fixed list of representations.
#[derive(Debug, Clone)]
pub struct FixedSampler {
    id: String,
    reps: Vec<Representation>,
}

impl FixedSampler {
    pub fn new(id: impl Into<String>, reps: Vec<Representation>) -> Self {
        FixedSampler { id: id.into(), reps }
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

impl RepresentationSampler for FixedSampler {
    fn id(&self) -> &str {
        &self.id
    }

    fn sample(&self, rng: &mut StreamRng) -> Representation {
        self.reps[rng.gen_range(0..self.reps.len())].clone()
    }

    fn support(&self) -> Option<Vec<Representation>> {
        Some(self.reps.clone())
    }
}

/// On a finite representation space: move to any point within the budget.
#[derive(Debug, Clone)]
pub struct FiniteNeighborhoodThreat {
    space: FiniteMetricSpace,
}

impl FiniteNeighborhoodThreat {
    pub fn new(space: FiniteMetricSpace) -> Self {
        FiniteNeighborhoodThreat { space }
    }

    fn origin(&self, rep: &Representation) -> Result<usize, ArchError> {
        match rep {
            Representation::Point(i) if *i < self.space.len() => Ok(*i),
            other => Err(ArchError::SpaceMismatch(format!("{other:?}"))),
        }
    }

    fn neighbors(&self, i: usize, scale: f64) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&j| self.space.distance(i, j) <= scale)
            .collect()
    }

    fn jump(&self, i: usize, j: usize) -> Result<Perturbation, ArchError> {
        Perturbation::new("finite-neighborhood", self.space.distance(i, j), move |r| match r {
            Representation::Point(k) if *k == i => Ok(Representation::Point(j)),
            other => Err(ArchError::SpaceMismatch(format!("perturbation built for point {i}, got {other:?}"))),
        })
    }
}

impl ThreatModel for FiniteNeighborhoodThreat {
    fn id(&self) -> &str {
        "finite-neighborhood"
    }

    fn draw(&self, rep: &Representation, scale: f64, rng: &mut StreamRng) -> Result<Perturbation, ArchError> {
        if scale < 0.0 {
            return Err(ArchError::NegativeScale(scale));
        }
        let i = self.origin(rep)?;
        let near = self.neighbors(i, scale);
        let j = near[rng.gen_range(0..near.len())];
        self.jump(i, j)
    }

    fn enumerate(&self, rep: &Representation, scale: f64) -> Option<Result<Vec<Perturbation>, ArchError>> {
        if scale < 0.0 {
            return Some(Err(ArchError::NegativeScale(scale)));
        }
        Some(self.origin(rep).and_then(|i| {
            self.neighbors(i, scale)
                .into_iter()
                .map(|j| self.jump(i, j))
                .collect()
        }))
    }
}
