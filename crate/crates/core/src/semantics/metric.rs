//! Pseudometrics and explicit finite metric spaces.

use serde::{Deserialize, Serialize};

use super::meaning::euclidean;
use super::SemanticsError;

/// Absolute tolerance for zero-diagonal, symmetry and triangle checks.
pub const METRIC_TOLERANCE: f64 = 1e-9;

pub trait Pseudometric<P: ?Sized> {
    fn distance(&self, a: &P, b: &P) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Pseudometric<[f64]> for Euclidean {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        euclidean(a, b)
    }
}

impl Pseudometric<Vec<f64>> for Euclidean {
    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        euclidean(a, b)
    }
}

/// 0 on equal points, 1 otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiscreteMetric;

impl<P: PartialEq + ?Sized> Pseudometric<P> for DiscreteMetric {
    fn distance(&self, a: &P, b: &P) -> f64 {
        if a == b {
            0.0
        } else {
            1.0
        }
    }
}

/// A labelled point set with its full pairwise distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    distances: Vec<Vec<f64>>,
}

/// First failing axiom found by [`validate_pseudometric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricViolation {
    Negative { i: usize, j: usize },
    NonZeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    /// `d(i,k) > d(i,j) + d(j,k)`.
    Triangle { i: usize, j: usize, k: usize },
}

impl FiniteMetricSpace {
    pub fn from_matrix(labels: Vec<String>, distances: Vec<Vec<f64>>) -> Result<Self, SemanticsError> {
        let n = labels.len();
        if distances.len() != n || distances.iter().any(|row| row.len() != n) {
            return Err(SemanticsError::MatrixShape { points: n });
        }
        if distances.iter().flatten().any(|d| d.is_nan()) {
            return Err(SemanticsError::Parse("NaN distance".into()));
        }
        Ok(FiniteMetricSpace { labels, distances })
    }

    /// Builds the matrix by evaluating `metric` on every pair.
    pub fn from_points<P, M>(points: &[P], metric: &M) -> Self
    where
        M: Pseudometric<P>,
    {
        let distances = points
            .iter()
            .map(|a| points.iter().map(|b| metric.distance(a, b)).collect())
            .collect();
        FiniteMetricSpace {
            labels: (0..points.len()).map(|i| i.to_string()).collect(),
            distances,
        }
    }

    /// Points on the real line with `|x - y|`.
    pub fn on_line(xs: &[f64]) -> Self {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Self::from_points(&pts, &Euclidean)
    }

    pub fn discrete(n: usize) -> Self {
        let idx: Vec<usize> = (0..n).collect();
        Self::from_points(&idx, &DiscreteMetric)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, SemanticsError> {
        if labels.len() != self.labels.len() {
            return Err(SemanticsError::MatrixShape { points: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i][j]
    }

    /// Unordered pairs `(i, j, d)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.distances[i][j])))
    }

    pub fn diameter(&self) -> f64 {
        self.pairs().map(|(_, _, d)| d).fold(0.0, f64::max)
    }
}

/// Checks non-negativity, zero diagonal, symmetry and the triangle inequality
/// over every ordered triple, returning the first violation found.
pub fn validate_pseudometric(space: &FiniteMetricSpace) -> Result<(), MetricViolation> {
    let n = space.len();
    let d = |i, j| space.distance(i, j);
    for i in 0..n {
        if d(i, i).abs() > METRIC_TOLERANCE {
            return Err(MetricViolation::NonZeroDiagonal { i });
        }
        for j in 0..n {
            if d(i, j) < -METRIC_TOLERANCE {
                return Err(MetricViolation::Negative { i, j });
            }
            if (d(i, j) - d(j, i)).abs() > METRIC_TOLERANCE {
                return Err(MetricViolation::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d(i, k) > d(i, j) + d(j, k) + METRIC_TOLERANCE {
                    return Err(MetricViolation::Triangle { i, j, k });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn single_point_passes() {
        let s = FiniteMetricSpace::from_matrix(labels(1), vec![vec![0.0]]).unwrap();
        assert_eq!(validate_pseudometric(&s), Ok(()));
    }

    #[test]
    fn discrete_metric_passes() {
        assert_eq!(validate_pseudometric(&FiniteMetricSpace::discrete(5)), Ok(()));
    }

    #[test]
    fn triangle_violation_is_located() {
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        let s = FiniteMetricSpace::from_matrix(labels(3), m).unwrap();
        assert_eq!(
            validate_pseudometric(&s),
            Err(MetricViolation::Triangle { i: 0, j: 1, k: 2 })
        );
    }

    #[test]
    fn asymmetry_and_diagonal_detected() {
        let s = FiniteMetricSpace::from_matrix(labels(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(validate_pseudometric(&s), Err(MetricViolation::Asymmetric { i: 0, j: 1 }));
        let s = FiniteMetricSpace::from_matrix(labels(2), vec![vec![0.1, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(validate_pseudometric(&s), Err(MetricViolation::NonZeroDiagonal { i: 0 }));
    }

    #[test]
    fn shape_is_checked() {
        assert!(FiniteMetricSpace::from_matrix(labels(2), vec![vec![0.0]]).is_err());
    }

    proptest! {
        #[test]
        fn planar_euclidean_embeddings_validate(
            pts in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..15)
        ) {
            let pts: Vec<Vec<f64>> = pts.into_iter().map(|(x, y)| vec![x, y]).collect();
            let space = FiniteMetricSpace::from_points(&pts, &Euclidean);
            prop_assert_eq!(validate_pseudometric(&space), Ok(()));
        }
    }
}
