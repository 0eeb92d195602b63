//! Exact minimal oscillation `ω*` on finite metric spaces, and the checks that
//! go with it: validity and minimality of a candidate modulus, uniform
//! discreteness, and detection of a non-vanishing limit at 0.
//!
//! A tabulated map `S` is given as one [`Meaning`] per point of the space;
//! image distances use [`Meaning::distance`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semantics::{FiniteMetricSpace, Meaning, SemanticsError, METRIC_TOLERANCE};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModulusError {
    #[error("image has {image} values for {points} points")]
    ImageLength { image: usize, points: usize },
    #[error("scale grid must start at 0")]
    GridMissingZero,
    #[error("scale grid must be finite, nonnegative and ascending")]
    BadGrid,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Why a candidate fails [`is_valid_modulus`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModulusViolation {
    NotMonotone { index: usize },
    NonZeroAtOrigin(f64),
    /// A pairwise distance lies beyond the last grid scale.
    GridTooCoarse { distance: f64 },
    /// `d(S(r_i), S(r_j)) > ω(d_R(r_i, r_j))`.
    Exceeded { i: usize, j: usize, oscillation: f64, bound: f64 },
}

/// A candidate is below `ω*` at some grid scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityViolation {
    pub scale: f64,
    pub minimal: f64,
    pub candidate: f64,
}

/// `ω` sampled on an ascending grid; values may be `+∞`. Queries between
/// grid points take the value at the largest grid scale not above the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl ModulusCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, ModulusError> {
        if grid.len() != values.len() {
            return Err(ModulusError::BadGrid);
        }
        check_grid(&grid)?;
        Ok(ModulusCurve { grid, values })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self, ModulusError> {
        let values = grid.iter().map(|&e| f(e)).collect();
        Self::new(grid, values)
    }

    pub fn value_at(&self, scale: f64) -> f64 {
        let idx = self.grid.partition_point(|&g| g <= scale);
        if idx == 0 {
            0.0
        } else {
            self.values[idx - 1]
        }
    }

    pub fn covers(&self, scale: f64) -> bool {
        self.grid.last().is_some_and(|&g| g >= scale)
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> ModulusCurve {
        ModulusCurve {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<(), ModulusError> {
    if grid.first() != Some(&0.0) {
        return Err(ModulusError::GridMissingZero);
    }
    if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModulusError::BadGrid);
    }
    Ok(())
}

fn check_image(space: &FiniteMetricSpace, image: &[Meaning]) -> Result<(), ModulusError> {
    if image.len() != space.len() {
        return Err(ModulusError::ImageLength {
            image: image.len(),
            points: space.len(),
        });
    }
    Ok(())
}

/// `(d_R, d_M)` for every unordered pair, sorted by `d_R`.
fn pair_table(space: &FiniteMetricSpace, image: &[Meaning]) -> Result<Vec<(f64, f64)>, ModulusError> {
    let mut pairs = space
        .pairs()
        .map(|(i, j, d)| Ok((d, image[i].distance(&image[j])?)))
        .collect::<Result<Vec<_>, SemanticsError>>()?;
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// `ω*(ε) = max { d(S(r), S(r')) : d_R(r, r') ≤ ε }` at one scale.
pub fn oscillation_at(space: &FiniteMetricSpace, image: &[Meaning], scale: f64) -> Result<f64, ModulusError> {
    check_image(space, image)?;
    let mut best: f64 = 0.0;
    for (i, j, d) in space.pairs() {
        if d <= scale {
            best = best.max(image[i].distance(&image[j])?);
        }
    }
    Ok(best)
}

/// `ω*` on `grid` refined with every realized pairwise distance, so that
/// step queries at any realized distance are exact.
pub fn minimal_oscillation(
    space: &FiniteMetricSpace,
    image: &[Meaning],
    grid: &[f64],
) -> Result<ModulusCurve, ModulusError> {
    check_image(space, image)?;
    check_grid(grid)?;
    let pairs = pair_table(space, image)?;
    let mut scales: Vec<f64> = grid.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let mut values = Vec::with_capacity(scales.len());
    let mut running: f64 = 0.0;
    let mut next = 0;
    for &s in &scales {
        while next < pairs.len() && pairs[next].0 <= s {
            running = running.max(pairs[next].1);
            next += 1;
        }
        values.push(running);
    }
    // distinct points at distance 0 make ω*(0) positive
    ModulusCurve::new(scales, values)
}

/// Monotone, `ω(0) = 0`, and dominates every realized pair oscillation.
pub fn is_valid_modulus(
    candidate: &ModulusCurve,
    space: &FiniteMetricSpace,
    image: &[Meaning],
) -> Result<Result<(), ModulusViolation>, ModulusError> {
    check_image(space, image)?;
    if let Some(index) = candidate.values.windows(2).position(|w| w[0] > w[1]) {
        return Ok(Err(ModulusViolation::NotMonotone { index: index + 1 }));
    }
    if candidate.values[0] != 0.0 {
        return Ok(Err(ModulusViolation::NonZeroAtOrigin(candidate.values[0])));
    }
    for (i, j, d) in space.pairs() {
        if !candidate.covers(d) {
            return Ok(Err(ModulusViolation::GridTooCoarse { distance: d }));
        }
        let oscillation = image[i].distance(&image[j])?;
        let bound = candidate.value_at(d);
        if oscillation > bound + METRIC_TOLERANCE {
            return Ok(Err(ModulusViolation::Exceeded {
                i,
                j,
                oscillation,
                bound,
            }));
        }
    }
    Ok(Ok(()))
}

/// `ω* ≤ candidate` at every grid scale of the candidate.
pub fn check_minimality(
    space: &FiniteMetricSpace,
    image: &[Meaning],
    candidate: &ModulusCurve,
) -> Result<Result<(), MinimalityViolation>, ModulusError> {
    for (&scale, &value) in candidate.grid.iter().zip(&candidate.values) {
        let minimal = oscillation_at(space, image, scale)?;
        if minimal > value + METRIC_TOLERANCE {
            return Ok(Err(MinimalityViolation {
                scale,
                minimal,
                candidate: value,
            }));
        }
    }
    Ok(Ok(()))
}

/// `δ0 = min d_R` over distinct pairs, or `None` if some distinct pair is at
/// distance 0 (or the space has fewer than two points).
pub fn uniform_discreteness(space: &FiniteMetricSpace) -> Option<f64> {
    let min = space.pairs().map(|(_, _, d)| d).fold(f64::INFINITY, f64::min);
    (min.is_finite() && min > 0.0).then_some(min)
}

/// The curve stays above half its largest value at every probe scale.
#[derive(Debug, Clone, PartialEq)]
pub struct NonVanishing {
    pub gap: f64,
    pub probe_values: Vec<(f64, f64)>,
}

/// Finite-truncation test for `lim_{ε→0} ω(ε) = 0`: fails when the curve
/// exceeds half of its largest value (the image diameter, once the grid
/// covers the domain diameter) at every probe scale.
pub fn vanishing_limit_check(curve: &ModulusCurve, probes: &[f64]) -> Result<(), NonVanishing> {
    let gap = 0.5 * curve.max_value();
    let probe_values: Vec<(f64, f64)> = probes.iter().map(|&p| (p, curve.value_at(p))).collect();
    if gap > 0.0 && !probe_values.is_empty() && probe_values.iter().all(|&(_, v)| v > gap) {
        Err(NonVanishing { gap, probe_values })
    } else {
        Ok(())
    }
}
