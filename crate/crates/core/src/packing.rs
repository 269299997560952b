//! Greedy packings: each new point is the solver's answer for the points
//! placed so far, so its inner product with every earlier point is at most
//! the guarantee. Since inner products are symmetric, that bounds every pair.

use crate::geometry::{cap_volume, GeometryError};
use crate::linalg::{dot, unit_basis, UnitVector};
use crate::solver::{solve, GuaranteeBound, Instance, SolverConfig, SolverError};
use crate::sweep::max_over;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PackingError {
    #[error("a packing needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("dimension {0} is too small (need n >= 2)")]
    DimensionTooSmall(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingResult {
    pub points: Vec<UnitVector>,
    /// `max_{i≠j} ⟨v_i, v_j⟩`, by exhaustive comparison.
    pub max_pair_inner: f64,
    /// Half the minimum pairwise angle: caps of this radius are disjoint.
    pub radius: f64,
    /// `m · vol(n, radius)`.
    pub density: f64,
    /// Weakest guarantee among the solves (largest value).
    pub certified_bound: GuaranteeBound,
}

impl PackingResult {
    pub fn within_bound(&self) -> bool {
        self.max_pair_inner <= self.certified_bound.value + 1e-6
    }
}

/// `m` points on `S^{n−1}`, starting from `e₁`.
pub fn generate_packing(
    n: usize,
    m: usize,
    config: &SolverConfig,
) -> Result<PackingResult, PackingError> {
    generate_packing_observed(n, m, config, |_, _| {})
}

/// As [`generate_packing`], calling `progress(k, point)` after each point.
pub fn generate_packing_observed(
    n: usize,
    m: usize,
    config: &SolverConfig,
    mut progress: impl FnMut(usize, &UnitVector),
) -> Result<PackingResult, PackingError> {
    if n < 2 {
        return Err(PackingError::DimensionTooSmall(n));
    }
    if m < 2 {
        return Err(PackingError::TooFewPoints(m));
    }
    let first = UnitVector::new(unit_basis(n, 0)).expect("basis vector is unit");
    progress(1, &first);
    let mut raw: Vec<Vec<f64>> = vec![first.as_slice().to_vec()];
    let mut points = vec![first];
    let mut worst: Option<GuaranteeBound> = None;
    while points.len() < m {
        let instance = Instance::new(n, raw.clone())?;
        let sol = solve(&instance, config)?;
        if worst.as_ref().is_none_or(|w| sol.bound.value > w.value) {
            worst = Some(sol.bound);
        }
        raw.push(sol.x.as_slice().to_vec());
        points.push(sol.x);
        progress(points.len(), points.last().unwrap());
    }
    let max_pair_inner = max_pair_inner(&points);
    let radius = max_pair_inner.clamp(-1.0, 1.0).acos() / 2.0;
    let density = m as f64 * cap_volume(n, radius)?;
    Ok(PackingResult {
        points,
        max_pair_inner,
        radius,
        density,
        certified_bound: worst.expect("at least one solve"),
    })
}

/// `max_{i<j} ⟨p_i, p_j⟩` over all pairs; `-inf` for fewer than two points.
pub fn max_pair_inner(points: &[UnitVector]) -> f64 {
    max_over(points.len(), |i| {
        let pi = points[i].as_slice();
        points[i + 1..]
            .iter()
            .map(|q| dot(pi, q.as_slice()))
            .fold(f64::NEG_INFINITY, f64::max)
    })
}
