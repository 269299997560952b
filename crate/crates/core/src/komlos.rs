//! Partial coloring by a constrained Gaussian walk, and the spherical Komlós
//! reduction built on it.
//!
//! The walk starts at `x⁽⁰⁾` and takes Gaussian steps of size `γ` in the
//! subspace orthogonal to frozen coordinates (`|x_i| ≥ 1 − δ`) and to rows
//! whose discrepancy budget is nearly spent. Steps are shortened so that the
//! walk never leaves the box or overshoots a budget. An attempt succeeds once
//! half of the coordinates are frozen.

use crate::linalg::{dot, norm, RANK_THRESHOLD, UnitVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub const DEFAULT_BUDGET: usize = 200;
pub const DEFAULT_ZETA: f64 = 1e-3;

/// Rows at least this long are treated as hard constraints.
pub const HEAVY_ROW_NORM: f64 = 20.0;
/// Discrepancy budget, in units of the row norm, for the other rows.
pub const LIGHT_ROW_THRESHOLD: f64 = 50.0;
pub const KOMLOS_APPROX: f64 = 0.5;

/// `50 · 20 · 2√2`: rows outside the heavy set have `|⟨v, x⟩| < 1000`, and
/// at least `n/2` coordinates of size `≥ 1/2` give `‖x‖ ≥ √n/(2√2)`.
pub const CERTIFIED_K: f64 = 2000.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KomlosError {
    #[error("coloring problem has no coordinates")]
    Empty,
    #[error("row {index} has length {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("threshold {index} is {value}; thresholds must be finite and nonnegative")]
    BadThreshold { index: usize, value: f64 },
    #[error("start coordinate {index} is {value}, outside [-1, 1]")]
    StartOutOfBox { index: usize, value: f64 },
    #[error("approximation parameter {0} is outside (0, 1)")]
    BadApprox(f64),
    #[error("sum of exp(-c^2/16) is {sum}, above n/32 = {limit}")]
    HypothesisViolated { sum: f64, limit: f64 },
    #[error("column {index} has norm {norm} > 1")]
    ColumnTooLong { index: usize, norm: f64 },
    #[error("{heavy} rows of norm >= 20 exceed n/400 = {limit}")]
    TooManyHeavyRows { heavy: usize, limit: f64 },
    #[error("no partial coloring found in {attempts} attempts")]
    BudgetExhausted { attempts: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoringProblem {
    n: usize,
    rows: Vec<Vec<f64>>,
    thresholds: Vec<f64>,
    start: Vec<f64>,
    approx: f64,
}

impl ColoringProblem {
    /// Validates the inputs, including `Σ_j exp(−c_j²/16) ≤ n/32`.
    pub fn new(
        rows: Vec<Vec<f64>>,
        thresholds: Vec<f64>,
        start: Vec<f64>,
        approx: f64,
    ) -> Result<Self, KomlosError> {
        let p = Self::new_relaxed(rows, thresholds, start, approx)?;
        let sum = p.hypothesis_sum();
        let limit = p.n as f64 / 32.0;
        if sum > limit {
            return Err(KomlosError::HypothesisViolated { sum, limit });
        }
        Ok(p)
    }

    /// As [`ColoringProblem::new`] without the threshold-sum condition. The
    /// walk and its postconditions are unchanged, but success is no longer
    /// guaranteed to be likely.
    pub fn new_relaxed(
        rows: Vec<Vec<f64>>,
        thresholds: Vec<f64>,
        start: Vec<f64>,
        approx: f64,
    ) -> Result<Self, KomlosError> {
        let n = start.len();
        if n == 0 {
            return Err(KomlosError::Empty);
        }
        if rows.len() != thresholds.len() {
            return Err(KomlosError::DimensionMismatch {
                index: rows.len().min(thresholds.len()),
                expected: rows.len(),
                found: thresholds.len(),
            });
        }
        for (index, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(KomlosError::DimensionMismatch {
                    index,
                    expected: n,
                    found: r.len(),
                });
            }
        }
        for (index, &value) in thresholds.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(KomlosError::BadThreshold { index, value });
            }
        }
        for (index, &value) in start.iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(KomlosError::StartOutOfBox { index, value });
            }
        }
        if !(approx > 0.0 && approx < 1.0) {
            return Err(KomlosError::BadApprox(approx));
        }
        Ok(Self {
            n,
            rows,
            thresholds,
            start,
            approx,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn hypothesis_sum(&self) -> f64 {
        self.thresholds.iter().map(|c| (-c * c / 16.0).exp()).sum()
    }

    /// Number of coordinates with `|x_i| ≥ 1 − δ`.
    pub fn frozen_count(&self, x: &[f64]) -> usize {
        x.iter().filter(|v| v.abs() >= 1.0 - self.approx).count()
    }

    /// Largest violation of `|⟨v_j, x − x⁽⁰⁾⟩| ≤ c_j‖v_j‖` (negative if all
    /// rows hold with room to spare; `-inf` without rows).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(&self.start).map(|(a, b)| a - b).collect();
        self.rows
            .iter()
            .zip(&self.thresholds)
            .map(|(v, c)| dot(v, &diff).abs() - c * norm(v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Both postconditions of a partial coloring.
    pub fn is_partial_coloring(&self, x: &[f64]) -> bool {
        x.len() == self.n
            && x.iter().all(|v| v.abs() <= 1.0)
            && 2 * self.frozen_count(x) >= self.n
            && self.max_violation(x) <= 1e-6
    }

    /// Step size `γ = δ / √ln(mn/ζ)`.
    pub fn step_size(&self, zeta: f64) -> f64 {
        let m = self.rows.len().max(1) as f64;
        let l = (m * self.n as f64 / zeta).ln().max(1.0);
        self.approx / l.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialColoring {
    pub x: Vec<f64>,
    /// 1-based index of the successful attempt.
    pub attempts: usize,
    pub steps: usize,
}

/// Runs up to `budget` independent walks (stream `a` of the generator seeded
/// with `seed` drives attempt `a`) and returns the first success.
pub fn partial_coloring(
    problem: &ColoringProblem,
    seed: u64,
    budget: usize,
) -> Result<PartialColoring, KomlosError> {
    partial_coloring_with(problem, seed, budget, DEFAULT_ZETA)
}

pub fn partial_coloring_with(
    problem: &ColoringProblem,
    seed: u64,
    budget: usize,
    zeta: f64,
) -> Result<PartialColoring, KomlosError> {
    let gamma = problem.step_size(zeta);
    let max_steps = (16.0 / (gamma * gamma)).ceil() as usize;
    let norms: Vec<f64> = problem.rows.iter().map(|r| norm(r)).collect();
    for attempt in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let (x, steps) = walk(problem, &norms, gamma, max_steps, &mut rng);
        if problem.is_partial_coloring(&x) {
            return Ok(PartialColoring {
                x,
                attempts: attempt + 1,
                steps,
            });
        }
    }
    Err(KomlosError::BudgetExhausted { attempts: budget })
}

fn walk(
    p: &ColoringProblem,
    norms: &[f64],
    gamma: f64,
    max_steps: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, usize) {
    let n = p.n;
    let mut x = p.start.clone();
    let mut disc: Vec<f64> = vec![0.0; p.rows.len()];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut frozen = vec![false; n];
    let mut g = vec![0.0; n];
    for step in 0..max_steps {
        for (f, v) in frozen.iter_mut().zip(&x) {
            *f = v.abs() >= 1.0 - p.approx;
        }
        if 2 * frozen.iter().filter(|&&f| f).count() >= n {
            return (x, step);
        }
        let tight: Vec<usize> = (0..p.rows.len())
            .filter(|&j| p.thresholds[j] * norms[j] - disc[j].abs() <= gamma * norms[j])
            .collect();

        // Orthonormal basis of the tight rows restricted to free coordinates.
        basis.clear();
        for &j in &tight {
            let mut r: Vec<f64> = p.rows[j]
                .iter()
                .zip(&frozen)
                .map(|(v, &f)| if f { 0.0 } else { *v })
                .collect();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &r);
                    r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let len = norm(&r);
            if len > RANK_THRESHOLD {
                r.iter_mut().for_each(|a| *a /= len);
                basis.push(r);
            }
        }
        if basis.len() + frozen.iter().filter(|&&f| f).count() >= n {
            return (x, step);
        }

        for (gi, &f) in g.iter_mut().zip(&frozen) {
            let s: f64 = rng.sample(StandardNormal);
            *gi = if f { 0.0 } else { s };
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &g);
                g.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        for (gi, &f) in g.iter_mut().zip(&frozen) {
            if f {
                *gi = 0.0;
            }
            *gi *= gamma;
        }

        // Longest step fraction keeping the box and the non-tight budgets.
        let mut alpha = 1.0f64;
        for (xi, ui) in x.iter().zip(&g) {
            if *ui != 0.0 {
                alpha = alpha.min((ui.signum() - xi) / ui);
            }
        }
        let mut du = vec![0.0; p.rows.len()];
        for (j, row) in p.rows.iter().enumerate() {
            du[j] = dot(row, &g);
            if tight.binary_search(&j).is_ok() || du[j] == 0.0 {
                continue;
            }
            let cap = p.thresholds[j] * norms[j];
            let room = if du[j] > 0.0 { cap - disc[j] } else { -cap - disc[j] };
            alpha = alpha.min(room / du[j]);
        }
        let alpha = alpha.max(0.0);
        for (xi, ui) in x.iter_mut().zip(&g) {
            *xi = (*xi + alpha * ui).clamp(-1.0, 1.0);
        }
        for (d, u) in disc.iter_mut().zip(&du) {
            *d += alpha * u;
        }
    }
    (x, max_steps)
}

/// Columns `w_1, …, w_n ∈ R^d` with `‖w_i‖ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KomlosInput {
    d: usize,
    columns: Vec<Vec<f64>>,
}

impl KomlosInput {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self, KomlosError> {
        let d = columns.first().ok_or(KomlosError::Empty)?.len();
        for (index, c) in columns.iter().enumerate() {
            if c.len() != d {
                return Err(KomlosError::DimensionMismatch {
                    index,
                    expected: d,
                    found: c.len(),
                });
            }
            let len = norm(c);
            if !(len <= 1.0 + 1e-9) {
                return Err(KomlosError::ColumnTooLong { index, norm: len });
            }
        }
        Ok(Self { d, columns })
    }

    /// Number of columns.
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.d
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Row `j` of the matrix: `(w_1[j], …, w_n[j])`.
    pub fn row(&self, j: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[j]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.d).map(|j| self.row(j)).collect()
    }

    /// `‖W x‖∞`.
    pub fn apply_inf_norm(&self, x: &[f64]) -> f64 {
        (0..self.d)
            .map(|j| dot(&self.row(j), x).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KomlosOutcome {
    pub x: UnitVector,
    /// The partial coloring before normalization.
    pub coloring: PartialColoring,
    /// Rows of norm at least 20, held at inner product zero.
    pub heavy_rows: Vec<usize>,
    /// `‖W x‖∞ ≤ certified_k / √n` holds by construction.
    pub certified_k: f64,
    /// `‖W x‖∞` for the returned unit vector.
    pub inf_norm: f64,
}

impl KomlosOutcome {
    /// `√n · ‖W x‖∞`, the constant actually achieved.
    pub fn achieved_k(&self) -> f64 {
        self.inf_norm * (self.x.dim() as f64).sqrt()
    }
}

pub fn spherical_komlos(input: &KomlosInput, seed: u64) -> Result<KomlosOutcome, KomlosError> {
    spherical_komlos_with_budget(input, seed, DEFAULT_BUDGET)
}

pub fn spherical_komlos_with_budget(
    input: &KomlosInput,
    seed: u64,
    budget: usize,
) -> Result<KomlosOutcome, KomlosError> {
    let n = input.dim();
    let rows = input.rows();
    let heavy_rows: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| norm(r) >= HEAVY_ROW_NORM)
        .map(|(j, _)| j)
        .collect();
    let limit = n as f64 / 400.0;
    if heavy_rows.len() as f64 > limit * (1.0 + 1e-8) {
        return Err(KomlosError::TooManyHeavyRows {
            heavy: heavy_rows.len(),
            limit,
        });
    }
    let thresholds = (0..rows.len())
        .map(|j| {
            if heavy_rows.binary_search(&j).is_ok() {
                0.0
            } else {
                LIGHT_ROW_THRESHOLD
            }
        })
        .collect();
    let problem = ColoringProblem::new(rows, thresholds, vec![0.0; n], KOMLOS_APPROX)?;
    let coloring = partial_coloring(&problem, seed, budget)?;
    let x = UnitVector::normalize(&coloring.x).expect("partial coloring is nonzero");
    let inf_norm = input.apply_inf_norm(&x);
    Ok(KomlosOutcome {
        x,
        coloring,
        heavy_rows,
        certified_k: CERTIFIED_K,
        inf_norm,
    })
}
