//! Multiplicative-weights solver for spherical discrepancy.
//!
//! Given unit vectors `v₁, …, v_m ∈ S^{n−1}`, the solver grows a point `x`
//! from the origin by steps of length `δ`. Each step direction `y` is a unit
//! vector orthogonal to
//!
//! * the current point `x`,
//! * the weighted sum `Σ w_i v_i`,
//! * every heavy vector `v_i` with `w_i ≥ 2`,
//! * the top `n − |heavy| − 3` eigenvectors of `M = Σ_{i not heavy} w_i v_i v_iᵀ`,
//!
//! after which every weight is multiplied by `exp(λδ⟨v_i, y⟩)·ρ`. The
//! potential `Φ = Σ w_i` never increases, the weights stay below 3, and
//! `‖x‖ = δ√t`; together these give the bound reported by
//! [`guarantee_bound`] for `x/‖x‖`.
//!
//! Instances with fewer than `16n` vectors are padded by cyclic duplication.
//! Duplicates share their weight exactly, so the solver works on the distinct
//! vectors with integer multiplicities instead of materializing the padding.

use crate::linalg::{
    axpy, complement_unit_vector, dot, norm, sym_eig, unit_basis, LinalgError,
    SymmetricMatrix, UnitVector,
};
use thiserror::Error;

/// Largest admissible `λδ`: a weight entering the heavy set from below 2
/// must stay at most 3, i.e. `2·exp(λδ) ≤ 3`.
pub const MAX_LAMBDA_DELTA: f64 = 0.405_465_108_108_164_4; // ln(3/2)

/// Heavy threshold on the weights.
pub const HEAVY_WEIGHT: f64 = 2.0;

pub const DEFAULT_EIG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("dimension {0} is too small for the multiplicative-weights loop (need n >= 6)")]
    DimensionTooSmall(usize),
    #[error("instance has no vectors")]
    EmptyInstance,
    #[error("vector {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("vector {index} has norm {norm}, not 1 within 1e-9")]
    NotUnit { index: usize, norm: f64 },
    #[error("step too large: lambda*delta = {lambda_delta} exceeds {limit} (increase T)")]
    StepTooLarge { lambda_delta: f64, limit: f64 },
    #[error("iteration count must be positive")]
    ZeroIterations,
    #[error("trace stride must be positive")]
    ZeroStride,
    #[error("no unit vector orthogonal to the constraint set at t = {t} ({heavy} heavy)")]
    SubspaceExhausted { t: u64, heavy: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Input vectors on `S^{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    vectors: Vec<Vec<f64>>,
}

impl Instance {
    pub fn new(n: usize, vectors: Vec<Vec<f64>>) -> Result<Self, SolverError> {
        if n == 0 {
            return Err(SolverError::DimensionTooSmall(0));
        }
        if vectors.is_empty() {
            return Err(SolverError::EmptyInstance);
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != n {
                return Err(SolverError::DimensionMismatch {
                    index,
                    expected: n,
                    found: v.len(),
                });
            }
            let nrm = norm(v);
            if !((nrm - 1.0).abs() <= UnitVector::NORM_TOLERANCE) {
                return Err(SolverError::NotUnit { index, norm: nrm });
            }
        }
        Ok(Self { n, vectors })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Size after padding to at least `16n` vectors.
    pub fn padded_len(&self) -> usize {
        padded_count(self.n, self.vectors.len())
    }

    /// How many copies of each vector the cyclic padding produces.
    pub fn multiplicities(&self) -> Vec<usize> {
        let m = self.vectors.len();
        let padded = self.padded_len();
        let (base, extra) = (padded / m, padded % m);
        (0..m).map(|i| base + usize::from(i < extra)).collect()
    }

    /// `max_i ⟨v_i, x⟩`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.vectors
            .iter()
            .map(|v| dot(v, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn padded_count(n: usize, m: usize) -> usize {
    m.max(16 * n)
}

/// `m ≥ n·e^{n/2}`, where the guarantee exceeds 1 and any unit vector will do.
pub fn is_trivial(n: usize, padded_m: usize) -> bool {
    (padded_m as f64).ln() >= (n as f64).ln() + n as f64 / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Number of steps `T`.
    pub iterations: u64,
    pub eig_tolerance: f64,
    pub trace_stride: u64,
}

impl SolverConfig {
    pub fn with_iterations(iterations: u64) -> Self {
        Self {
            iterations,
            eig_tolerance: DEFAULT_EIG_TOLERANCE,
            trace_stride: (iterations / 10_000).max(1),
        }
    }

    /// `T = ⌈200·(n−5)·n²·λ²⌉`, which makes the step-size term of the
    /// guarantee a twentieth of the main term.
    pub fn default_for(n: usize, m: usize) -> Self {
        Self::with_iterations(default_iterations(n, m))
    }
}

pub fn default_iterations(n: usize, m: usize) -> u64 {
    let padded = padded_count(n, m);
    if n < 6 || is_trivial(n, padded) {
        return 1;
    }
    let lambda_sq = (padded as f64 / n as f64).ln();
    let nf = n as f64;
    (200.0 * (nf - 5.0) * nf * nf * lambda_sq).ceil() as u64
}

/// Step parameters derived from `(n, padded m, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub n: usize,
    pub padded_m: usize,
    pub iterations: u64,
    /// `λ = √ln(m/n)`
    pub lambda: f64,
    /// `δ = √(2(n−5)/T)`
    pub delta: f64,
    /// `ln ρ = −δ²λ²/(2(n−5))·(1 + λδn)`
    pub ln_rho: f64,
}

impl Schedule {
    /// Returns `None` in the trivial regime.
    pub fn new(n: usize, m: usize, iterations: u64) -> Result<Option<Self>, SolverError> {
        if n == 0 {
            return Err(SolverError::DimensionTooSmall(n));
        }
        if iterations == 0 {
            return Err(SolverError::ZeroIterations);
        }
        let padded_m = padded_count(n, m);
        if is_trivial(n, padded_m) {
            return Ok(None);
        }
        // 16n < n·e^{n/2} forces n ≥ 6 here.
        if n < 6 {
            return Err(SolverError::DimensionTooSmall(n));
        }
        let nf = n as f64;
        let lambda = (padded_m as f64 / nf).ln().sqrt();
        let delta = (2.0 * (nf - 5.0) / iterations as f64).sqrt();
        let lambda_delta = lambda * delta;
        if lambda_delta > MAX_LAMBDA_DELTA {
            return Err(SolverError::StepTooLarge {
                lambda_delta,
                limit: MAX_LAMBDA_DELTA,
            });
        }
        let ln_rho = -(delta * delta * lambda * lambda) / (2.0 * (nf - 5.0)) * (1.0 + lambda_delta * nf);
        Ok(Some(Self {
            n,
            padded_m,
            iterations,
            lambda,
            delta,
            ln_rho,
        }))
    }

    pub fn rho(&self) -> f64 {
        self.ln_rho.exp()
    }

    /// `exp(λ⟨v, x⟩ − λ²)·ρ^t`, the closed form of a weight at step `t`.
    pub fn weight_formula(&self, inner: f64, t: u64) -> f64 {
        (self.lambda * inner - self.lambda * self.lambda + t as f64 * self.ln_rho).exp()
    }
}

/// Certified upper bound on `max_i ⟨v_i, x/‖x‖⟩` after `T` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeBound {
    /// `min(1, term_main + term_stepsize + term_log3)`
    pub value: f64,
    /// `λ√(2/(n−5))`
    pub term_main: f64,
    /// `λ²δn/√(2(n−5))`
    pub term_stepsize: f64,
    /// `ln 3/(λ√(2(n−5)))`
    pub term_log3: f64,
    pub trivial: bool,
}

impl GuaranteeBound {
    pub fn trivial() -> Self {
        Self {
            value: 1.0,
            term_main: 1.0,
            term_stepsize: 0.0,
            term_log3: 0.0,
            trivial: true,
        }
    }

    pub fn unclamped(&self) -> f64 {
        self.term_main + self.term_stepsize + self.term_log3
    }
}

pub fn guarantee_bound(n: usize, m: usize, iterations: u64) -> Result<GuaranteeBound, SolverError> {
    Ok(match Schedule::new(n, m, iterations)? {
        None => GuaranteeBound::trivial(),
        Some(s) => bound_for(&s),
    })
}

fn bound_for(s: &Schedule) -> GuaranteeBound {
    let nf = s.n as f64;
    let root = (2.0 * (nf - 5.0)).sqrt();
    let term_main = s.lambda * (2.0 / (nf - 5.0)).sqrt();
    let term_stepsize = s.lambda * s.lambda * s.delta * nf / root;
    let term_log3 = 3f64.ln() / (s.lambda * root);
    GuaranteeBound {
        value: (term_main + term_stepsize + term_log3).min(1.0),
        term_main,
        term_stepsize,
        term_log3,
        trivial: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub phi: f64,
    pub heavy_count: usize,
    pub x_norm: f64,
    pub max_weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
}

impl SolverTrace {
    pub const CSV_HEADER: &'static str = "t,phi,heavy_count,x_norm,max_weight";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{},{:.16e},{:.16e}\n",
                r.t, r.phi, r.heavy_count, r.x_norm, r.max_weight
            ));
        }
        out
    }
}

/// State exposed to an observer once per step, after the direction `y` is
/// chosen and before `x` and the weights move.
#[derive(Debug)]
pub struct StepRecord<'a> {
    pub t: u64,
    pub schedule: &'a Schedule,
    /// Distinct input vectors and their padding multiplicities.
    pub vectors: &'a [Vec<f64>],
    pub multiplicities: &'a [usize],
    pub weights: &'a [f64],
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub phi: f64,
    /// Number of padded indices with weight at least 2.
    pub heavy_count: usize,
    pub heavy: &'a [usize],
    pub weighted_sum: &'a [f64],
    pub matrix: &'a SymmetricMatrix,
}

impl StepRecord<'_> {
    /// `yᵀ M y`
    pub fn quadratic_form(&self) -> f64 {
        self.matrix.quadratic_form(self.y)
    }

    /// `Φ/(n − 5)`
    pub fn eigen_budget(&self) -> f64 {
        self.phi / (self.schedule.n as f64 - 5.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: UnitVector,
    /// `max_i ⟨v_i, x⟩` over the input vectors.
    pub value: f64,
    pub bound: GuaranteeBound,
    pub padded_m: usize,
    pub iterations: u64,
    pub trace: SolverTrace,
}

impl Solution {
    pub fn within_guarantee(&self) -> bool {
        self.value <= self.bound.value + 1e-6
    }
}

pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<Solution, SolverError> {
    solve_observed(instance, config, |_| {})
}

pub fn solve_observed(
    instance: &Instance,
    config: &SolverConfig,
    mut observer: impl FnMut(&StepRecord<'_>),
) -> Result<Solution, SolverError> {
    if config.trace_stride == 0 {
        return Err(SolverError::ZeroStride);
    }
    let n = instance.dim();
    let vectors = instance.vectors();
    let multiplicities = instance.multiplicities();
    let padded_m = instance.padded_len();

    let schedule = match Schedule::new(n, padded_m, config.iterations)? {
        Some(s) => s,
        None => return Ok(trivial_solution(instance, config, padded_m)),
    };
    let iterations = schedule.iterations;
    let step = schedule.delta;
    let exponent = schedule.lambda * schedule.delta;
    let rho = schedule.rho();

    let m = vectors.len();
    let mut weights = vec![(-schedule.lambda * schedule.lambda).exp(); m];
    let mut x = vec![0.0; n];
    let mut trace = SolverTrace::default();
    let mut matrix = SymmetricMatrix::zeros(n);
    let mut heavy: Vec<usize> = Vec::new();
    let mut weighted_sum = vec![0.0; n];
    // Coordinate-major copy of the inputs so that every per-step reduction
    // runs over contiguous memory.
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|r| vectors.iter().map(|v| v[r]).collect())
        .collect();
    let counts: Vec<f64> = multiplicities.iter().map(|&k| k as f64).collect();
    let mut coef = vec![0.0; m];
    let mut scratch = Vec::with_capacity(m);
    let mut inner = vec![0.0; m];

    for t in 0..iterations {
        heavy.clear();
        heavy.extend((0..m).filter(|&i| weights[i] >= HEAVY_WEIGHT));
        let heavy_count: usize = heavy.iter().map(|&i| multiplicities[i]).sum();

        for ((c, w), k) in coef.iter_mut().zip(&weights).zip(&counts) {
            *c = w * k;
        }
        let phi: f64 = coef.iter().sum();
        for (g, col) in weighted_sum.iter_mut().zip(&columns) {
            *g = dot(&coef, col);
        }
        if t % config.trace_stride == 0 {
            trace.rows.push(trace_row(t, phi, heavy_count, &x, &weights));
        }

        for &i in &heavy {
            coef[i] = 0.0;
        }
        matrix.set_weighted_gram(&columns, &coef, &mut scratch);
        let eig = sym_eig(&matrix, config.eig_tolerance)?;

        let top = n.saturating_sub(heavy_count + 3);
        let spanning = std::iter::once(x.as_slice())
            .chain(std::iter::once(weighted_sum.as_slice()))
            .chain(heavy.iter().map(|&i| vectors[i].as_slice()))
            .chain(eig.vectors[..top].iter().map(|u| u.as_slice()));
        let y = match complement_unit_vector(n, spanning) {
            Ok(y) => y,
            Err(LinalgError::TrivialComplement(_)) => {
                return Err(SolverError::SubspaceExhausted { t, heavy: heavy_count })
            }
            Err(e) => return Err(e.into()),
        };

        observer(&StepRecord {
            t,
            schedule: &schedule,
            vectors,
            multiplicities: &multiplicities,
            weights: &weights,
            x: &x,
            y: &y,
            phi,
            heavy_count,
            heavy: &heavy,
            weighted_sum: &weighted_sum,
            matrix: &matrix,
        });

        inner.iter_mut().for_each(|a| *a = 0.0);
        for (yr, col) in y.iter().zip(&columns) {
            axpy(*yr, col, &mut inner);
        }
        for (w, a) in weights.iter_mut().zip(&inner) {
            *w *= (exponent * a).exp() * rho;
        }
        axpy(step, &y, &mut x);
    }

    let phi: f64 = weights
        .iter()
        .zip(&multiplicities)
        .map(|(w, &k)| w * k as f64)
        .sum();
    let heavy_count = weights
        .iter()
        .zip(&multiplicities)
        .filter(|(&w, _)| w >= HEAVY_WEIGHT)
        .map(|(_, &k)| k)
        .sum();
    trace.rows.push(trace_row(iterations, phi, heavy_count, &x, &weights));

    let x = UnitVector::normalize(&x)?;
    let value = instance.value(&x);
    Ok(Solution {
        x,
        value,
        bound: bound_for(&schedule),
        padded_m,
        iterations,
        trace,
    })
}

fn trace_row(t: u64, phi: f64, heavy_count: usize, x: &[f64], weights: &[f64]) -> TraceRow {
    TraceRow {
        t,
        phi,
        heavy_count,
        x_norm: norm(x),
        max_weight: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Any unit vector meets the trivial bound; take the direction opposite the
/// mean of the inputs (or `e₁` when the mean vanishes).
fn trivial_solution(instance: &Instance, config: &SolverConfig, padded_m: usize) -> Solution {
    let n = instance.dim();
    let mut mean = vec![0.0; n];
    for v in instance.vectors() {
        axpy(-1.0, v, &mut mean);
    }
    let x = if norm(&mean) > 1e-8 {
        UnitVector::normalize(&mean).expect("nonzero mean")
    } else {
        UnitVector::new(unit_basis(n, 0)).expect("basis vector is unit")
    };
    let value = instance.value(&x);
    let lambda_sq = (padded_m as f64 / n as f64).ln();
    let w0 = (-lambda_sq).exp();
    Solution {
        x,
        value,
        bound: GuaranteeBound::trivial(),
        padded_m,
        iterations: config.iterations,
        trace: SolverTrace {
            rows: vec![TraceRow {
                t: 0,
                phi: w0 * padded_m as f64,
                heavy_count: 0,
                x_norm: 0.0,
                max_weight: w0,
            }],
        },
    }
}
