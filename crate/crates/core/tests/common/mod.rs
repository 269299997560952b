#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sphere_disc::linalg::dot;
use sphere_disc::solver::{solve_observed, Instance, Solution, SolverConfig, SolverError};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let s = dot(&v, &v).sqrt();
        if s > 1e-8 {
            return v.into_iter().map(|a| a / s).collect();
        }
    }
}

pub fn random_vectors(seed: u64, n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..m).map(|_| random_unit(&mut r, n)).collect()
}

pub fn axes(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = s;
            out.push(v);
        }
    }
    out
}

/// Worst violation of each per-step invariant over a run. Every field is
/// "observed minus allowed", so a run is clean when all are `<= 0`.
#[derive(Debug, Clone, Copy)]
pub struct Invariants {
    pub steps: u64,
    /// `Φ(t+1) − Φ(t)(1 + 1e-12)`
    pub phi_increase: f64,
    /// `|‖x‖ − δ√t| / (δ√t) − 1e-9`
    pub norm_law: f64,
    /// `max w − (3 + 1e-6)`
    pub weight_cap: f64,
    /// `yᵀMy − Φ/(n−5) − 1e-8`
    pub eigen: f64,
    /// Largest relative deviation from the closed-form weight, minus 1e-6.
    pub weight_formula: f64,
    /// Largest of the three orthogonality residuals, minus their tolerance.
    pub orthogonality: f64,
}

impl Invariants {
    pub fn clean(&self) -> bool {
        [
            self.phi_increase,
            self.norm_law,
            self.weight_cap,
            self.eigen,
            self.weight_formula,
            self.orthogonality,
        ]
        .iter()
        .all(|&v| v <= 0.0)
    }
}

/// Runs the solver, checking every invariant at every step (the weight
/// formula every `formula_stride` steps).
pub fn checked_solve(
    instance: &Instance,
    config: &SolverConfig,
    formula_stride: u64,
) -> Result<(Solution, Invariants), SolverError> {
    let neg = f64::NEG_INFINITY;
    let mut inv = Invariants {
        steps: 0,
        phi_increase: neg,
        norm_law: neg,
        weight_cap: neg,
        eigen: neg,
        weight_formula: neg,
        orthogonality: neg,
    };
    let mut prev_phi: Option<f64> = None;
    let sol = solve_observed(instance, config, |r| {
        inv.steps += 1;
        if let Some(p) = prev_phi {
            inv.phi_increase = inv.phi_increase.max(r.phi - p * (1.0 + 1e-12));
        }
        prev_phi = Some(r.phi);

        let want = r.schedule.delta * (r.t as f64).sqrt();
        let got = dot(r.x, r.x).sqrt();
        let err = if r.t == 0 { got } else { (got - want).abs() / want };
        inv.norm_law = inv.norm_law.max(err - 1e-9);

        let wmax = r.weights.iter().cloned().fold(neg, f64::max);
        inv.weight_cap = inv.weight_cap.max(wmax - 3.0 - 1e-6);

        inv.eigen = inv.eigen.max(r.quadratic_form() - r.eigen_budget() - 1e-8);

        if r.t % formula_stride == 0 {
            for (v, &w) in r.vectors.iter().zip(r.weights) {
                let closed = r.schedule.weight_formula(dot(v, r.x), r.t);
                inv.weight_formula = inv.weight_formula.max((w - closed).abs() / closed - 1e-6);
            }
        }

        let mut orth = dot(r.y, r.x).abs() - 1e-10;
        orth = orth.max(dot(r.y, r.weighted_sum).abs() - 1e-10 * r.phi);
        for &i in r.heavy {
            orth = orth.max(dot(r.y, &r.vectors[i]).abs() - 1e-10);
        }
        inv.orthogonality = inv.orthogonality.max(orth);
    })?;
    Ok((sol, inv))
}

/// Near-uniform points on `S²` (Fibonacci lattice).
pub fn fibonacci_sphere(count: usize) -> impl Iterator<Item = [f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count).map(move |i| {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
        let r = (1.0 - z * z).sqrt();
        let a = golden * i as f64;
        [r * a.cos(), r * a.sin(), z]
    })
}

pub fn value3(vectors: &[Vec<f64>], x: &[f64; 3]) -> f64 {
    vectors
        .iter()
        .map(|v| v[0] * x[0] + v[1] * x[1] + v[2] * x[2])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Grid search over `S²` followed by a shrinking-step local polish of the
/// best grid point. Returns an upper bound on the true optimum.
pub fn sphere_optimum3(vectors: &[Vec<f64>], grid: usize) -> f64 {
    let mut best = [0.0, 0.0, 1.0];
    let mut best_val = f64::INFINITY;
    for p in fibonacci_sphere(grid) {
        let v = value3(vectors, &p);
        if v < best_val {
            best_val = v;
            best = p;
        }
    }
    let mut step = 4.0 / (grid as f64).sqrt();
    while step > 1e-9 {
        let mut improved = false;
        for axis in 0..3 {
            for s in [step, -step] {
                let mut q = best;
                q[axis] += s;
                let len = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
                let q = [q[0] / len, q[1] / len, q[2] / len];
                let v = value3(vectors, &q);
                if v < best_val {
                    best_val = v;
                    best = q;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best_val
}
