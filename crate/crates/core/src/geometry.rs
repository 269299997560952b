//! Spherical caps, Gaussian tails and the comparison between the two.
//!
//! Volumes are normalized: the whole sphere `S^{n−1}` has volume 1, and a cap
//! of angular radius `θ` has volume
//!
//! ```text
//! vol(n, θ) = Γ(n/2) / (√π Γ((n−1)/2)) · ∫₀^θ sin^{n−2}(s) ds.
//! ```

use crate::linalg::{dot, LinalgError, UnitVector};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{what} = {value} is outside the admissible range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn domain(what: &'static str, value: f64, range: &'static str) -> GeometryError {
    GeometryError::Domain { what, value, range }
}

/// `{x ∈ S^{n−1} : ⟨x, pole⟩ ≥ cos θ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub pole: UnitVector,
    pub angle: f64,
}

impl Cap {
    pub fn new(pole: UnitVector, angle: f64) -> Result<Self, GeometryError> {
        if !(angle > 0.0 && angle <= PI) {
            return Err(domain("cap angle", angle, "(0, pi]"));
        }
        Ok(Self { pole, angle })
    }

    pub fn dim(&self) -> usize {
        self.pole.dim()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dot(self.pole.as_slice(), x) >= self.angle.cos()
    }

    pub fn volume(&self) -> f64 {
        cap_volume(self.dim(), self.angle).unwrap_or(f64::NAN)
    }

    /// The halfspace `⟨x, pole⟩ ≥ √n cos θ`, which meets the `√n`-sphere in
    /// the scaled copy of this cap.
    pub fn to_halfspace(&self) -> Halfspace {
        let n = self.dim() as f64;
        Halfspace {
            normal: self.pole.clone(),
            threshold: n.sqrt() * self.angle.cos(),
        }
    }
}

/// `{x ∈ Rⁿ : ⟨x, normal⟩ ≥ threshold}`; the threshold is measured in
/// standard deviations of the standard Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: UnitVector,
    pub threshold: f64,
}

impl Halfspace {
    pub fn new(normal: UnitVector, threshold: f64) -> Result<Self, GeometryError> {
        if !threshold.is_finite() {
            return Err(domain("halfspace threshold", threshold, "finite"));
        }
        Ok(Self { normal, threshold })
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dot(self.normal.as_slice(), x) >= self.threshold
    }

    /// Standard Gaussian measure of the halfspace.
    pub fn gaussian_measure(&self) -> f64 {
        gaussian_tail(self.threshold)
    }
}

/// `Γ(z + ½) / Γ(z)` for `z ∈ ½ℕ`, by the recurrence
/// `r(z + 1) = r(z)·(z + ½)/z` from `r(½) = 1/√π` or `r(1) = √π/2`.
/// Stays near `√z`, so nothing overflows however large `z` is.
fn half_gamma_ratio(twice_z: usize) -> f64 {
    debug_assert!(twice_z >= 1);
    let sqrt_pi = PI.sqrt();
    let (mut z, mut r) = if twice_z % 2 == 1 {
        (0.5, 1.0 / sqrt_pi)
    } else {
        (1.0, 0.5 * sqrt_pi)
    };
    let target = twice_z as f64 / 2.0;
    while z < target {
        r *= (z + 0.5) / z;
        z += 1.0;
    }
    r
}

/// Normalizing constant `Γ(n/2) / (√π Γ((n−1)/2))` of the cap integral.
fn cap_constant(n: usize) -> f64 {
    half_gamma_ratio(n - 1) / PI.sqrt()
}

/// Normalized volume of a cap of angular radius `angle` on `S^{n−1}`.
pub fn cap_volume(n: usize, angle: f64) -> Result<f64, GeometryError> {
    if n < 2 {
        return Err(domain("dimension", n as f64, "n >= 2"));
    }
    if !(angle > 0.0 && angle <= PI) {
        return Err(domain("cap angle", angle, "(0, pi]"));
    }
    if angle > FRAC_PI_2 {
        return Ok(1.0 - lower_cap_volume(n, PI - angle));
    }
    Ok(lower_cap_volume(n, angle))
}

/// Cap volume for `0 ≤ θ ≤ π/2`.
fn lower_cap_volume(n: usize, theta: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    if n == 2 {
        return theta / PI;
    }
    // sin^k(s) = sin^k(θ) · (sin s / sin θ)^k; the ratio is at most 1 on
    // [0, θ], so the integrand cannot underflow where it matters.
    let k = (n - 2) as f64;
    let ln_sin_theta = theta.sin().ln();
    let integral = integrate(
        |s| {
            let r = s.sin().ln() - ln_sin_theta;
            (k * r).exp()
        },
        0.0,
        theta,
        QUADRATURE_TOLERANCE,
    );
    (cap_constant(n).ln() + k * ln_sin_theta).exp() * integral
}

const QUADRATURE_TOLERANCE: f64 = 1e-13;

/// Angle `θ` with `cap_volume(n, θ) = volume`, by bisection.
pub fn cap_angle_from_volume(n: usize, volume: f64) -> Result<f64, GeometryError> {
    if n < 2 {
        return Err(domain("dimension", n as f64, "n >= 2"));
    }
    if !(volume > 0.0 && volume < 1.0) {
        return Err(domain("cap volume", volume, "(0, 1)"));
    }
    let (mut lo, mut hi) = (0.0f64, PI);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = cap_volume(n, mid)?;
        if (v - volume).abs() <= 1e-15 * volume {
            return Ok(mid);
        }
        if v < volume {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Interval exhausted at float resolution; return the closer end.
    let vl = if lo > 0.0 { cap_volume(n, lo)? } else { 0.0 };
    let vh = cap_volume(n, hi)?;
    Ok(if (vl - volume).abs() <= (vh - volume).abs() && lo > 0.0 {
        lo
    } else {
        hi
    })
}

/// Standard normal density.
pub fn gaussian_density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// `Φ̄(t) = P[N(0,1) ≥ t]`, via `erfc`; accurate to a few ulps wherever the
/// result is a normal float.
pub fn gaussian_tail(t: f64) -> f64 {
    0.5 * libm::erfc(t / std::f64::consts::SQRT_2)
}

/// `(C(t)·φ(t)/t, φ(t)/t)` with `C(t) = e^{−1/2}(1 − e^{−t})`, the elementary
/// sandwich around `Φ̄(t)` for `t > 0`.
pub fn gaussian_tail_bounds(t: f64) -> Result<(f64, f64), GeometryError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain("t", t, "(0, inf)"));
    }
    let upper = gaussian_density(t) / t;
    let c = (-0.5f64).exp() * (-(-t).exp_m1());
    Ok((c * upper, upper))
}

/// The sandwich constant valid uniformly for `t ≥ 1`.
pub fn gaussian_tail_lower_constant() -> f64 {
    (-0.5f64).exp() * (1.0 - (-1.0f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailInverse {
    /// Bisection inverse of [`gaussian_tail`].
    pub numeric: f64,
    /// `√(2L) − ln(2√π)/√(2L) − ln L/(2√(2L))` with `L = ln(1/δ)`.
    pub asymptotic: f64,
}

pub fn gaussian_tail_inverse(delta: f64) -> Result<TailInverse, GeometryError> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(domain("delta", delta, "(0, 1/2]"));
    }
    // Φ̄(39) is below the smallest subnormal, so the root lies in [0, 39].
    let (mut lo, mut hi) = (0.0f64, 39.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if gaussian_tail(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let numeric = 0.5 * (lo + hi);

    let l = (1.0 / delta).ln();
    let s = (2.0 * l).sqrt();
    let asymptotic = s - (2.0 * PI.sqrt()).ln() / s - l.ln() / (2.0 * s);
    Ok(TailInverse {
        numeric,
        asymptotic,
    })
}

/// A cap of angle `π/2 − φ` against the matching halfspace at distance
/// `√n sin φ` and the small-angle proxy `Φ̄(√n φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureComparison {
    pub cap_volume: f64,
    pub halfspace_measure: f64,
    pub tail: f64,
}

impl MeasureComparison {
    /// Largest ratio between any two of the three quantities.
    pub fn max_ratio(&self) -> f64 {
        let v = [self.cap_volume, self.halfspace_measure, self.tail];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi / lo
    }
}

pub fn measure_comparison(n: usize, phi: f64) -> Result<MeasureComparison, GeometryError> {
    if n < 2 {
        return Err(domain("dimension", n as f64, "n >= 2"));
    }
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(domain("phi", phi, "(0, pi/2)"));
    }
    let rn = (n as f64).sqrt();
    Ok(MeasureComparison {
        cap_volume: cap_volume(n, FRAC_PI_2 - phi)?,
        halfspace_measure: gaussian_tail(rn * phi.sin()),
        tail: gaussian_tail(rn * phi),
    })
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive integration to relative tolerance `rel_tol`. The initial
/// partition is geometric toward `b`, where the cap integrand concentrates.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const MAX_INTERVALS: usize = 4000;
    let mut edges = vec![a];
    let len = b - a;
    for j in 1..=48 {
        let e = b - len * 0.5f64.powi(j);
        if e > *edges.last().unwrap() {
            edges.push(e);
        }
    }
    edges.push(b);

    let mut parts: Vec<(f64, f64, f64, f64)> = edges
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || parts.len() >= MAX_INTERVALS {
            return total;
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return total;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts[worst] = (lo, mid, v1, e1);
        parts.push((mid, hi, v2, e2));
    }
}
